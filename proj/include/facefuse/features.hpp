#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace facefuse {

/// One eigenspace feature vector with its class index (into a shared class
/// name list).
struct LabeledFeature {
    Eigen::VectorXd coords;
    int label = 0;
};

using ClassList = std::vector<std::string>;

}  // namespace facefuse
