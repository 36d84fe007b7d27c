#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "facefuse/features.hpp"

namespace facefuse {

struct RbfTrainConfig {
    int clusters_per_class = 2;
    double width_scale = 2.0;
    int kmeans_max_iter = 100;
    uint64_t seed = 0;
};

/// Gaussian RBF classifier: per-class k-means centers, per-cluster widths,
/// ridge-trained linear readout.
struct RbfModel {
    Eigen::MatrixXd centers;          // K x u, one center per row
    Eigen::VectorXd widths;           // K, all > 0
    std::vector<int> center_classes;  // class index each center was built from
    Eigen::MatrixXd output_weights;   // (K+1) x C, last row is the bias
    ClassList classes;
    RbfTrainConfig config;

    int num_centers() const { return static_cast<int>(centers.rows()); }
    int num_classes() const { return static_cast<int>(classes.size()); }
    int dim() const { return static_cast<int>(centers.cols()); }
};

/// Supervised training: k-means runs inside each class, so no center ever
/// mixes labels. Widths are width_scale * mean member distance (singleton
/// clusters fall back to half the distance to the nearest other center).
/// The readout solves ridge least squares against one-hot targets.
RbfModel train_rbf(const std::vector<LabeledFeature>& features, const ClassList& classes,
                   const RbfTrainConfig& cfg);

/// activation_k = exp(-|x - c_k|^2 / (2 sigma_k^2)).
Eigen::VectorXd rbf_activations(const RbfModel& model, const Eigen::VectorXd& x);

/// Returns (argmax class index, raw class scores); ties break to the lowest
/// class index.
std::pair<int, Eigen::VectorXd> rbf_predict(const RbfModel& model, const Eigen::VectorXd& x);

/// Plain k-means on an unlabeled point set with the same deterministic
/// seeding and empty-cluster repair train_rbf uses per class. Exposed for the
/// pooled-clustering comparison and tests.
struct KmeansResult {
    Eigen::MatrixXd centers;          // k x u
    std::vector<int> assignment;      // per point, center index
};
KmeansResult kmeans(const std::vector<Eigen::VectorXd>& points, int k, int max_iter);

}  // namespace facefuse
