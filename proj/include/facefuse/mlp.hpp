#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "facefuse/features.hpp"

namespace facefuse {

struct MlpTrainConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    int epochs = 500;
    uint64_t seed = 0;
    double init_scale = 0.5;  // uniform init half-range
};

/// Fully connected feed-forward net, logistic sigmoid on every layer
/// including the output.
struct MlpModel {
    std::vector<int> layer_sizes;          // [input, hidden..., classes]
    std::vector<Eigen::MatrixXd> weights;  // per layer, in x out
    std::vector<Eigen::VectorXd> biases;   // per layer, length out
    ClassList classes;
    MlpTrainConfig config;

    int num_layers() const { return static_cast<int>(weights.size()); }
};

/// Gradients of E = 1/2 |output - target|^2, same shapes as the parameters.
struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

MlpModel make_mlp(const std::vector<int>& layer_sizes, const ClassList& classes);

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& x);

MlpGradients mlp_gradient(const MlpModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& target);

/// Online backprop with momentum: uniform [-init_scale, init_scale] init,
/// seeded per-epoch shuffling, dw(t) = -eta * dE/dw + alpha * dw(t-1).
/// layer_sizes may omit the input/output sizes check; they must chain with
/// the feature dimension and class count.
MlpModel train_mlp(const std::vector<LabeledFeature>& features, const ClassList& classes,
                   const MlpTrainConfig& cfg, const std::vector<int>& layer_sizes);

std::pair<int, Eigen::VectorXd> mlp_predict(const MlpModel& model, const Eigen::VectorXd& x);

}  // namespace facefuse
