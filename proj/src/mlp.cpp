#include "facefuse/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "facefuse/errors.hpp"

namespace facefuse {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_architecture(const std::vector<int>& layer_sizes) {
    if (layer_sizes.size() < 3)
        throw DataError("mlp: need at least one hidden layer ([in, hidden..., out])");
    for (int s : layer_sizes)
        if (s < 1) throw DataError("mlp: layer sizes must be >= 1");
}

// Forward pass keeping every layer's activation (a[0] is the input).
std::vector<Eigen::VectorXd> forward_all(const MlpModel& model, const Eigen::VectorXd& x) {
    std::vector<Eigen::VectorXd> acts;
    acts.reserve(model.num_layers() + 1);
    acts.push_back(x);
    for (int l = 0; l < model.num_layers(); ++l) {
        const Eigen::VectorXd z = model.weights[l].transpose() * acts.back() + model.biases[l];
        acts.push_back(z.unaryExpr([](double v) { return sigmoid(v); }));
    }
    return acts;
}

}  // namespace

MlpModel make_mlp(const std::vector<int>& layer_sizes, const ClassList& classes) {
    check_architecture(layer_sizes);
    if (layer_sizes.back() != static_cast<int>(classes.size()))
        throw DataError("mlp: output layer size must equal class count");
    MlpModel model;
    model.layer_sizes = layer_sizes;
    model.classes = classes;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        model.weights.push_back(Eigen::MatrixXd::Zero(layer_sizes[l], layer_sizes[l + 1]));
        model.biases.push_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
    }
    return model;
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.layer_sizes.front())
        throw DataError("mlp_forward: input length mismatch");
    return forward_all(model, x).back();
}

MlpGradients mlp_gradient(const MlpModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& target) {
    if (x.size() != model.layer_sizes.front())
        throw DataError("mlp_gradient: input length mismatch");
    if (target.size() != model.layer_sizes.back())
        throw DataError("mlp_gradient: target length mismatch");

    const auto acts = forward_all(model, x);
    const int layers = model.num_layers();
    MlpGradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    // delta = dE/dz, propagated backwards; sigmoid' = a(1-a)
    Eigen::VectorXd delta =
        (acts.back() - target).cwiseProduct(acts.back().cwiseProduct(
            (1.0 - acts.back().array()).matrix()));
    for (int l = layers - 1; l >= 0; --l) {
        grads.weights[l] = acts[l] * delta.transpose();
        grads.biases[l] = delta;
        if (l > 0) {
            const Eigen::VectorXd back = model.weights[l] * delta;
            delta = back.cwiseProduct(
                acts[l].cwiseProduct((1.0 - acts[l].array()).matrix()));
        }
    }
    return grads;
}

MlpModel train_mlp(const std::vector<LabeledFeature>& features, const ClassList& classes,
                   const MlpTrainConfig& cfg, const std::vector<int>& layer_sizes) {
    if (cfg.learning_rate < 0.0 || cfg.momentum < 0.0 || cfg.momentum >= 1.0 ||
        cfg.epochs < 1 || cfg.init_scale <= 0.0)
        throw DataError("train_mlp: invalid config");
    if (features.empty()) throw DataError("train_mlp: empty training set");
    const int num_classes = static_cast<int>(classes.size());
    std::vector<int> class_counts(num_classes, 0);
    for (const auto& f : features) {
        if (f.label < 0 || f.label >= num_classes) throw DataError("train_mlp: label out of range");
        class_counts[f.label]++;
    }
    for (int c = 0; c < num_classes; ++c)
        if (class_counts[c] == 0)
            throw DataError("train_mlp: class '" + classes[c] + "' has no samples");
    if (layer_sizes.front() != features[0].coords.size())
        throw DataError("train_mlp: input layer size must equal feature dimension");

    MlpModel model = make_mlp(layer_sizes, classes);
    model.config = cfg;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> init(-cfg.init_scale, cfg.init_scale);
    for (auto& w : model.weights)
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) w(i, j) = init(rng);
    for (auto& b : model.biases)
        for (int i = 0; i < b.size(); ++i) b(i) = init(rng);

    std::vector<Eigen::MatrixXd> vel_w;
    std::vector<Eigen::VectorXd> vel_b;
    for (int l = 0; l < model.num_layers(); ++l) {
        vel_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vel_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }

    std::vector<int> order(features.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int i : order) {
            Eigen::VectorXd target = Eigen::VectorXd::Zero(num_classes);
            target(features[i].label) = 1.0;
            const MlpGradients g = mlp_gradient(model, features[i].coords, target);
            for (int l = 0; l < model.num_layers(); ++l) {
                vel_w[l] = -cfg.learning_rate * g.weights[l] + cfg.momentum * vel_w[l];
                vel_b[l] = -cfg.learning_rate * g.biases[l] + cfg.momentum * vel_b[l];
                model.weights[l] += vel_w[l];
                model.biases[l] += vel_b[l];
            }
        }
        for (const auto& w : model.weights)
            if (!w.allFinite())
                throw NumericError("train_mlp: non-finite weights at epoch " +
                                   std::to_string(epoch));
    }
    return model;
}

std::pair<int, Eigen::VectorXd> mlp_predict(const MlpModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd scores = mlp_forward(model, x);
    int best = 0;
    for (int c = 1; c < scores.size(); ++c)
        if (scores(c) > scores(best)) best = c;
    return {best, scores};
}

}  // namespace facefuse
