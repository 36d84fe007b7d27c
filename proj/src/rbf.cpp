#include "facefuse/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "facefuse/errors.hpp"

namespace facefuse {

KmeansResult kmeans(const std::vector<Eigen::VectorXd>& points, int k, int max_iter) {
    const int m = static_cast<int>(points.size());
    if (k < 1 || k > m) throw DataError("kmeans: k must be in [1, point count]");
    const int dim = static_cast<int>(points[0].size());

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& p : points) mean += p;
    mean /= m;

    // Seed centers at evenly spaced ranks of distance-to-mean. Deterministic,
    // spans the spread of the class.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return (points[a] - mean).squaredNorm() < (points[b] - mean).squaredNorm();
    });
    Eigen::MatrixXd centers(k, dim);
    for (int j = 0; j < k; ++j) {
        const int rank = (k == 1) ? 0 : static_cast<int>(std::llround(
                                            static_cast<double>(j) * (m - 1) / (k - 1)));
        centers.row(j) = points[order[rank]].transpose();
    }

    std::vector<int> assignment(m, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < m; ++i) {
            int best = 0;
            double best_d = (points[i].transpose() - centers.row(0)).squaredNorm();
            for (int j = 1; j < k; ++j) {
                const double d = (points[i].transpose() - centers.row(j)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }

        std::vector<int> counts(k, 0);
        for (int a : assignment) counts[a]++;
        // Empty-cluster repair: reseed from the farthest member of the
        // largest cluster.
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            const int big = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            int far_i = -1;
            double far_d = -1.0;
            for (int i = 0; i < m; ++i) {
                if (assignment[i] != big) continue;
                const double d = (points[i].transpose() - centers.row(big)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            assignment[far_i] = j;
            counts[big]--;
            counts[j]++;
            changed = true;
        }

        Eigen::MatrixXd new_centers = Eigen::MatrixXd::Zero(k, dim);
        for (int i = 0; i < m; ++i) new_centers.row(assignment[i]) += points[i].transpose();
        for (int j = 0; j < k; ++j) new_centers.row(j) /= counts[j];

        if (!changed && new_centers == centers) break;
        centers = new_centers;
        if (!changed) break;
    }
    return {centers, assignment};
}

RbfModel train_rbf(const std::vector<LabeledFeature>& features, const ClassList& classes,
                   const RbfTrainConfig& cfg) {
    if (cfg.clusters_per_class < 1 || cfg.width_scale <= 0.0 || cfg.kmeans_max_iter < 1)
        throw DataError("train_rbf: config fields must be positive");
    const int num_classes = static_cast<int>(classes.size());
    if (num_classes < 1 || features.empty()) throw DataError("train_rbf: empty training set");
    const int dim = static_cast<int>(features[0].coords.size());

    std::vector<std::vector<Eigen::VectorXd>> by_class(num_classes);
    for (const auto& f : features) {
        if (f.label < 0 || f.label >= num_classes) throw DataError("train_rbf: label out of range");
        if (f.coords.size() != dim)
            throw DataError("train_rbf: feature vectors have mismatched lengths");
        by_class[f.label].push_back(f.coords);
    }
    for (int c = 0; c < num_classes; ++c) {
        if (by_class[c].empty())
            throw DataError("train_rbf: class '" + classes[c] + "' has no samples");
        if (static_cast<int>(by_class[c].size()) < cfg.clusters_per_class)
            throw DataError("train_rbf: clusters_per_class exceeds size of class '" + classes[c] +
                            "'");
    }
    bool all_identical = true;
    for (const auto& f : features)
        if (f.coords != features[0].coords) {
            all_identical = false;
            break;
        }
    if (all_identical && features.size() > 1)
        throw DataError("train_rbf: all training features are identical");

    RbfModel model;
    model.classes = classes;
    model.config = cfg;
    const int total_k = cfg.clusters_per_class * num_classes;
    model.centers.resize(total_k, dim);
    model.widths.resize(total_k);
    model.center_classes.resize(total_k);

    std::vector<double> mean_dist(total_k, 0.0);
    std::vector<int> member_count(total_k, 0);
    int k = 0;
    for (int c = 0; c < num_classes; ++c) {
        const auto result = kmeans(by_class[c], cfg.clusters_per_class, cfg.kmeans_max_iter);
        for (int j = 0; j < cfg.clusters_per_class; ++j, ++k) {
            model.centers.row(k) = result.centers.row(j);
            model.center_classes[k] = c;
            double sum = 0.0;
            int cnt = 0;
            for (size_t i = 0; i < by_class[c].size(); ++i) {
                if (result.assignment[i] != j) continue;
                sum += (by_class[c][i].transpose() - result.centers.row(j)).norm();
                cnt++;
            }
            member_count[k] = cnt;
            mean_dist[k] = cnt > 0 ? sum / cnt : 0.0;
        }
    }

    for (int j = 0; j < total_k; ++j) {
        if (member_count[j] > 1 && mean_dist[j] > 0.0) {
            model.widths(j) = cfg.width_scale * mean_dist[j];
            continue;
        }
        // Singleton (or collapsed) cluster: half the distance to the nearest
        // distinct center.
        double nearest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < total_k; ++i) {
            if (i == j) continue;
            const double d = (model.centers.row(i) - model.centers.row(j)).norm();
            if (d > 0.0 && d < nearest) nearest = d;
        }
        if (!std::isfinite(nearest))
            throw DataError("train_rbf: degenerate clustering, all centers coincide");
        model.widths(j) = 0.5 * nearest;
    }

    // Ridge least squares readout over [activations, 1] against one-hot
    // targets.
    const int n = static_cast<int>(features.size());
    Eigen::MatrixXd design(n, total_k + 1);
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n, num_classes);
    for (int i = 0; i < n; ++i) {
        design.row(i).head(total_k) = rbf_activations(model, features[i].coords).transpose();
        design(i, total_k) = 1.0;
        targets(i, features[i].label) = 1.0;
    }
    constexpr double lambda = 1e-8;
    const Eigen::MatrixXd gram =
        design.transpose() * design +
        lambda * Eigen::MatrixXd::Identity(total_k + 1, total_k + 1);
    model.output_weights = gram.ldlt().solve(design.transpose() * targets);
    return model;
}

Eigen::VectorXd rbf_activations(const RbfModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.dim()) throw DataError("rbf_activations: dimension mismatch");
    const int k = model.num_centers();
    Eigen::VectorXd act(k);
    for (int j = 0; j < k; ++j) {
        const double d2 = (x.transpose() - model.centers.row(j)).squaredNorm();
        const double s = model.widths(j);
        act(j) = std::exp(-d2 / (2.0 * s * s));
    }
    return act;
}

std::pair<int, Eigen::VectorXd> rbf_predict(const RbfModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd act = rbf_activations(model, x);
    Eigen::VectorXd aug(model.num_centers() + 1);
    aug.head(model.num_centers()) = act;
    aug(model.num_centers()) = 1.0;
    const Eigen::VectorXd scores = model.output_weights.transpose() * aug;
    int best = 0;
    for (int c = 1; c < scores.size(); ++c)
        if (scores(c) > scores(best)) best = c;
    return {best, scores};
}

}  // namespace facefuse
