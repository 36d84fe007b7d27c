#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facefuse/dataset.hpp"
#include "facefuse/eigenspace.hpp"
#include "facefuse/mlp.hpp"
#include "facefuse/rbf.hpp"

namespace facefuse {

struct ClassRow {
    std::string cls;
    int size = 0;
    int correct = 0;
    double rate = 0.0;
};

/// Recognition rates for one classifier run: one row per probe batch plus
/// the pooled rate. config_echo carries every parameter needed to replay the
/// run, including a hash of the projected training matrix.
struct EvalReport {
    std::string classifier_tag;  // "rbf" | "mlp"
    std::vector<ClassRow> per_class;
    double overall_rate = 0.0;     // pooled correct / pooled total
    double mean_batch_rate = 0.0;  // unweighted mean of per-batch rates
    nlohmann::json config_echo;
};

struct ExperimentResult {
    Eigenspace eigenspace;
    RbfModel rbf;
    MlpModel mlp;
    EvalReport rbf_report;
    EvalReport mlp_report;
};

/// Fits one eigenspace on the split's fused training images, trains both
/// classifiers on identical features and scores every probe batch. A probe
/// counts correct iff the predicted class equals its true label.
/// mlp_hidden empty means one hidden layer of 2 * feature dimension.
ExperimentResult run_experiment(const Split& split, const DimensionSelector& sel,
                                const RbfTrainConfig& rbf_cfg, const MlpTrainConfig& mlp_cfg,
                                const std::vector<int>& mlp_hidden = {});

struct SweepRow {
    double a = 0.0;
    double rbf_rate = 0.0;
    double mlp_rate = 0.0;
};

/// Re-runs the full pipeline once per grid value of the visual weight a
/// (b = 1 - a), sharing seeds and split structure across rows.
std::vector<SweepRow> weight_sweep(const std::vector<FacePair>& pairs,
                                   const SplitProtocol& protocol,
                                   const std::vector<double>& a_grid,
                                   const DimensionSelector& sel, const RbfTrainConfig& rbf_cfg,
                                   const MlpTrainConfig& mlp_cfg);

enum class ReportFormat { Json, Csv };

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);
/// Fig.-6-style per-class comparison of both classifiers, one row per class.
std::string comparison_csv(const EvalReport& rbf_report, const EvalReport& mlp_report);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path);

/// Replayable description of a split: file references, labels, seed and
/// protocol echo.
nlohmann::json split_manifest(const Split& split);

// --- model JSON (External Interfaces) ---

struct LoadedModel {
    std::string kind;  // "rbf" | "mlp"
    Eigenspace eigenspace;
    std::optional<RbfModel> rbf;
    std::optional<MlpModel> mlp;
    nlohmann::json config_echo;

    std::pair<int, Eigen::VectorXd> predict(const Eigen::VectorXd& features) const;
    const ClassList& classes() const;
};

nlohmann::json model_to_json(const Eigenspace& es, const RbfModel& model,
                             const nlohmann::json& config_echo);
nlohmann::json model_to_json(const Eigenspace& es, const MlpModel& model,
                             const nlohmann::json& config_echo);
LoadedModel model_from_json(const nlohmann::json& j);

/// FNV-1a over the raw bytes of the projected training matrix; recorded in
/// config_echo so both classifier runs can prove they consumed the same
/// features.
std::string feature_matrix_hash(const std::vector<LabeledFeature>& features);

}  // namespace facefuse
