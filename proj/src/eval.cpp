#include "facefuse/eval.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "facefuse/errors.hpp"

namespace facefuse {

using nlohmann::json;

namespace {

// Shortest representation that round-trips the exact double.
std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, int expect_cols = -1) {
    const int r = static_cast<int>(rows.size());
    const int c = r > 0 ? static_cast<int>(rows[0].size()) : std::max(expect_cols, 0);
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

json eigenspace_to_json(const Eigenspace& es) {
    return json{{"n", es.n},
                {"u", es.u},
                {"mean", vector_to_json(es.mean)},
                {"basis", matrix_to_json(es.basis)},
                {"eigenvalues", vector_to_json(es.eigenvalues)}};
}

Eigenspace eigenspace_from_json(const json& j) {
    Eigenspace es;
    es.n = j.at("n").get<int>();
    es.u = j.at("u").get<int>();
    es.mean = vector_from_json(j.at("mean"));
    es.eigenvalues = vector_from_json(j.at("eigenvalues"));
    es.basis = matrix_from_json(j.at("basis"), es.u);
    if (es.basis.rows() != es.n || es.basis.cols() != es.u ||
        es.mean.size() != es.n || es.eigenvalues.size() != es.u)
        throw DataError("model JSON: inconsistent eigenspace dimensions");
    return es;
}

using PredictFn = std::function<int(const Eigen::VectorXd&)>;

EvalReport score_batches(const std::string& tag, const Split& split, const Eigenspace& es,
                         const PredictFn& predict, const json& config_echo) {
    EvalReport report;
    report.classifier_tag = tag;
    report.config_echo = config_echo;
    int pooled_correct = 0;
    int pooled_total = 0;
    double rate_sum = 0.0;
    for (size_t b = 0; b < split.probe_batches.size(); ++b) {
        const auto& batch = split.probe_batches[b];
        ClassRow row;
        row.cls = split.classes[b];
        row.size = static_cast<int>(batch.size());
        for (const auto& probe : batch)
            if (predict(project(es, probe.image)) == probe.label) row.correct++;
        row.rate = row.size > 0 ? static_cast<double>(row.correct) / row.size : 0.0;
        pooled_correct += row.correct;
        pooled_total += row.size;
        rate_sum += row.rate;
        report.per_class.push_back(std::move(row));
    }
    report.overall_rate =
        pooled_total > 0 ? static_cast<double>(pooled_correct) / pooled_total : 0.0;
    report.mean_batch_rate =
        report.per_class.empty() ? 0.0 : rate_sum / static_cast<double>(report.per_class.size());
    return report;
}

}  // namespace

std::string feature_matrix_hash(const std::vector<LabeledFeature>& features) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto absorb = [&h](const void* data, size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& f : features) {
        absorb(&f.label, sizeof f.label);
        absorb(f.coords.data(), sizeof(double) * f.coords.size());
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

ExperimentResult run_experiment(const Split& split, const DimensionSelector& sel,
                                const RbfTrainConfig& rbf_cfg, const MlpTrainConfig& mlp_cfg,
                                const std::vector<int>& mlp_hidden) {
    if (split.train.empty()) throw DataError("run_experiment: empty training set");

    std::vector<GrayImage> train_images;
    train_images.reserve(split.train.size());
    for (const auto& item : split.train) train_images.push_back(item.image);

    ExperimentResult result;
    result.eigenspace = fit_eigenspace(train_images, sel);
    if (result.eigenspace.u == 0)
        throw NumericError("run_experiment: zero retained eigenfaces (degenerate training set)");

    std::vector<LabeledFeature> features;
    features.reserve(split.train.size());
    for (const auto& item : split.train)
        features.push_back({project(result.eigenspace, item.image), item.label});
    const std::string feat_hash = feature_matrix_hash(features);

    result.rbf = train_rbf(features, split.classes, rbf_cfg);

    std::vector<int> layer_sizes;
    layer_sizes.push_back(result.eigenspace.u);
    if (mlp_hidden.empty())
        layer_sizes.push_back(2 * result.eigenspace.u);
    else
        layer_sizes.insert(layer_sizes.end(), mlp_hidden.begin(), mlp_hidden.end());
    layer_sizes.push_back(static_cast<int>(split.classes.size()));
    result.mlp = train_mlp(features, split.classes, mlp_cfg, layer_sizes);

    json echo_common{{"weights", {{"a", split.weights.a}, {"b", split.weights.b}}},
                     {"u", result.eigenspace.u},
                     {"split_seed", split.protocol.seed},
                     {"feature_hash", feat_hash}};
    json rbf_echo = echo_common;
    rbf_echo["rbf"] = {{"clusters_per_class", rbf_cfg.clusters_per_class},
                       {"width_scale", rbf_cfg.width_scale},
                       {"kmeans_max_iter", rbf_cfg.kmeans_max_iter},
                       {"seed", rbf_cfg.seed}};
    json mlp_echo = echo_common;
    mlp_echo["mlp"] = {{"learning_rate", mlp_cfg.learning_rate},
                       {"momentum", mlp_cfg.momentum},
                       {"epochs", mlp_cfg.epochs},
                       {"seed", mlp_cfg.seed},
                       {"init_scale", mlp_cfg.init_scale},
                       {"layer_sizes", layer_sizes}};

    result.rbf_report = score_batches(
        "rbf", split, result.eigenspace,
        [&](const Eigen::VectorXd& x) { return rbf_predict(result.rbf, x).first; }, rbf_echo);
    result.mlp_report = score_batches(
        "mlp", split, result.eigenspace,
        [&](const Eigen::VectorXd& x) { return mlp_predict(result.mlp, x).first; }, mlp_echo);
    return result;
}

std::vector<SweepRow> weight_sweep(const std::vector<FacePair>& pairs,
                                   const SplitProtocol& protocol,
                                   const std::vector<double>& a_grid,
                                   const DimensionSelector& sel, const RbfTrainConfig& rbf_cfg,
                                   const MlpTrainConfig& mlp_cfg) {
    std::vector<SweepRow> rows;
    for (double a : a_grid) {
        if (a < 0.0 || a > 1.0) throw DataError("weight_sweep: grid values must be in [0,1]");
        const Split split = make_split(pairs, protocol, FusionWeights::from_visual(a));
        const ExperimentResult r = run_experiment(split, sel, rbf_cfg, mlp_cfg);
        rows.push_back({a, r.rbf_report.overall_rate, r.mlp_report.overall_rate});
    }
    return rows;
}

json report_to_json(const EvalReport& report) {
    if (report.per_class.empty()) throw DataError("emit_report: report has no per-class rows");
    json per_class = json::array();
    for (const auto& row : report.per_class)
        per_class.push_back({{"class", row.cls},
                             {"size", row.size},
                             {"correct", row.correct},
                             {"rate", row.rate}});
    return json{{"classifier", report.classifier_tag},
                {"per_class", per_class},
                {"overall_rate", report.overall_rate},
                {"mean_batch_rate", report.mean_batch_rate},
                {"config_echo", report.config_echo}};
}

std::string report_to_csv(const EvalReport& report) {
    if (report.per_class.empty()) throw DataError("emit_report: report has no per-class rows");
    std::string out = "class,size,correct,rate\n";
    int total = 0, correct = 0;
    for (const auto& row : report.per_class) {
        out += row.cls + "," + std::to_string(row.size) + "," + std::to_string(row.correct) +
               "," + fmt_double(row.rate) + "\n";
        total += row.size;
        correct += row.correct;
    }
    out += "overall," + std::to_string(total) + "," + std::to_string(correct) + "," +
           fmt_double(report.overall_rate) + "\n";
    return out;
}

std::string comparison_csv(const EvalReport& rbf_report, const EvalReport& mlp_report) {
    if (rbf_report.per_class.size() != mlp_report.per_class.size())
        throw DataError("comparison_csv: reports cover different class sets");
    std::string out = "class,rbf_rate,mlp_rate\n";
    for (size_t i = 0; i < rbf_report.per_class.size(); ++i) {
        if (rbf_report.per_class[i].cls != mlp_report.per_class[i].cls)
            throw DataError("comparison_csv: reports cover different class sets");
        out += rbf_report.per_class[i].cls + "," + fmt_double(rbf_report.per_class[i].rate) +
               "," + fmt_double(mlp_report.per_class[i].rate) + "\n";
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "a,rbf_rate,mlp_rate\n";
    for (const auto& row : rows)
        out += fmt_double(row.a) + "," + fmt_double(row.rbf_rate) + "," +
               fmt_double(row.mlp_rate) + "\n";
    return out;
}

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("emit_report: cannot open for writing: " + path.string());
    if (format == ReportFormat::Json)
        out << report_to_json(report).dump(2) << "\n";
    else
        out << report_to_csv(report);
    if (!out) throw DataError("emit_report: write failed: " + path.string());
}

json split_manifest(const Split& split) {
    auto item_ref = [](const SplitItem& item) {
        return json{{"subject", item.subject}, {"sample", item.sample}, {"label", item.label}};
    };
    json train = json::array();
    for (const auto& item : split.train) train.push_back(item_ref(item));
    json batches = json::array();
    for (const auto& batch : split.probe_batches) {
        json b = json::array();
        for (const auto& item : batch) b.push_back(item_ref(item));
        batches.push_back(std::move(b));
    }
    return json{{"version", 1},
                {"classes", split.classes},
                {"weights", {{"a", split.weights.a}, {"b", split.weights.b}}},
                {"protocol",
                 {{"classes", split.protocol.classes},
                  {"train_per_class", split.protocol.train_per_class},
                  {"probe_in_class", split.protocol.probe_in_class},
                  {"probe_out_class", split.protocol.probe_out_class},
                  {"seed", split.protocol.seed}}},
                {"train", train},
                {"probe_batches", batches}};
}

json model_to_json(const Eigenspace& es, const RbfModel& model, const json& config_echo) {
    return json{{"version", 1},
                {"kind", "rbf"},
                {"eigenspace", eigenspace_to_json(es)},
                {"classifier",
                 {{"centers", matrix_to_json(model.centers)},
                  {"widths", vector_to_json(model.widths)},
                  {"center_classes", model.center_classes},
                  {"output_weights", matrix_to_json(model.output_weights)},
                  {"classes", model.classes},
                  {"config",
                   {{"clusters_per_class", model.config.clusters_per_class},
                    {"width_scale", model.config.width_scale},
                    {"kmeans_max_iter", model.config.kmeans_max_iter},
                    {"seed", model.config.seed}}}}},
                {"config_echo", config_echo}};
}

json model_to_json(const Eigenspace& es, const MlpModel& model, const json& config_echo) {
    json weights = json::array();
    for (const auto& w : model.weights) weights.push_back(matrix_to_json(w));
    json biases = json::array();
    for (const auto& b : model.biases) biases.push_back(vector_to_json(b));
    return json{{"version", 1},
                {"kind", "mlp"},
                {"eigenspace", eigenspace_to_json(es)},
                {"classifier",
                 {{"layer_sizes", model.layer_sizes},
                  {"weights", weights},
                  {"biases", biases},
                  {"classes", model.classes},
                  {"config",
                   {{"learning_rate", model.config.learning_rate},
                    {"momentum", model.config.momentum},
                    {"epochs", model.config.epochs},
                    {"seed", model.config.seed},
                    {"init_scale", model.config.init_scale}}}}},
                {"config_echo", config_echo}};
}

LoadedModel model_from_json(const json& j) {
    if (j.value("version", 0) != 1) throw DataError("model JSON: unsupported version");
    LoadedModel m;
    m.kind = j.at("kind").get<std::string>();
    m.eigenspace = eigenspace_from_json(j.at("eigenspace"));
    m.config_echo = j.value("config_echo", json::object());
    const json& c = j.at("classifier");
    if (m.kind == "rbf") {
        RbfModel rbf;
        rbf.centers = matrix_from_json(c.at("centers"), m.eigenspace.u);
        rbf.widths = vector_from_json(c.at("widths"));
        rbf.center_classes = c.at("center_classes").get<std::vector<int>>();
        rbf.output_weights = matrix_from_json(c.at("output_weights"));
        rbf.classes = c.at("classes").get<ClassList>();
        const json& cfg = c.at("config");
        rbf.config.clusters_per_class = cfg.at("clusters_per_class").get<int>();
        rbf.config.width_scale = cfg.at("width_scale").get<double>();
        rbf.config.kmeans_max_iter = cfg.at("kmeans_max_iter").get<int>();
        rbf.config.seed = cfg.at("seed").get<uint64_t>();
        m.rbf = std::move(rbf);
    } else if (m.kind == "mlp") {
        MlpModel mlp;
        mlp.layer_sizes = c.at("layer_sizes").get<std::vector<int>>();
        for (const auto& w : c.at("weights")) mlp.weights.push_back(matrix_from_json(w));
        for (const auto& b : c.at("biases")) mlp.biases.push_back(vector_from_json(b));
        mlp.classes = c.at("classes").get<ClassList>();
        const json& cfg = c.at("config");
        mlp.config.learning_rate = cfg.at("learning_rate").get<double>();
        mlp.config.momentum = cfg.at("momentum").get<double>();
        mlp.config.epochs = cfg.at("epochs").get<int>();
        mlp.config.seed = cfg.at("seed").get<uint64_t>();
        mlp.config.init_scale = cfg.at("init_scale").get<double>();
        m.mlp = std::move(mlp);
    } else {
        throw DataError("model JSON: unknown kind '" + m.kind + "'");
    }
    return m;
}

std::pair<int, Eigen::VectorXd> LoadedModel::predict(const Eigen::VectorXd& features) const {
    if (rbf) return rbf_predict(*rbf, features);
    return mlp_predict(*mlp, features);
}

const ClassList& LoadedModel::classes() const { return rbf ? rbf->classes : mlp->classes; }

}  // namespace facefuse
