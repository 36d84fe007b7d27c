#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "facefuse/errors.hpp"
#include "facefuse/eval.hpp"

using namespace facefuse;
using nlohmann::json;

namespace {

DimensionSelector parse_selector(const std::string& spec) {
    if (spec.rfind("energy:", 0) == 0)
        return DimensionSelector::energy_fraction(std::stod(spec.substr(7)));
    try {
        size_t pos = 0;
        const int u = std::stoi(spec, &pos);
        if (pos != spec.size()) throw std::invalid_argument(spec);
        return DimensionSelector::fixed(u);
    } catch (const std::exception&) {
        throw DataError("--u expects an integer or energy:<fraction>, got '" + spec + "'");
    }
}

SplitProtocol load_protocol(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open protocol file: " + path);
    json j;
    in >> j;
    SplitProtocol p;
    p.classes = j.value("classes", p.classes);
    p.train_per_class = j.value("train_per_class", p.train_per_class);
    p.probe_in_class = j.value("probe_in_class", p.probe_in_class);
    p.probe_out_class = j.value("probe_out_class", p.probe_out_class);
    p.seed = j.value("seed", p.seed);
    return p;
}

std::vector<FacePair> load_data(const std::string& data_dir, const std::string& synth_manifest,
                                std::optional<ImageSize> target_size) {
    if (!synth_manifest.empty()) {
        std::ifstream in(synth_manifest);
        if (!in) throw DataError("cannot open synth manifest: " + synth_manifest);
        json j;
        in >> j;
        SynthConfig cfg;
        cfg.classes = j.value("classes", cfg.classes);
        cfg.samples_per_class = j.value("samples_per_class", cfg.samples_per_class);
        cfg.width = j.value("width", cfg.width);
        cfg.height = j.value("height", cfg.height);
        cfg.illum_strength = j.value("illum_strength", cfg.illum_strength);
        cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
        cfg.seed = j.value("seed", cfg.seed);
        return synth_generate(cfg);
    }
    if (data_dir.empty()) throw DataError("either --data or --synth-manifest is required");
    return load_pairs(data_dir, target_size);
}

ImageSize parse_size(const std::string& spec) {
    const size_t x = spec.find('x');
    if (x == std::string::npos)
        throw DataError("--size expects WxH, got '" + spec + "'");
    return ImageSize{std::stoi(spec.substr(0, x)), std::stoi(spec.substr(x + 1))};
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> grid;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    if (grid.empty()) throw DataError("--a-grid is empty");
    return grid;
}

ReportFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return ReportFormat::Csv;
    return ReportFormat::Json;
}

struct CommonFlags {
    std::string data_dir;
    std::string synth_manifest;
    std::string protocol_path;
    std::string u_spec = "energy:0.95";
    std::string target_size;
    uint64_t seed = 0;
    RbfTrainConfig rbf;
    MlpTrainConfig mlp;
    std::vector<int> hidden;
};

void add_classifier_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--u", f.u_spec, "retained eigenfaces: integer or energy:<fraction>");
    cmd->add_option("--target-size", f.target_size, "resize inputs to WxH on load");
    cmd->add_option("--clusters-per-class", f.rbf.clusters_per_class, "RBF centers per class");
    cmd->add_option("--width-scale", f.rbf.width_scale, "RBF Gaussian width multiplier");
    cmd->add_option("--kmeans-max-iter", f.rbf.kmeans_max_iter, "k-means iteration cap");
    cmd->add_option("--eta", f.mlp.learning_rate, "MLP learning rate");
    cmd->add_option("--momentum", f.mlp.momentum, "MLP momentum");
    cmd->add_option("--epochs", f.mlp.epochs, "MLP training epochs");
    cmd->add_option("--init-scale", f.mlp.init_scale, "MLP uniform init half-range");
    cmd->add_option("--hidden", f.hidden, "MLP hidden layer sizes (default 2*u)");
}

SplitProtocol resolve_protocol(const CommonFlags& f) {
    SplitProtocol protocol;
    if (!f.protocol_path.empty()) protocol = load_protocol(f.protocol_path);
    if (f.protocol_path.empty()) protocol.seed = f.seed;
    return protocol;
}

int run(int argc, char** argv) {
    CLI::App app{"visual/thermal face fusion and eigenface recognition toolkit"};
    app.require_subcommand(1);

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "fuse one visual/thermal pair");
    std::string visual_path, thermal_path, fuse_out = "fused.pgm";
    double fuse_a = 0.70;
    fuse_cmd->add_option("--visual", visual_path, "visual PGM")->required();
    fuse_cmd->add_option("--thermal", thermal_path, "thermal PGM")->required();
    fuse_cmd->add_option("--a", fuse_a, "visual weight (thermal gets 1-a)");
    fuse_cmd->add_option("--out", fuse_out, "output PGM path");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic paired dataset");
    SynthConfig synth_cfg;
    std::string synth_size = "32x32", synth_out;
    synth_cmd->add_option("--classes", synth_cfg.classes, "number of classes");
    synth_cmd->add_option("--per-class", synth_cfg.samples_per_class, "samples per class");
    synth_cmd->add_option("--size", synth_size, "image size WxH");
    synth_cmd->add_option("--illum", synth_cfg.illum_strength, "illumination gradient strength");
    synth_cmd->add_option("--noise", synth_cfg.noise_sigma, "Gaussian noise sigma");
    synth_cmd->add_option("--seed", synth_cfg.seed, "generator seed");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train eigenspace + one classifier");
    CommonFlags train_flags;
    std::string classifier, model_out, manifest_out;
    train_cmd->add_option("--data", train_flags.data_dir, "directory of paired PGM files");
    train_cmd->add_option("--synth-manifest", train_flags.synth_manifest,
                          "generate data from a synth-config JSON instead of --data");
    train_cmd->add_option("--classifier", classifier, "rbf or mlp")->required();
    train_cmd->add_option("--seed", train_flags.seed, "split + classifier seed");
    train_cmd->add_option("--protocol", train_flags.protocol_path, "split protocol JSON");
    double train_a = 0.70;
    train_cmd->add_option("--a", train_a, "visual fusion weight");
    train_cmd->add_option("--model-out", model_out, "model JSON path")->required();
    train_cmd->add_option("--manifest-out", manifest_out, "also write the split manifest JSON");
    add_classifier_flags(train_cmd, train_flags);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score probe batches with a trained model");
    std::string eval_model, eval_report;
    CommonFlags eval_flags;
    eval_cmd->add_option("--model", eval_model, "model JSON")->required();
    eval_cmd->add_option("--data", eval_flags.data_dir, "directory of paired PGM files");
    eval_cmd->add_option("--synth-manifest", eval_flags.synth_manifest,
                         "generate data from a synth-config JSON instead of --data");
    eval_cmd->add_option("--protocol", eval_flags.protocol_path, "split protocol JSON");
    eval_cmd->add_option("--target-size", eval_flags.target_size, "resize inputs to WxH");
    eval_cmd->add_option("--report", eval_report, "report path (.json or .csv)")->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "fusion weight sweep over a grid of a values");
    CommonFlags sweep_flags;
    std::string grid_spec = "0,0.3,0.5,0.7,1.0", sweep_report;
    sweep_cmd->add_option("--data", sweep_flags.data_dir, "directory of paired PGM files");
    sweep_cmd->add_option("--synth-manifest", sweep_flags.synth_manifest,
                          "generate data from a synth-config JSON instead of --data");
    sweep_cmd->add_option("--a-grid", grid_spec, "comma-separated visual weights");
    sweep_cmd->add_option("--protocol", sweep_flags.protocol_path, "split protocol JSON");
    sweep_cmd->add_option("--seed", sweep_flags.seed, "split + classifier seed");
    sweep_cmd->add_option("--report", sweep_report, "output CSV path")->required();
    add_classifier_flags(sweep_cmd, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    if (fuse_cmd->parsed()) {
        const GrayImage fused = fuse(load_image(visual_path), load_image(thermal_path),
                                     FusionWeights::from_visual(fuse_a));
        save_image(fused, fuse_out);
        std::cout << "wrote " << fuse_out << "\n";
        return 0;
    }
    if (synth_cmd->parsed()) {
        const ImageSize size = parse_size(synth_size);
        synth_cfg.width = size.width;
        synth_cfg.height = size.height;
        const auto pairs = synth_generate(synth_cfg);
        write_pairs(pairs, synth_out);
        std::cout << "wrote " << 2 * pairs.size() << " images to " << synth_out << "\n";
        return 0;
    }
    if (train_cmd->parsed()) {
        CommonFlags& f = train_flags;
        std::optional<ImageSize> size;
        if (!f.target_size.empty()) size = parse_size(f.target_size);
        const auto pairs = load_data(f.data_dir, f.synth_manifest, size);
        const SplitProtocol protocol = resolve_protocol(f);
        const Split split = make_split(pairs, protocol, FusionWeights::from_visual(train_a));
        f.rbf.seed = f.seed;
        f.mlp.seed = f.seed;
        const ExperimentResult r =
            run_experiment(split, parse_selector(f.u_spec), f.rbf, f.mlp, f.hidden);
        json model_json;
        if (classifier == "rbf")
            model_json = model_to_json(r.eigenspace, r.rbf, r.rbf_report.config_echo);
        else if (classifier == "mlp")
            model_json = model_to_json(r.eigenspace, r.mlp, r.mlp_report.config_echo);
        else
            throw CLI::ValidationError("--classifier must be rbf or mlp");
        write_text(model_out, model_json.dump(2) + "\n");
        if (!manifest_out.empty()) write_text(manifest_out, split_manifest(split).dump(2) + "\n");
        const EvalReport& rep = classifier == "rbf" ? r.rbf_report : r.mlp_report;
        std::cout << "trained " << classifier << ", training-split overall rate "
                  << rep.overall_rate << ", wrote " << model_out << "\n";
        return 0;
    }
    if (eval_cmd->parsed()) {
        std::ifstream in(eval_model);
        if (!in) throw DataError("cannot open model: " + eval_model);
        json j;
        in >> j;
        const LoadedModel model = model_from_json(j);

        std::optional<ImageSize> size;
        if (!eval_flags.target_size.empty()) size = parse_size(eval_flags.target_size);
        const auto pairs = load_data(eval_flags.data_dir, eval_flags.synth_manifest, size);
        const SplitProtocol protocol = resolve_protocol(eval_flags);
        const json w = model.config_echo.value("weights", json{{"a", 0.70}, {"b", 0.30}});
        const Split split =
            make_split(pairs, protocol, FusionWeights(w.at("a"), w.at("b")));

        EvalReport report;
        report.classifier_tag = model.kind;
        report.config_echo = model.config_echo;
        report.config_echo["protocol"] = split_manifest(split)["protocol"];
        int pooled_correct = 0, pooled_total = 0;
        double rate_sum = 0.0;
        for (size_t b = 0; b < split.probe_batches.size(); ++b) {
            ClassRow row;
            row.cls = split.classes[b];
            row.size = static_cast<int>(split.probe_batches[b].size());
            for (const auto& probe : split.probe_batches[b]) {
                const int pred = model.predict(project(model.eigenspace, probe.image)).first;
                // class identity matches by name, not index
                if (model.classes()[pred] == split.classes[probe.label]) row.correct++;
            }
            row.rate = row.size > 0 ? static_cast<double>(row.correct) / row.size : 0.0;
            pooled_correct += row.correct;
            pooled_total += row.size;
            rate_sum += row.rate;
            report.per_class.push_back(std::move(row));
        }
        report.overall_rate =
            pooled_total > 0 ? static_cast<double>(pooled_correct) / pooled_total : 0.0;
        report.mean_batch_rate = report.per_class.empty()
                                     ? 0.0
                                     : rate_sum / static_cast<double>(report.per_class.size());
        emit_report(report, format_from_path(eval_report), eval_report);
        std::cout << "overall rate " << report.overall_rate << ", wrote " << eval_report << "\n";
        return 0;
    }
    if (sweep_cmd->parsed()) {
        CommonFlags& f = sweep_flags;
        std::optional<ImageSize> size;
        if (!f.target_size.empty()) size = parse_size(f.target_size);
        const auto pairs = load_data(f.data_dir, f.synth_manifest, size);
        const SplitProtocol protocol = resolve_protocol(f);
        f.rbf.seed = f.seed;
        f.mlp.seed = f.seed;
        const auto rows = weight_sweep(pairs, protocol, parse_grid(grid_spec),
                                       parse_selector(f.u_spec), f.rbf, f.mlp);
        write_text(sweep_report, sweep_to_csv(rows));
        std::cout << "wrote " << sweep_report << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
