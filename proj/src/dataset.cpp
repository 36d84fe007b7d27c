#include "facefuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "facefuse/errors.hpp"

namespace facefuse {

namespace fs = std::filesystem;

std::vector<FacePair> load_pairs(const fs::path& root, std::optional<ImageSize> target_size) {
    if (!fs::is_directory(root)) throw DataError("load_pairs: not a directory: " + root.string());

    struct Slot {
        std::optional<fs::path> visual;
        std::optional<fs::path> thermal;
    };
    std::map<std::pair<std::string, std::string>, Slot> slots;

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        const std::string stem = path.stem().string();
        // <subject>_<sample>_<v|t>; subject may itself contain underscores
        const size_t p2 = stem.rfind('_');
        const size_t p1 = p2 == std::string::npos ? std::string::npos : stem.rfind('_', p2 - 1);
        if (p1 == std::string::npos || p1 == 0 || p2 + 2 != stem.size())
            throw DataError("load_pairs: unparsable filename: " + path.filename().string());
        const std::string subject = stem.substr(0, p1);
        const std::string sample = stem.substr(p1 + 1, p2 - p1 - 1);
        const char channel = stem[p2 + 1];
        if (channel != 'v' && channel != 't')
            throw DataError("load_pairs: unparsable filename: " + path.filename().string());
        auto& slot = slots[{subject, sample}];
        (channel == 'v' ? slot.visual : slot.thermal) = path;
    }

    std::vector<FacePair> pairs;
    for (const auto& [key, slot] : slots) {
        if (!slot.visual || !slot.thermal)
            throw DataError("load_pairs: unpaired sample " + key.first + "_" + key.second +
                            ", missing " + (slot.visual ? "thermal" : "visual") + " file");
        FacePair pair;
        pair.subject = key.first;
        pair.sample = key.second;
        pair.visual = load_image(*slot.visual);
        pair.thermal = load_image(*slot.thermal);
        if (target_size) {
            pair.visual = resize_bilinear(pair.visual, target_size->width, target_size->height);
            pair.thermal = resize_bilinear(pair.thermal, target_size->width, target_size->height);
        } else if (!pair.visual.same_dims(pair.thermal)) {
            throw DataError("load_pairs: dimension mismatch for " + key.first + "_" + key.second +
                            " (no target size given)");
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

Split make_split(const std::vector<FacePair>& pairs, const SplitProtocol& protocol,
                 const FusionWeights& weights) {
    if (protocol.classes < 1 || protocol.train_per_class < 1 || protocol.probe_in_class < 0 ||
        protocol.probe_out_class < 0)
        throw DataError("make_split: invalid protocol counts");

    std::map<std::string, std::vector<const FacePair*>> by_subject;
    for (const auto& p : pairs) by_subject[p.subject].push_back(&p);

    if (static_cast<int>(by_subject.size()) < protocol.classes)
        throw DataError("make_split: only " + std::to_string(by_subject.size()) +
                        " classes available, protocol needs " + std::to_string(protocol.classes));

    std::mt19937_64 rng(protocol.seed);

    std::vector<std::string> subjects;
    for (const auto& [s, _] : by_subject) subjects.push_back(s);
    std::shuffle(subjects.begin(), subjects.end(), rng);
    subjects.resize(protocol.classes);
    std::sort(subjects.begin(), subjects.end());

    const int needed = protocol.train_per_class + protocol.probe_in_class;
    Split split;
    split.classes = subjects;
    split.weights = weights;
    split.protocol = protocol;

    // Per class: shuffled samples, first train_per_class train, the rest is
    // the test pool. In-class probes take the pool's head; impostor draws
    // continue from a per-class cursor.
    std::vector<std::vector<SplitItem>> test_pools(protocol.classes);
    std::vector<size_t> cursor(protocol.classes);
    for (int c = 0; c < protocol.classes; ++c) {
        auto samples = by_subject[subjects[c]];
        if (static_cast<int>(samples.size()) < needed)
            throw DataError("make_split: class '" + subjects[c] + "' has " +
                            std::to_string(samples.size()) + " samples, needs " +
                            std::to_string(needed));
        std::shuffle(samples.begin(), samples.end(), rng);
        for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
            SplitItem item;
            item.image = fuse(samples[i]->visual, samples[i]->thermal, weights);
            item.label = c;
            item.subject = samples[i]->subject;
            item.sample = samples[i]->sample;
            if (i < protocol.train_per_class)
                split.train.push_back(std::move(item));
            else
                test_pools[c].push_back(std::move(item));
        }
        cursor[c] = std::min<size_t>(protocol.probe_in_class, test_pools[c].size());
    }

    for (int c = 0; c < protocol.classes; ++c) {
        std::vector<SplitItem> batch;
        for (int i = 0; i < protocol.probe_in_class; ++i) batch.push_back(test_pools[c][i]);
        // impostors round-robin over the other classes, starting after c
        int drawn = 0;
        for (int step = 1; drawn < protocol.probe_out_class; ++step) {
            const int d = (c + step) % protocol.classes;
            if (d == c) continue;
            auto& pool = test_pools[d];
            batch.push_back(pool[cursor[d] % pool.size()]);
            cursor[d]++;
            drawn++;
        }
        split.probe_batches.push_back(std::move(batch));
    }
    return split;
}

namespace {

uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t stream_seed(uint64_t seed, uint64_t cls, uint64_t sample, uint64_t tag) {
    return mix64(mix64(mix64(seed ^ mix64(cls)) ^ mix64(sample)) ^ tag);
}

// Sum of random Gaussian blobs over a constant base, clamped to [0,1].
GrayImage blob_template(int width, int height, std::mt19937_64& rng, int blobs) {
    std::uniform_real_distribution<double> pos(0.15, 0.85);
    std::uniform_real_distribution<double> spread(0.08, 0.22);
    std::uniform_real_distribution<double> amp(-0.45, 0.55);
    GrayImage img(width, height, 0.4);
    const double scale = std::min(width, height);
    for (int b = 0; b < blobs; ++b) {
        const double cx = pos(rng) * (width - 1);
        const double cy = pos(rng) * (height - 1);
        const double sigma = spread(rng) * scale;
        const double a = amp(rng);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                img.at(x, y) += a * std::exp(-d2 / (2.0 * sigma * sigma));
            }
    }
    for (double& p : img.pixels) p = std::clamp(p, 0.0, 1.0);
    return img;
}

}  // namespace

std::vector<FacePair> synth_generate(const SynthConfig& cfg) {
    if (cfg.classes < 1 || cfg.samples_per_class < 1 || cfg.width < 1 || cfg.height < 1)
        throw DataError("synth_generate: counts and dimensions must be positive");
    if (cfg.illum_strength < 0.0 || cfg.noise_sigma < 0.0)
        throw DataError("synth_generate: illum_strength and noise_sigma must be >= 0");

    std::vector<FacePair> pairs;
    pairs.reserve(static_cast<size_t>(cfg.classes) * cfg.samples_per_class);
    for (int c = 0; c < cfg.classes; ++c) {
        std::mt19937_64 vrng(stream_seed(cfg.seed, c, 0, 1));
        std::mt19937_64 trng(stream_seed(cfg.seed, c, 0, 2));
        const GrayImage vtpl = blob_template(cfg.width, cfg.height, vrng, 4);
        const GrayImage ttpl = blob_template(cfg.width, cfg.height, trng, 3);

        char subject[16];
        std::snprintf(subject, sizeof subject, "c%02d", c);
        for (int s = 0; s < cfg.samples_per_class; ++s) {
            // independent streams so thermal pixels never depend on the
            // illumination draws
            std::mt19937_64 vs(stream_seed(cfg.seed, c, s + 1, 3));
            std::mt19937_64 ts(stream_seed(cfg.seed, c, s + 1, 4));
            std::uniform_real_distribution<double> grad(-1.0, 1.0);
            std::normal_distribution<double> noise(0.0, 1.0);

            FacePair pair;
            pair.subject = subject;
            char sample[16];
            std::snprintf(sample, sizeof sample, "%03d", s);
            pair.sample = sample;

            const double gx = grad(vs);
            const double gy = grad(vs);
            pair.visual = GrayImage(cfg.width, cfg.height);
            for (int y = 0; y < cfg.height; ++y)
                for (int x = 0; x < cfg.width; ++x) {
                    const double nx = cfg.width > 1 ? x / (cfg.width - 1.0) - 0.5 : 0.0;
                    const double ny = cfg.height > 1 ? y / (cfg.height - 1.0) - 0.5 : 0.0;
                    double v = vtpl.at(x, y) + cfg.illum_strength * (gx * nx + gy * ny) +
                               cfg.noise_sigma * noise(vs);
                    pair.visual.at(x, y) = std::clamp(v, 0.0, 1.0);
                }
            pair.thermal = GrayImage(cfg.width, cfg.height);
            for (int y = 0; y < cfg.height; ++y)
                for (int x = 0; x < cfg.width; ++x) {
                    double t = ttpl.at(x, y) + cfg.noise_sigma * noise(ts);
                    pair.thermal.at(x, y) = std::clamp(t, 0.0, 1.0);
                }
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

void write_pairs(const std::vector<FacePair>& pairs, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& p : pairs) {
        save_image(p.visual, dir / (p.subject + "_" + p.sample + "_v.pgm"));
        save_image(p.thermal, dir / (p.subject + "_" + p.sample + "_t.pgm"));
    }
}

}  // namespace facefuse
