#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "facefuse/features.hpp"
#include "facefuse/fusion.hpp"
#include "facefuse/image.hpp"

namespace facefuse {

/// A co-registered visual/thermal pair of one subject sample.
struct FacePair {
    std::string subject;
    std::string sample;
    GrayImage visual;
    GrayImage thermal;
};

/// Train/test split protocol: per selected class, train_per_class training
/// images, then a probe batch of probe_in_class own-class images plus
/// probe_out_class impostors drawn round-robin from the other classes.
struct SplitProtocol {
    int classes = 10;
    int train_per_class = 10;
    int probe_in_class = 5;
    int probe_out_class = 5;
    uint64_t seed = 0;
};

struct SplitItem {
    GrayImage image;  // fused
    int label = 0;    // true class index
    std::string subject;
    std::string sample;
};

struct Split {
    ClassList classes;
    std::vector<SplitItem> train;
    std::vector<std::vector<SplitItem>> probe_batches;  // one per class
    FusionWeights weights = default_weights();
    SplitProtocol protocol;
};

struct ImageSize {
    int width = 0;
    int height = 0;
};

/// Scans a directory of `<subject>_<sample>_<v|t>.pgm` files and pairs them
/// on (subject, sample). Both channels are resized to target_size when
/// given; otherwise a dimension mismatch inside a pair is an error.
std::vector<FacePair> load_pairs(const std::filesystem::path& root,
                                 std::optional<ImageSize> target_size = std::nullopt);

/// Deterministic (seeded) class/sample selection, fusing every selected pair.
/// No image ends up in both train and a probe batch.
Split make_split(const std::vector<FacePair>& pairs, const SplitProtocol& protocol,
                 const FusionWeights& weights);

/// Synthetic paired dataset: per class, fixed visual and thermal blob
/// templates; visual samples get a random illumination gradient plus noise,
/// thermal samples only noise. Thermal pixels never depend on illum_strength.
struct SynthConfig {
    int classes = 10;
    int samples_per_class = 20;
    int width = 32;
    int height = 32;
    double illum_strength = 0.5;
    double noise_sigma = 0.05;
    uint64_t seed = 42;
};

std::vector<FacePair> synth_generate(const SynthConfig& cfg);

/// Writes the pairs as PGM files under the load_pairs naming contract.
void write_pairs(const std::vector<FacePair>& pairs, const std::filesystem::path& dir);

}  // namespace facefuse
