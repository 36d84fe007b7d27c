#include "facefuse/fusion.hpp"

#include <cmath>
#include <string>

#include "facefuse/errors.hpp"

namespace facefuse {

FusionWeights::FusionWeights(double a_, double b_) : a(a_), b(b_) {
    if (a < 0.0 || b < 0.0) throw DataError("fusion weights must be non-negative");
    if (std::abs(a + b - 1.0) > 1e-12) throw DataError("fusion weights must sum to 1");
}

FusionWeights default_weights() { return FusionWeights(0.70, 0.30); }

GrayImage fuse(const GrayImage& visual, const GrayImage& thermal, const FusionWeights& w) {
    if (!visual.same_dims(thermal))
        throw DataError("fuse: dimension mismatch, visual " + std::to_string(visual.width) + "x" +
                        std::to_string(visual.height) + " vs thermal " +
                        std::to_string(thermal.width) + "x" + std::to_string(thermal.height));
    GrayImage out(visual.width, visual.height);
    for (size_t i = 0; i < out.size(); ++i)
        out.pixels[i] = w.a * visual.pixels[i] + w.b * thermal.pixels[i];
    return out;
}

}  // namespace facefuse
