#pragma once

#include "facefuse/image.hpp"

namespace facefuse {

/// Convex fusion weights: a for the visual channel, b for the thermal channel.
/// a+b must equal 1 (within 1e-12) so fused pixels stay in [0,1].
struct FusionWeights {
    double a;
    double b;

    FusionWeights(double a_, double b_);

    /// b = 1 - a.
    static FusionWeights from_visual(double a_) { return FusionWeights(a_, 1.0 - a_); }
};

/// The 70/30 visual/thermal weighting.
FusionWeights default_weights();

/// Pixel-wise weighted sum: out = w.a * visual + w.b * thermal.
GrayImage fuse(const GrayImage& visual, const GrayImage& thermal, const FusionWeights& w);

}  // namespace facefuse
