#pragma once

#include <filesystem>
#include <vector>

namespace facefuse {

/// Normalized grayscale raster. Pixels are row-major, each in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return pixels.size(); }

    bool same_dims(const GrayImage& other) const {
        return width == other.width && height == other.height;
    }
};

/// Reads a binary PGM (P5) file, maxval up to 65535. Samples are scaled to
/// [0,1] by 1/maxval. '#' comments in the header are tolerated.
GrayImage load_image(const std::filesystem::path& path);

/// Writes a binary PGM (P5) with maxval 255, sample = round-half-up(p*255).
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// Bilinear resize with align-corners mapping: source coordinate is
/// target_index * (src-1)/(dst-1); a degenerate dst=1 maps to the source
/// center. Output values stay within the source range.
GrayImage resize_bilinear(const GrayImage& img, int new_width, int new_height);

}  // namespace facefuse
