#include "facefuse/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "facefuse/errors.hpp"

namespace facefuse {

GrayImage::GrayImage(int w, int h, double fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw DataError("GrayImage: dimensions must be >= 1");
    pixels.assign(static_cast<size_t>(w) * h, fill);
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF) throw DataError("malformed PGM header (unexpected EOF): " + path);
    std::string tok;
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c != EOF) in.unget();  // the terminator may be the raster separator
    return tok;
}

int parse_header_int(std::istream& in, const std::string& path, const char* what) {
    const std::string tok = next_token(in, path);
    try {
        size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError(std::string("malformed PGM header (bad ") + what + " '" + tok +
                        "'): " + path);
    }
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image file: " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw DataError("unsupported magic number (want P5): " + path.string());

    const std::string p = path.string();
    const int width = parse_header_int(in, p, "width");
    const int height = parse_header_int(in, p, "height");
    const int maxval = parse_header_int(in, p, "maxval");
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw DataError("malformed PGM header (bad dimensions or maxval): " + p);

    // Exactly one whitespace byte separates the header from the raster.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw DataError("malformed PGM header (missing separator): " + p);

    GrayImage img(width, height);
    const size_t n = img.size();
    const bool wide = maxval > 255;
    std::vector<uint8_t> raw(n * (wide ? 2 : 1));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw DataError("truncated pixel data: " + p);

    const double scale = 1.0 / maxval;
    for (size_t i = 0; i < n; ++i) {
        const unsigned sample = wide ? (static_cast<unsigned>(raw[2 * i]) << 8 | raw[2 * i + 1])
                                     : raw[i];
        if (sample > static_cast<unsigned>(maxval))
            throw DataError("sample exceeds maxval: " + p);
        img.pixels[i] = sample * scale;
    }
    return img;
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> raw(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
        // round half up
        const double s = std::floor(img.pixels[i] * 255.0 + 0.5);
        raw[i] = static_cast<uint8_t>(std::clamp(s, 0.0, 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

GrayImage resize_bilinear(const GrayImage& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1)
        throw DataError("resize_bilinear: target dimensions must be >= 1");
    if (new_width == img.width && new_height == img.height) return img;

    GrayImage out(new_width, new_height);
    const auto src_coord = [](int i, int dst, int src) {
        if (dst == 1) return (src - 1) * 0.5;
        return static_cast<double>(i) * (src - 1) / (dst - 1);
    };
    for (int y = 0; y < new_height; ++y) {
        const double sy = src_coord(y, new_height, img.height);
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double sx = src_coord(x, new_width, img.width);
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;
            const double top = img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx;
            const double bot = img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx;
            out.at(x, y) = top * (1 - fy) + bot * fy;
        }
    }
    return out;
}

}  // namespace facefuse
