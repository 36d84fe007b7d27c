#include <cmath>
#include <fstream>

#include "doctest.h"
#include "facefuse/errors.hpp"
#include "facefuse/image.hpp"
#include "test_helpers.hpp"

using namespace facefuse;
using facefuse::test::TempDir;

namespace {
void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}
}  // namespace

TEST_CASE("load_image scales samples by 1/maxval") {
    TempDir dir("pgm_load");
    const auto p = dir.path / "a.pgm";

    SUBCASE("8-bit 2x2") {
        write_bytes(p, std::string("P5\n2 2\n255\n") +
                           std::string({'\x00', '\xff', '\x80', '\x40'}));
        const GrayImage img = load_image(p);
        CHECK(img.width == 2);
        CHECK(img.height == 2);
        CHECK(img.pixels[0] == 0.0);
        CHECK(img.pixels[1] == 1.0);
        CHECK(img.pixels[2] == doctest::Approx(128.0 / 255).epsilon(1e-15));
        CHECK(img.pixels[3] == doctest::Approx(64.0 / 255).epsilon(1e-15));
    }
    SUBCASE("1x1 full scale") {
        write_bytes(p, std::string("P5\n1 1\n255\n") + '\xff');
        CHECK(load_image(p).pixels[0] == 1.0);
    }
    SUBCASE("16-bit samples, maxval 1000") {
        std::string data = "P5\n3 2\n1000\n";
        for (int i = 0; i < 6; ++i) {
            data += static_cast<char>(500 >> 8);
            data += static_cast<char>(500 & 0xff);
        }
        write_bytes(p, data);
        const GrayImage img = load_image(p);
        for (double v : img.pixels) CHECK(v == 0.5);
    }
    SUBCASE("header comments are tolerated") {
        write_bytes(p, std::string("P5\n# a comment\n1 1\n# another\n255\n") + '\x7f');
        CHECK(load_image(p).width == 1);
    }
}

TEST_CASE("load_image failure modes are distinct") {
    TempDir dir("pgm_err");
    const auto p = dir.path / "a.pgm";

    CHECK_THROWS_WITH_AS(load_image(dir.path / "missing.pgm"),
                         doctest::Contains("cannot open"), DataError);
    write_bytes(p, "P2\n1 1\n255\n0");
    CHECK_THROWS_WITH_AS(load_image(p), doctest::Contains("magic"), DataError);
    write_bytes(p, "P5\n2 2\nabc\n");
    CHECK_THROWS_WITH_AS(load_image(p), doctest::Contains("header"), DataError);
    write_bytes(p, std::string("P5\n2 2\n255\n") + '\x00');
    CHECK_THROWS_WITH_AS(load_image(p), doctest::Contains("truncated"), DataError);
}

TEST_CASE("save_image rounds half up") {
    TempDir dir("pgm_save");
    const auto p = dir.path / "a.pgm";
    GrayImage img(3, 1);
    img.pixels = {0.0, 1.0, 0.5};
    save_image(img, p);
    std::ifstream in(p, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string raster = content.substr(content.size() - 3);
    CHECK(static_cast<unsigned char>(raster[0]) == 0);
    CHECK(static_cast<unsigned char>(raster[1]) == 255);
    CHECK(static_cast<unsigned char>(raster[2]) == 128);  // round(0.5*255)=128
}

TEST_CASE("save/load round trip within 1/510") {
    TempDir dir("pgm_rt");
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        const GrayImage img = facefuse::test::random_image(9, 5, rng);
        const auto p = dir.path / "rt.pgm";
        save_image(img, p);
        const GrayImage back = load_image(p);
        REQUIRE(back.same_dims(img));
        for (size_t i = 0; i < img.size(); ++i)
            CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 1.0 / 510 + 1e-12);
    }
}

TEST_CASE("resize_bilinear") {
    SUBCASE("identity on same dimensions") {
        std::mt19937_64 rng(3);
        const GrayImage img = facefuse::test::random_image(7, 4, rng);
        const GrayImage out = resize_bilinear(img, 7, 4);
        CHECK(out.pixels == img.pixels);
    }
    SUBCASE("constant image stays constant") {
        const GrayImage img(5, 5, 0.37);
        const GrayImage out = resize_bilinear(img, 11, 3);
        for (double v : out.pixels) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
    }
    SUBCASE("align-corners 2x1 -> 3x1") {
        GrayImage img(2, 1);
        img.pixels = {0.0, 1.0};
        const GrayImage out = resize_bilinear(img, 3, 1);
        CHECK(out.pixels[0] == 0.0);
        CHECK(out.pixels[1] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(out.pixels[2] == 1.0);
    }
    SUBCASE("output stays within source range") {
        std::mt19937_64 rng(11);
        for (int t = 0; t < 10; ++t) {
            const GrayImage img = facefuse::test::random_image(6, 6, rng);
            const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
            const GrayImage out = resize_bilinear(img, 13, 9);
            for (double v : out.pixels) {
                CHECK(v >= *lo - 1e-12);
                CHECK(v <= *hi + 1e-12);
            }
        }
    }
    SUBCASE("zero dimension rejected") {
        CHECK_THROWS_AS(resize_bilinear(GrayImage(2, 2), 0, 2), DataError);
    }
}
