#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "jfp/pnm.hpp"
#include "jfp/sampling.hpp"

using namespace jfp;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("PGM store/load round trip is lossless") {
    const ImagePlanes img = synthetic_test_image(37, 21, 3);
    const ImagePlanes back = load_pnm_bytes(store_pnm_bytes(img));
    CHECK(back.mode == ColorMode::grayscale);
    CHECK(back.planes[0] == img.planes[0]);
}

TEST_CASE("PGM file round trip through disk") {
    const auto dir = std::filesystem::temp_directory_path() / "jfp_pnm_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "roundtrip.pgm").string();
    const ImagePlanes img = synthetic_test_image(64, 48, 7);
    store_pnm(img, path);
    const ImagePlanes back = load_pnm(path);
    CHECK(back.planes[0] == img.planes[0]);
    std::filesystem::remove_all(dir);
}

TEST_CASE("1x1 P5 with sample 0") {
    std::vector<std::uint8_t> data = bytes_of("P5\n1 1\n255\n");
    data.push_back(0);
    const ImagePlanes img = load_pnm_bytes(data);
    CHECK(img.mode == ColorMode::grayscale);
    CHECK(img.planes.size() == 1);
    CHECK(img.width() == 1);
    CHECK(img.height() == 1);
    CHECK(img.planes[0].at(0, 0) == 0);
}

TEST_CASE("P6 white pixel maps to max luma, neutral chroma") {
    std::vector<std::uint8_t> data = bytes_of("P6\n1 1\n255\n");
    data.insert(data.end(), {255, 255, 255});
    const ImagePlanes img = load_pnm_bytes(data);
    CHECK(img.mode == ColorMode::ycbcr444);
    REQUIRE(img.planes.size() == 3);
    CHECK(img.planes[0].at(0, 0) == 255);
    CHECK(img.planes[1].at(0, 0) == 128);
    CHECK(img.planes[2].at(0, 0) == 128);
}

TEST_CASE("header comments and whitespace are accepted") {
    std::vector<std::uint8_t> data =
        bytes_of("P5 # comment right after magic\n# full line\n 2\t2 # dims\n255\n");
    data.insert(data.end(), {1, 2, 3, 4});
    const ImagePlanes img = load_pnm_bytes(data);
    CHECK(img.width() == 2);
    CHECK(img.planes[0].at(1, 1) == 4);
}

TEST_CASE("malformed PNM inputs carry byte offsets") {
    CHECK_THROWS_AS(load_pnm_bytes(bytes_of("GIF89a")), parse_error);
    CHECK_THROWS_AS(load_pnm_bytes(bytes_of("P4\n1 1\n")), parse_error);

    // wrong maxval
    std::vector<std::uint8_t> maxval = bytes_of("P5\n1 1\n65535\n");
    maxval.insert(maxval.end(), {0, 0});
    try {
        load_pnm_bytes(maxval);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("maxval") != std::string::npos);
        CHECK(e.offset() > 0);
    }

    // truncated raster
    std::vector<std::uint8_t> trunc = bytes_of("P5\n4 4\n255\n");
    trunc.insert(trunc.end(), {1, 2, 3});
    try {
        load_pnm_bytes(trunc);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset() == 11);  // raster starts right after the header
    }

    // missing dimension
    CHECK_THROWS_AS(load_pnm_bytes(bytes_of("P5\n8\n")), parse_error);
}
