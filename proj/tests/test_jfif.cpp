#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "jfp/fixpoint.hpp"
#include "jfp/jfif.hpp"
#include "jfp/sampling.hpp"

using namespace jfp;

namespace {

ImagePlanes gray_image(const Plane& p) {
    ImagePlanes img;
    img.mode = ColorMode::grayscale;
    img.original_width = p.width;
    img.original_height = p.height;
    img.planes = {p};
    return img;
}

ImagePlanes block_as_image(const PixelBlock& b) {
    Plane p(8, 8);
    for (int i = 0; i < kBlockSize; ++i) p.samples[static_cast<std::size_t>(i)] = b[i];
    return gray_image(p);
}

// offset of the first marker byte pair FF xx
std::size_t find_marker(const std::vector<std::uint8_t>& bytes, std::uint8_t marker) {
    for (std::size_t i = 0; i + 1 < bytes.size(); ++i)
        if (bytes[i] == 0xFF && bytes[i + 1] == marker) return i;
    FAIL("marker not found");
    return 0;
}

ImagePlanes fixed_point_image(int w, int h, int quality, std::uint64_t seed) {
    const QuantTable q = standard_tables(quality).first;
    ImagePlanes img = gray_image(synthetic_test_plane(w, h, seed));
    img.planes[0] = iterate_plane(img.planes[0], q).plane;
    return img;
}

}  // namespace

TEST_CASE("zigzag is the standard permutation") {
    CHECK(kZigzagOrder[0] == 0);
    CHECK(kZigzagOrder[1] == 1);   // raster (0,1) sits at zigzag position 1
    CHECK(kZigzagOrder[2] == 8);   // raster (1,0) sits at zigzag position 2
    CHECK(kZigzagOrder[63] == 63);

    // bijection
    std::array<int, kBlockSize> sorted = kZigzagOrder;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < kBlockSize; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

    // self-inverse pair
    std::array<int, kBlockSize> v;
    std::mt19937_64 rng(3);
    for (auto& x : v) x = static_cast<int>(rng() % 1000);
    CHECK(from_zigzag(to_zigzag(v)) == v);
    CHECK(to_zigzag(from_zigzag(v)) == v);
}

TEST_CASE("standard table scaling") {
    const auto [l50, c50] = standard_tables(50);
    CHECK(l50.steps == kBaseLumaTable);   // scale identity
    CHECK(c50.steps == kBaseChromaTable);

    const auto [l100, c100] = standard_tables(100);
    for (int s : l100.steps) CHECK(s == 1);
    for (int s : c100.steps) CHECK(s == 1);

    CHECK(standard_tables(75).first.steps[0] == 8);  // floor((16*50+50)/100)

    CHECK_THROWS_AS(standard_tables(0), std::invalid_argument);
    CHECK_THROWS_AS(standard_tables(101), std::invalid_argument);
}

TEST_CASE("entropy block codec round-trips arbitrary index blocks") {
    std::mt19937_64 rng(17);
    const detail::HuffEncoder enc_dc(detail::huff_dc_luma());
    const detail::HuffEncoder enc_ac(detail::huff_ac_luma());
    const detail::HuffDecoder dec_dc(detail::huff_dc_luma());
    const detail::HuffDecoder dec_ac(detail::huff_ac_luma());

    for (int trial = 0; trial < 200; ++trial) {
        // sparse blocks with realistic magnitudes, including DC extremes
        std::vector<QuantizedBlock> blocks(static_cast<std::size_t>(1 + rng() % 8));
        for (auto& zz : blocks) {
            zz.fill(0);
            zz[0] = static_cast<int>(rng() % 2049) - 1024;
            const int nonzero = static_cast<int>(rng() % 20);
            for (int k = 0; k < nonzero; ++k) {
                const std::size_t pos = 1 + rng() % 63;
                zz[pos] = static_cast<int>(rng() % 2047) - 1023;
            }
        }

        std::vector<std::uint8_t> data;
        {
            detail::BitWriter bw(data);
            int pred = 0;
            for (const auto& zz : blocks) detail::encode_block(bw, zz, pred, enc_dc, enc_ac);
            bw.flush();
        }
        detail::BitReader br(data, 0);
        int pred = 0;
        for (const auto& zz : blocks)
            CHECK(detail::decode_block(br, pred, dec_dc, dec_ac) == zz);
    }
}

TEST_CASE("constant gray image encodes to all-zero indices and decodes back") {
    Plane p(8, 8, 128);
    const JfifStream s = encode_baseline(gray_image(p), standard_tables(75).first,
                                         standard_tables(75).second);
    const DecodeResult dec = decode_baseline(s);
    CHECK(dec.image.mode == ColorMode::grayscale);
    CHECK(dec.image.planes[0] == p);
    // a zero-index block costs 2 symbols; the whole scan fits in a few bytes
    const std::size_t sos = find_marker(s.bytes, 0xDA);
    const std::size_t eoi = find_marker(s.bytes, 0xD9);
    CHECK(eoi - sos < 32);
}

TEST_CASE("decode(encode(x)) equals the in-memory block transform") {
    BlockSampler sampler(23);
    const auto [q_luma, q_chroma] = standard_tables(75);
    for (int trial = 0; trial < 50; ++trial) {
        const PixelBlock b = sampler.next();
        const DecodeResult dec = decode_baseline(encode_baseline(block_as_image(b), q_luma, q_chroma));
        const PixelBlock expected = jpeg_block_transform(b, q_luma);
        for (int i = 0; i < kBlockSize; ++i)
            CHECK(dec.image.planes[0].samples[static_cast<std::size_t>(i)] == expected[i]);
    }
}

TEST_CASE("fixed-point images survive the file round trip exactly") {
    const auto [q_luma, q_chroma] = standard_tables(60);
    const ImagePlanes fp = fixed_point_image(64, 48, 60, 31);
    const DecodeResult dec = decode_baseline(encode_baseline(fp, q_luma, q_chroma));
    CHECK(dec.image.planes[0] == fp.planes[0]);
    CHECK(dec.q_luma == q_luma);  // DQT transports the creation tables
}

TEST_CASE("non-aligned gray image pads on encode and crops on decode") {
    const auto [q_luma, q_chroma] = standard_tables(80);
    const ImagePlanes img = gray_image(synthetic_test_plane(30, 22, 5));
    const DecodeResult dec = decode_baseline(encode_baseline(img, q_luma, q_chroma));
    CHECK(dec.image.width() == 30);
    CHECK(dec.image.height() == 22);

    // reference: transform of the replicated-padded plane, cropped back
    const ImagePlanes padded = pad_to_block_grid(img);
    BlockGrid grid = split_blocks(padded.planes[0]);
    for (auto& b : grid.blocks) b = jpeg_block_transform(b, q_luma);
    const Plane ref = assemble_blocks(grid);
    for (int y = 0; y < 22; ++y)
        for (int x = 0; x < 30; ++x)
            CHECK(dec.image.planes[0].at(x, y) == ref.at(x, y));
}

TEST_CASE("color 4:4:4 round trip on a fixed-point image") {
    const int quality = 70;
    const auto [q_luma, q_chroma] = standard_tables(quality);
    ImagePlanes img = synthetic_test_image(48, 32, 77, ColorMode::ycbcr444);
    img.planes[0] = iterate_plane(img.planes[0], q_luma).plane;
    img.planes[1] = iterate_plane(img.planes[1], q_chroma).plane;
    img.planes[2] = iterate_plane(img.planes[2], q_chroma).plane;

    const DecodeResult dec = decode_baseline(encode_baseline(img, q_luma, q_chroma));
    CHECK(dec.image.mode == ColorMode::ycbcr444);
    CHECK(dec.has_chroma);
    CHECK(dec.image.planes[0] == img.planes[0]);
    CHECK(dec.image.planes[1] == img.planes[1]);
    CHECK(dec.image.planes[2] == img.planes[2]);
    CHECK(dec.q_chroma == q_chroma);
}

TEST_CASE("experimental 4:2:0 round trip on a fixed-point image") {
    const int quality = 75;
    const auto [q_luma, q_chroma] = standard_tables(quality);
    ImagePlanes img = synthetic_test_image(64, 32, 13, ColorMode::ycbcr420);
    img.planes[0] = iterate_plane(img.planes[0], q_luma).plane;
    img.planes[1] = iterate_plane(img.planes[1], q_chroma).plane;
    img.planes[2] = iterate_plane(img.planes[2], q_chroma).plane;

    const DecodeResult dec = decode_baseline(encode_baseline(img, q_luma, q_chroma));
    CHECK(dec.image.mode == ColorMode::ycbcr420);
    CHECK(dec.image.planes[0] == img.planes[0]);
    CHECK(dec.image.planes[1] == img.planes[1]);
    CHECK(dec.image.planes[2] == img.planes[2]);
}

TEST_CASE("entropy segments contain no unescaped 0xFF") {
    BlockSampler sampler(41);
    for (int trial = 0; trial < 10; ++trial) {
        Plane p(32, 32);
        for (auto& s : p.samples) s = static_cast<std::uint8_t>(sampler.next()[0]);
        const JfifStream s = encode_baseline(gray_image(p), standard_tables(95).first,
                                             standard_tables(95).second);
        const std::size_t sos = find_marker(s.bytes, 0xDA);
        const std::size_t eoi = find_marker(s.bytes, 0xD9);
        const std::size_t scan_start = sos + 2 + 2 + 1 + 2 + 3;  // SOS segment for 1 comp
        for (std::size_t i = scan_start; i < eoi; ++i)
            if (s.bytes[i] == 0xFF) CHECK(s.bytes[i + 1] == 0x00);
    }
}

TEST_CASE("oversize dimensions are rejected") {
    Plane p(8, 8, 0);
    ImagePlanes img = gray_image(p);
    img.planes[0].width = 70000;  // forged header; encode must validate first
    img.planes[0].height = 8;
    img.planes[0].samples.assign(70000 * 8, 0);
    CHECK_THROWS_AS(encode_baseline(img, standard_tables(50).first, standard_tables(50).second),
                    std::invalid_argument);
}

TEST_CASE("decoder error paths") {
    const auto [q_luma, q_chroma] = standard_tables(75);
    const JfifStream good = encode_baseline(fixed_point_image(16, 16, 75, 3), q_luma, q_chroma);

    SECTION("not a JPEG stream") {
        CHECK_THROWS_AS(decode_baseline(std::vector<std::uint8_t>{'P', '5', '\n'}), parse_error);
        CHECK_THROWS_AS(decode_baseline(std::vector<std::uint8_t>{}), parse_error);
    }

    SECTION("quantization step 0 in DQT") {
        JfifStream bad = good;
        const std::size_t dqt = find_marker(bad.bytes, 0xDB);
        bad.bytes[dqt + 5] = 0;  // first table entry (marker, len16, PqTq)
        CHECK_THROWS_AS(decode_baseline(bad), parse_error);
    }

    SECTION("truncation after SOS yields a parse error, never partial output") {
        JfifStream bad = good;
        const std::size_t sos = find_marker(bad.bytes, 0xDA);
        bad.bytes.resize(sos + 10);
        CHECK_THROWS_AS(decode_baseline(bad), parse_error);
    }

    SECTION("progressive frames are rejected by marker name") {
        JfifStream bad = good;
        const std::size_t sof = find_marker(bad.bytes, 0xC0);
        bad.bytes[sof + 1] = 0xC2;
        try {
            decode_baseline(bad);
            FAIL("expected unsupported_error");
        } catch (const unsupported_error& e) {
            CHECK(std::string(e.what()).find("SOF2") != std::string::npos);
        }
    }

    SECTION("restart intervals are rejected") {
        JfifStream bad = good;
        const std::size_t sof = find_marker(bad.bytes, 0xC0);
        // splice a DRI segment before SOF0
        const std::uint8_t dri[] = {0xFF, 0xDD, 0x00, 0x04, 0x00, 0x08};
        bad.bytes.insert(bad.bytes.begin() + static_cast<std::ptrdiff_t>(sof), dri, dri + 6);
        CHECK_THROWS_AS(decode_baseline(bad), unsupported_error);
    }

    SECTION("missing EOI") {
        JfifStream bad = good;
        bad.bytes.resize(bad.bytes.size() - 2);
        CHECK_THROWS_AS(decode_baseline(bad), parse_error);
    }
}
