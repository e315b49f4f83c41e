#pragma once

// Deterministic sample sources for experiments and fixtures.

#include <cmath>
#include <cstdint>
#include <random>

#include "jfp/block.hpp"
#include "jfp/planes.hpp"

namespace jfp {

// Uniform i.i.d. pixel blocks. Each pixel is the low byte of one
// std::mt19937_64 output; the engine is exactly specified by the C++
// standard and 2^64 is a multiple of 256, so the stream is portable and
// unbiased.
class BlockSampler {
public:
    explicit BlockSampler(std::uint64_t seed) : rng_(seed) {}

    PixelBlock next() {
        PixelBlock b;
        for (auto& s : b) s = static_cast<std::uint8_t>(rng_() & 0xFF);
        return b;
    }

private:
    std::mt19937_64 rng_;
};

// Uniform integer in [0, n-1] via modulo of a 64-bit draw; the modulo bias
// is ~n/2^64, irrelevant here, and the result is fully deterministic.
inline std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n) {
    return rng() % n;
}

// Reproducible stand-in for a natural test image: low-frequency structure
// (gradients + slow sinusoids), mid- and fine-scale texture, a band of
// heavy grain, and saturated highlights/shadows. The hard content matters:
// a bland image is its own fixed point after a single transform at most
// qualities, which would make the fixed-point-vs-single-JPEG comparisons
// degenerate. Grain and clamped regions keep blocks moving for a few
// iterations at every quality, like the busy areas of a real photograph.
inline Plane synthetic_test_plane(int width, int height, std::uint64_t seed) {
    Plane p(width, height);
    std::mt19937_64 rng(seed);
    const double pi = std::acos(-1.0);
    const double cx = width / 2.0, cy = height / 2.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = (x - cx) / width, dy = (y - cy) / height;
            double v = 128.0;
            v += 45.0 * std::sin(2.0 * pi * x / 97.0) * std::cos(2.0 * pi * y / 61.0);
            v += 35.0 * std::cos(2.0 * pi * (x + 2.0 * y) / 151.0);
            v += 90.0 * std::exp(-12.0 * (dx * dx + dy * dy));  // saturating highlight
            v -= 90.0 * std::exp(-20.0 * ((dx + 0.3) * (dx + 0.3) + (dy + 0.3) * (dy + 0.3)));
            v -= 30.0 * dy;
            v += 22.0 * std::sin(2.0 * pi * x / 13.0) * std::sin(2.0 * pi * y / 17.0);
            v += 14.0 * std::cos(2.0 * pi * (2.0 * x - y) / 7.0);
            // heavy grain in a horizontal band, light grain elsewhere
            const bool grainy = y >= height / 2 && y < (3 * height) / 4;
            const int grain = grainy ? 181 : 25;
            v += static_cast<double>(rng_below(rng, static_cast<std::uint64_t>(grain))) -
                 (grain - 1) / 2.0;
            p.at(x, y) = static_cast<std::uint8_t>(
                truncate(static_cast<double>(round_half_away(v)), 0, 255));
        }
    }
    return p;
}

inline ImagePlanes synthetic_test_image(int width, int height, std::uint64_t seed,
                                        ColorMode mode = ColorMode::grayscale) {
    ImagePlanes img;
    img.original_width = width;
    img.original_height = height;
    if (mode == ColorMode::grayscale) {
        img.mode = ColorMode::grayscale;
        img.planes = {synthetic_test_plane(width, height, seed)};
        return img;
    }
    img.mode = ColorMode::ycbcr444;
    img.planes = {synthetic_test_plane(width, height, seed),
                  synthetic_test_plane(width, height, seed + 1),
                  synthetic_test_plane(width, height, seed + 2)};
    // keep chroma close to neutral so the planes look like a plausible image
    for (int pi = 1; pi <= 2; ++pi)
        for (auto& s : img.planes[pi].samples)
            s = static_cast<std::uint8_t>(128 + (static_cast<int>(s) - 128) / 3);
    if (mode == ColorMode::ycbcr420) return to_ycbcr420(img);
    return img;
}

}  // namespace jfp
