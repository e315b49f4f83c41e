#pragma once

// Full-image data model: plane geometry, crop/pad to the 8x8 block grid,
// BT.601 full-range color conversion, chroma resampling, and PSNR.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "jfp/block.hpp"

namespace jfp {

// Sample raster, row-major, values in [0,255].
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> samples;

    Plane() = default;
    Plane(int w, int h, std::uint8_t fill = 0) : width(w), height(h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("plane dimensions must be positive");
        samples.assign(static_cast<std::size_t>(w) * h, fill);
    }

    std::uint8_t at(int x, int y) const {
        return samples[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return samples[static_cast<std::size_t>(y) * width + x];
    }

    bool operator==(const Plane&) const = default;
};

// 420 is experimental: the fixed-point theory is developed for independent
// planes; the subsampled path exists because decimation/replication keeps
// retained samples out of any cross-pixel computation.
enum class ColorMode { grayscale, ycbcr444, ycbcr420 };

struct ImagePlanes {
    ColorMode mode = ColorMode::grayscale;
    std::vector<Plane> planes;  // 1 plane (grayscale) or 3 (Y, Cb, Cr)
    int original_width = 0;     // size before any crop/pad
    int original_height = 0;

    int width() const { return planes.empty() ? 0 : planes[0].width; }
    int height() const { return planes.empty() ? 0 : planes[0].height; }

    void check() const {
        const std::size_t expected = (mode == ColorMode::grayscale) ? 1 : 3;
        if (planes.size() != expected)
            throw std::invalid_argument("plane count does not match color mode");
        for (std::size_t i = 1; i < planes.size(); ++i) {
            const Plane& p = planes[i];
            if (mode == ColorMode::ycbcr444) {
                if (p.width != planes[0].width || p.height != planes[0].height)
                    throw std::invalid_argument("ycbcr444 planes must share dimensions");
            } else if (mode == ColorMode::ycbcr420) {
                if (p.width != (planes[0].width + 1) / 2 ||
                    p.height != (planes[0].height + 1) / 2)
                    throw std::invalid_argument("ycbcr420 chroma must be half-sized");
            }
        }
    }

    bool operator==(const ImagePlanes&) const = default;
};

// ---------------------------------------------------------------------------
// Color conversion (full-range BT.601, the JPEG convention)
// ---------------------------------------------------------------------------

struct Ycbcr {
    int y, cb, cr;
};
struct Rgb {
    int r, g, b;
};

namespace detail {

inline std::uint8_t clamp_round(double v) {
    return static_cast<std::uint8_t>(truncate(static_cast<double>(round_half_away(v)), 0, 255));
}

inline void check_sample_range(int v, const char* name) {
    if (v < 0 || v > 255)
        throw std::invalid_argument(std::string(name) + " sample outside [0,255]");
}

}  // namespace detail

inline Ycbcr rgb_to_ycbcr(int r, int g, int b) {
    detail::check_sample_range(r, "r");
    detail::check_sample_range(g, "g");
    detail::check_sample_range(b, "b");
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    const double cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    const double cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    return {detail::clamp_round(y), detail::clamp_round(cb), detail::clamp_round(cr)};
}

inline Rgb ycbcr_to_rgb(int y, int cb, int cr) {
    detail::check_sample_range(y, "y");
    detail::check_sample_range(cb, "cb");
    detail::check_sample_range(cr, "cr");
    const double r = y + 1.402 * (cr - 128);
    const double g = y - 0.344136 * (cb - 128) - 0.714136 * (cr - 128);
    const double b = y + 1.772 * (cb - 128);
    return {detail::clamp_round(r), detail::clamp_round(g), detail::clamp_round(b)};
}

// ---------------------------------------------------------------------------
// Geometry: crop/pad to the block grid
// ---------------------------------------------------------------------------

namespace detail {

inline Plane crop_plane(const Plane& p, int w, int h) {
    if (w <= 0 || h <= 0)
        throw std::invalid_argument("crop would produce an empty plane");
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = p.at(x, y);
    return out;
}

// Pad right/bottom by replicating the last column/row.
inline Plane pad_plane(const Plane& p, int w, int h) {
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = p.at(std::min(x, p.width - 1), std::min(y, p.height - 1));
    return out;
}

}  // namespace detail

// Luma grid unit: 8 for independent planes, 16 when chroma is half-sized.
inline int block_grid_unit(ColorMode mode) {
    return mode == ColorMode::ycbcr420 ? 2 * kBlockDim : kBlockDim;
}

// Truncate right/bottom so every plane is a whole number of 8x8 blocks
// (the fixed-point path). The cropped size becomes the image's true size.
inline ImagePlanes crop_to_block_grid(const ImagePlanes& img) {
    img.check();
    const int unit = block_grid_unit(img.mode);
    const int w = (img.width() / unit) * unit;
    const int h = (img.height() / unit) * unit;
    if (w == 0 || h == 0)
        throw std::invalid_argument("image smaller than one block");
    ImagePlanes out;
    out.mode = img.mode;
    out.original_width = w;
    out.original_height = h;
    for (std::size_t i = 0; i < img.planes.size(); ++i) {
        const int pw = (i == 0) ? w : w / (unit / kBlockDim);
        const int ph = (i == 0) ? h : h / (unit / kBlockDim);
        out.planes.push_back(detail::crop_plane(img.planes[i], pw, ph));
    }
    return out;
}

// Replicate the last row/column so every plane is a whole number of blocks
// (the codec path). original_size keeps the pre-pad dimensions so a decoder
// can crop back.
inline ImagePlanes pad_to_block_grid(const ImagePlanes& img) {
    img.check();
    const int unit = block_grid_unit(img.mode);
    const int w = (img.width() + unit - 1) / unit * unit;
    const int h = (img.height() + unit - 1) / unit * unit;
    ImagePlanes out;
    out.mode = img.mode;
    out.original_width = img.original_width ? img.original_width : img.width();
    out.original_height = img.original_height ? img.original_height : img.height();
    for (std::size_t i = 0; i < img.planes.size(); ++i) {
        const int pw = (i == 0) ? w : w / (unit / kBlockDim);
        const int ph = (i == 0) ? h : h / (unit / kBlockDim);
        out.planes.push_back(detail::pad_plane(img.planes[i], pw, ph));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chroma resampling (decimation / replication)
// ---------------------------------------------------------------------------

// Keep even-indexed rows and columns. Together with replication upsampling,
// retained samples round-trip unchanged.
inline Plane downsample_chroma(const Plane& p) {
    Plane out((p.width + 1) / 2, (p.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = p.at(2 * x, 2 * y);
    return out;
}

// Pixel replication to the given full-resolution size.
inline Plane upsample_chroma(const Plane& p, int target_w, int target_h) {
    if ((target_w + 1) / 2 != p.width || (target_h + 1) / 2 != p.height)
        throw std::invalid_argument("upsample target does not match half-sized plane");
    Plane out(target_w, target_h);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x) out.at(x, y) = p.at(x / 2, y / 2);
    return out;
}

inline ImagePlanes to_ycbcr420(const ImagePlanes& img) {
    img.check();
    if (img.mode != ColorMode::ycbcr444)
        throw std::invalid_argument("420 conversion requires a ycbcr444 image");
    ImagePlanes out;
    out.mode = ColorMode::ycbcr420;
    out.original_width = img.original_width;
    out.original_height = img.original_height;
    out.planes = {img.planes[0], downsample_chroma(img.planes[1]),
                  downsample_chroma(img.planes[2])};
    return out;
}

inline ImagePlanes to_ycbcr444(const ImagePlanes& img) {
    img.check();
    if (img.mode == ColorMode::ycbcr444) return img;
    if (img.mode != ColorMode::ycbcr420)
        throw std::invalid_argument("444 conversion requires a chroma-subsampled image");
    ImagePlanes out;
    out.mode = ColorMode::ycbcr444;
    out.original_width = img.original_width;
    out.original_height = img.original_height;
    out.planes = {img.planes[0],
                  upsample_chroma(img.planes[1], img.width(), img.height()),
                  upsample_chroma(img.planes[2], img.width(), img.height())};
    return out;
}

// ---------------------------------------------------------------------------
// Block grid
// ---------------------------------------------------------------------------

struct BlockGrid {
    int blocks_x = 0;
    int blocks_y = 0;
    std::vector<PixelBlock> blocks;  // raster block order

    const PixelBlock& at(int bx, int by) const {
        return blocks[static_cast<std::size_t>(by) * blocks_x + bx];
    }
    PixelBlock& at(int bx, int by) {
        return blocks[static_cast<std::size_t>(by) * blocks_x + bx];
    }
};

inline BlockGrid split_blocks(const Plane& p) {
    if (p.width % kBlockDim != 0 || p.height % kBlockDim != 0)
        throw std::invalid_argument("plane dimensions are not multiples of 8");
    BlockGrid g;
    g.blocks_x = p.width / kBlockDim;
    g.blocks_y = p.height / kBlockDim;
    g.blocks.resize(static_cast<std::size_t>(g.blocks_x) * g.blocks_y);
    for (int by = 0; by < g.blocks_y; ++by)
        for (int bx = 0; bx < g.blocks_x; ++bx) {
            PixelBlock& b = g.at(bx, by);
            for (int y = 0; y < kBlockDim; ++y)
                for (int x = 0; x < kBlockDim; ++x)
                    b[y * kBlockDim + x] = p.at(bx * kBlockDim + x, by * kBlockDim + y);
        }
    return g;
}

inline Plane assemble_blocks(const BlockGrid& g) {
    if (g.blocks_x <= 0 || g.blocks_y <= 0 ||
        g.blocks.size() != static_cast<std::size_t>(g.blocks_x) * g.blocks_y)
        throw std::invalid_argument("inconsistent block grid");
    Plane p(g.blocks_x * kBlockDim, g.blocks_y * kBlockDim);
    for (int by = 0; by < g.blocks_y; ++by)
        for (int bx = 0; bx < g.blocks_x; ++bx) {
            const PixelBlock& b = g.at(bx, by);
            for (int y = 0; y < kBlockDim; ++y)
                for (int x = 0; x < kBlockDim; ++x)
                    p.at(bx * kBlockDim + x, by * kBlockDim + y) = b[y * kBlockDim + x];
        }
    return p;
}

// ---------------------------------------------------------------------------
// PSNR
// ---------------------------------------------------------------------------

// 10*log10(255^2 / MSE), +infinity for identical planes.
inline double psnr(const Plane& a, const Plane& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: dimension mismatch");
    double se = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.samples.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Combined-MSE PSNR over all planes (equal weight per sample).
inline double psnr(const ImagePlanes& a, const ImagePlanes& b) {
    if (a.planes.size() != b.planes.size())
        throw std::invalid_argument("psnr: plane count mismatch");
    double se = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < a.planes.size(); ++p) {
        const Plane& pa = a.planes[p];
        const Plane& pb = b.planes[p];
        if (pa.width != pb.width || pa.height != pb.height)
            throw std::invalid_argument("psnr: dimension mismatch");
        for (std::size_t i = 0; i < pa.samples.size(); ++i) {
            const double d =
                static_cast<double>(pa.samples[i]) - static_cast<double>(pb.samples[i]);
            se += d * d;
        }
        n += pa.samples.size();
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / (se / static_cast<double>(n)));
}

}  // namespace jfp
