#pragma once

// Tamper-evident images from JPEG fixed points. Creation drives every block
// to its fixed point and serializes the result; verification re-applies the
// transform once and flags blocks that move. An untouched fixed-point block
// cannot move, so false positives are structurally impossible; any edit that
// knocks a block off its fixed point is caught by one extra round.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jfp/fixpoint.hpp"
#include "jfp/jfif.hpp"
#include "jfp/planes.hpp"

namespace jfp {

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

struct BlockMask {
    int blocks_x = 0;
    int blocks_y = 0;
    std::vector<std::uint8_t> flags;  // row-major; nonzero = flagged

    BlockMask() = default;
    BlockMask(int bx, int by)
        : blocks_x(bx), blocks_y(by),
          flags(static_cast<std::size_t>(bx) * static_cast<std::size_t>(by), 0) {}

    std::uint8_t at(int bx, int by) const {
        return flags[static_cast<std::size_t>(by) * blocks_x + bx];
    }
    void set(int bx, int by, bool v = true) {
        flags[static_cast<std::size_t>(by) * blocks_x + bx] = v ? 1 : 0;
    }
    int count() const {
        int n = 0;
        for (auto f : flags) n += (f != 0);
        return n;
    }
    bool operator==(const BlockMask&) const = default;
};

enum class Verdict { intact, tampered };

struct TamperReport {
    Verdict verdict = Verdict::intact;
    int changed_block_count = 0;
    int total_blocks = 0;
    BlockMask mask;                      // luma block grid
    std::vector<double> block_distance;  // per grid cell, all planes combined

    bool intact() const { return verdict == Verdict::intact; }
};

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

// Re-apply T_q per plane and flag every block that changes. Pure read-only
// check; requires the exact tables used at creation time. A block is flagged
// if any plane's co-located block moved (chroma blocks in 420 cover a 2x2
// luma neighborhood).
inline TamperReport verify(const ImagePlanes& img, const QuantTable& q_luma,
                           const QuantTable& q_chroma) {
    img.check();
    q_luma.check();
    if (img.mode != ColorMode::grayscale) q_chroma.check();

    TamperReport rep;
    const int bw = img.planes[0].width / kBlockDim;
    const int bh = img.planes[0].height / kBlockDim;
    rep.mask = BlockMask(bw, bh);
    rep.total_blocks = bw * bh;
    std::vector<double> dist_sq(static_cast<std::size_t>(bw) * bh, 0.0);

    for (std::size_t pi = 0; pi < img.planes.size(); ++pi) {
        const QuantTable& q = (pi == 0) ? q_luma : q_chroma;
        const BlockGrid grid = split_blocks(img.planes[pi]);  // rejects misaligned planes
        const int scale = img.planes[pi].width < img.planes[0].width ? 2 : 1;
        std::vector<double> dist(grid.blocks.size(), 0.0);
        parallel_for(static_cast<int>(grid.blocks.size()), [&](int i) {
            const PixelBlock after = jpeg_block_transform(grid.blocks[i], q);
            if (after != grid.blocks[i]) dist[i] = block_distance(grid.blocks[i], after);
        });
        for (int by = 0; by < grid.blocks_y; ++by)
            for (int bx = 0; bx < grid.blocks_x; ++bx) {
                const double d = dist[static_cast<std::size_t>(by) * grid.blocks_x + bx];
                if (d == 0.0) continue;
                // a changed chroma block in 420 covers a 2x2 luma-block area
                for (int dy = 0; dy < scale; ++dy)
                    for (int dx = 0; dx < scale; ++dx) {
                        const int lx = bx * scale + dx;
                        const int ly = by * scale + dy;
                        if (lx >= bw || ly >= bh) continue;
                        rep.mask.set(lx, ly);
                        dist_sq[static_cast<std::size_t>(ly) * bw + lx] += d * d;
                    }
            }
    }
    rep.block_distance.resize(dist_sq.size());
    for (std::size_t i = 0; i < dist_sq.size(); ++i)
        rep.block_distance[i] = std::sqrt(dist_sq[i]);
    rep.changed_block_count = rep.mask.count();
    rep.verdict = rep.changed_block_count == 0 ? Verdict::intact : Verdict::tampered;
    return rep;
}

inline TamperReport verify(const ImagePlanes& img, int quality) {
    const auto [q_luma, q_chroma] = standard_tables(quality);
    return verify(img, q_luma, q_chroma);
}

// Verify a decoded file with the tables it carries (the DQT segments are the
// table transport; no caller-supplied tables to trust).
inline TamperReport verify(const DecodeResult& decoded) {
    return verify(decoded.image, decoded.q_luma, decoded.q_chroma);
}

inline TamperReport verify_file(const std::string& path) {
    return verify(load_jfif(path));
}

// ---------------------------------------------------------------------------
// Creation
// ---------------------------------------------------------------------------

struct TamperEvident {
    ImagePlanes image;   // every block a fixed point of its plane's table
    JfifStream stream;   // serialized form; decodes back to `image` exactly
    std::vector<PlaneFixpointResult> plane_results;
};

// Iterate every block of every plane to its fixed point (cropping to the
// block grid first), then serialize. Verifying the result with the same
// tables reports intact by definition.
inline TamperEvident make_tamper_evident(const ImagePlanes& img, int quality,
                                         int max_iter = 64) {
    const auto [q_luma, q_chroma] = standard_tables(quality);
    const ImagePlanes cropped = crop_to_block_grid(img);
    TamperEvident out;
    out.image.mode = cropped.mode;
    out.image.original_width = cropped.original_width;
    out.image.original_height = cropped.original_height;
    for (std::size_t pi = 0; pi < cropped.planes.size(); ++pi) {
        const QuantTable& q = (pi == 0) ? q_luma : q_chroma;
        PlaneFixpointResult res = iterate_plane(cropped.planes[pi], q, max_iter);
        out.image.planes.push_back(res.plane);
        out.plane_results.push_back(std::move(res));
    }
    out.stream = encode_baseline(out.image, q_luma, q_chroma);
    return out;
}

// ---------------------------------------------------------------------------
// Manipulations (the four attack generators)
// ---------------------------------------------------------------------------

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
};

enum class ManipulationKind { salt_pepper, copy_move, splice, requantize };

struct Manipulation {
    ManipulationKind kind = ManipulationKind::salt_pepper;
    double density = 0.01;               // salt_pepper: fraction of pixels hit
    Rect src;                            // copy_move source / splice source in donor
    Rect dst;                            // copy_move / splice destination
    std::optional<ImagePlanes> donor;    // splice
    int requantize_quality = 0;          // requantize
};

namespace detail {

inline void check_rect(const Rect& r, int w, int h, const char* what) {
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > w || r.y + r.h > h)
        throw std::invalid_argument(std::string(what) + " rectangle out of bounds");
}

// rectangle copy through a temp buffer; coordinates in plane units
inline void copy_rect(const Plane& src, Rect from, Plane& dst, int to_x, int to_y) {
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(from.w) * from.h);
    for (int y = 0; y < from.h; ++y)
        for (int x = 0; x < from.w; ++x)
            buf[static_cast<std::size_t>(y) * from.w + x] = src.at(from.x + x, from.y + y);
    for (int y = 0; y < from.h; ++y)
        for (int x = 0; x < from.w; ++x)
            dst.at(to_x + x, to_y + y) = buf[static_cast<std::size_t>(y) * from.w + x];
}

inline Rect scale_rect(const Rect& r, int scale) {
    return {r.x / scale, r.y / scale, r.w / scale, r.h / scale};
}

}  // namespace detail

// Deterministic for a fixed seed. Noise and geometry are expressed in the
// working plane domain; rectangle coordinates are luma-pixel units.
inline ImagePlanes apply_manipulation(const ImagePlanes& img, const Manipulation& m,
                                      std::uint64_t seed) {
    img.check();
    ImagePlanes out = img;
    const int w = img.width();
    const int h = img.height();

    switch (m.kind) {
        case ManipulationKind::salt_pepper: {
            if (m.density < 0.0 || m.density > 1.0)
                throw std::invalid_argument("salt-pepper density outside [0,1]");
            if (m.density == 0.0) return out;
            std::mt19937_64 rng(seed);
            const auto threshold = static_cast<std::uint64_t>(
                m.density * 18446744073709551615.0);  // density * (2^64 - 1)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const std::uint64_t r = rng();
                    if (r > threshold) continue;
                    const bool salt = (r & 1) != 0;
                    out.planes[0].at(x, y) = salt ? 255 : 0;
                    for (std::size_t pi = 1; pi < out.planes.size(); ++pi) {
                        const int scale = out.planes[pi].width < w ? 2 : 1;
                        out.planes[pi].at(x / scale, y / scale) = 128;  // neutral chroma
                    }
                }
            return out;
        }
        case ManipulationKind::copy_move: {
            if (m.src.w != m.dst.w || m.src.h != m.dst.h)
                throw std::invalid_argument("copy-move rectangles differ in size");
            detail::check_rect(m.src, w, h, "copy-move source");
            detail::check_rect(m.dst, w, h, "copy-move destination");
            for (std::size_t pi = 0; pi < out.planes.size(); ++pi) {
                const int scale = out.planes[pi].width < w ? 2 : 1;
                const Rect s = detail::scale_rect(m.src, scale);
                const Rect d = detail::scale_rect(m.dst, scale);
                detail::copy_rect(img.planes[pi], s, out.planes[pi], d.x, d.y);
            }
            return out;
        }
        case ManipulationKind::splice: {
            if (!m.donor) throw std::invalid_argument("splice requires a donor image");
            m.donor->check();
            if (m.donor->mode != img.mode)
                throw std::invalid_argument("splice donor has a different color mode");
            if (m.src.w != m.dst.w || m.src.h != m.dst.h)
                throw std::invalid_argument("splice rectangles differ in size");
            detail::check_rect(m.src, m.donor->width(), m.donor->height(), "splice source");
            detail::check_rect(m.dst, w, h, "splice destination");
            for (std::size_t pi = 0; pi < out.planes.size(); ++pi) {
                const int scale = out.planes[pi].width < w ? 2 : 1;
                const Rect s = detail::scale_rect(m.src, scale);
                const Rect d = detail::scale_rect(m.dst, scale);
                detail::copy_rect(m.donor->planes[pi], s, out.planes[pi], d.x, d.y);
            }
            return out;
        }
        case ManipulationKind::requantize: {
            // one JPEG round with the alternate tables
            const auto [q_luma, q_chroma] = standard_tables(m.requantize_quality);
            for (std::size_t pi = 0; pi < out.planes.size(); ++pi) {
                const QuantTable& q = (pi == 0) ? q_luma : q_chroma;
                BlockGrid grid = split_blocks(out.planes[pi]);
                parallel_for(static_cast<int>(grid.blocks.size()), [&](int i) {
                    grid.blocks[i] = jpeg_block_transform(grid.blocks[i], q);
                });
                out.planes[pi] = assemble_blocks(grid);
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown manipulation kind");
}

// ---------------------------------------------------------------------------
// Ground truth + metrics
// ---------------------------------------------------------------------------

// Blocks where the two images actually differ (union over planes, mapped to
// the luma grid). This is the honest ground truth for a manipulation: a
// targeted pixel that kept its value tampers nothing.
inline BlockMask diff_mask(const ImagePlanes& a, const ImagePlanes& b) {
    a.check();
    b.check();
    if (a.planes.size() != b.planes.size())
        throw std::invalid_argument("diff_mask: plane count mismatch");
    const int bw = a.planes[0].width / kBlockDim;
    const int bh = a.planes[0].height / kBlockDim;
    BlockMask mask(bw, bh);
    for (std::size_t pi = 0; pi < a.planes.size(); ++pi) {
        const Plane& pa = a.planes[pi];
        const Plane& pb = b.planes[pi];
        if (pa.width != pb.width || pa.height != pb.height)
            throw std::invalid_argument("diff_mask: dimension mismatch");
        // a chroma sample at scale 2 covers a 2x2 luma-pixel area, which is
        // always inside a single luma block
        const int scale = pa.width < a.planes[0].width ? 2 : 1;
        for (int y = 0; y < pa.height; ++y)
            for (int x = 0; x < pa.width; ++x)
                if (pa.at(x, y) != pb.at(x, y))
                    mask.set(std::min((x * scale) / kBlockDim, bw - 1),
                             std::min((y * scale) / kBlockDim, bh - 1));
    }
    return mask;
}

struct LocalizationMetrics {
    double recall = 1.0;               // flagged & truth / truth (1.0 when no positives)
    double false_positive_rate = 0.0;  // flagged & !truth / !truth
};

inline LocalizationMetrics localization_metrics(const BlockMask& flagged,
                                                const BlockMask& truth) {
    if (flagged.blocks_x != truth.blocks_x || flagged.blocks_y != truth.blocks_y)
        throw std::invalid_argument("mask dimension mismatch");
    long long tp = 0, fp = 0, truth_n = 0, clean_n = 0;
    for (std::size_t i = 0; i < truth.flags.size(); ++i) {
        const bool t = truth.flags[i] != 0;
        const bool f = flagged.flags[i] != 0;
        truth_n += t;
        clean_n += !t;
        tp += (t && f);
        fp += (!t && f);
    }
    LocalizationMetrics m;
    m.recall = truth_n == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(truth_n);
    m.false_positive_rate =
        clean_n == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(clean_n);
    return m;
}

// ---------------------------------------------------------------------------
// Report export
// ---------------------------------------------------------------------------

inline std::string report_to_json(const TamperReport& rep) {
    std::string out = "{\n";
    out += std::string("  \"verdict\": \"") + (rep.intact() ? "intact" : "tampered") + "\",\n";
    out += "  \"changed_block_count\": " + std::to_string(rep.changed_block_count) + ",\n";
    out += "  \"total_blocks\": " + std::to_string(rep.total_blocks) + ",\n";
    out += "  \"mask\": [";
    for (std::size_t i = 0; i < rep.mask.flags.size(); ++i) {
        if (i) out += ",";
        out += rep.mask.flags[i] ? "1" : "0";
    }
    out += "],\n";
    out += "  \"block_size\": 8\n";
    out += "}\n";
    return out;
}

// Block mask as an image-resolution overlay (255 = flagged block).
inline Plane mask_to_plane(const BlockMask& mask) {
    Plane p(mask.blocks_x * kBlockDim, mask.blocks_y * kBlockDim);
    for (int by = 0; by < mask.blocks_y; ++by)
        for (int bx = 0; bx < mask.blocks_x; ++bx)
            if (mask.at(bx, by))
                for (int y = 0; y < kBlockDim; ++y)
                    for (int x = 0; x < kBlockDim; ++x)
                        p.at(bx * kBlockDim + x, by * kBlockDim + y) = 255;
    return p;
}

}  // namespace jfp
