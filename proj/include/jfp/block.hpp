#pragma once

// 8x8 block math: projection operators (rounding, truncation, lattice
// quantization), the orthonormal DCT pair, and the single-round JPEG block
// transform
//
//   T_q(x) = clamp(round(idct2([dct2(x - 128)]_q)) + 128, 0, 255)
//
// All arithmetic is double precision with a fixed row-major summation order;
// builds must not reassociate or contract floating point (-ffp-contract=off),
// so identical inputs give bit-identical outputs on any platform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace jfp {

inline constexpr int kBlockDim   = 8;
inline constexpr int kBlockSize  = kBlockDim * kBlockDim;
inline constexpr int kLevelShift = 128;

// 8x8 image block, raster order (row-major), samples in [0,255].
using PixelBlock = std::array<std::uint8_t, kBlockSize>;

// 8x8 block of real values in the pixel domain (level-shifted samples, IDCT
// reconstructions, ...).
using RealBlock = std::array<double, kBlockSize>;

// 8x8 block of DCT coefficients, raster order of (k,l) frequency pairs.
using CoeffBlock = std::array<double, kBlockSize>;

// 8x8 quantization steps, raster order. Steps must lie in [1,255] (8-bit
// baseline tables; step 0 is invalid).
struct QuantTable {
    std::array<int, kBlockSize> steps{};

    static QuantTable uniform(int step) {
        QuantTable q;
        q.steps.fill(step);
        q.check();
        return q;
    }

    void check() const {
        for (int s : steps)
            if (s < 1 || s > 255)
                throw std::invalid_argument("quantization step outside [1,255]");
    }

    bool operator==(const QuantTable&) const = default;
};

// ---------------------------------------------------------------------------
// Scalar projections
// ---------------------------------------------------------------------------

// Nearest integer; halves round away from zero (2.5 -> 3, -2.5 -> -3).
inline long long round_half_away(double x) {
    if (!std::isfinite(x))
        throw std::invalid_argument("round_half_away: non-finite input");
    return std::llround(x);
}

// Clamp x to [lo, hi].
inline double truncate(double x, long long lo, long long hi) {
    if (lo > hi)
        throw std::invalid_argument("truncate: lo > hi");
    return std::min(std::max(x, static_cast<double>(lo)), static_cast<double>(hi));
}

// Quantization index floor(x/step + 0.5): nearest lattice multiple, halves
// toward +infinity. The codec and the lattice projection both go through
// this one expression so they can never disagree.
inline long long quantize_index(double x, int step) {
    return static_cast<long long>(std::floor(x / static_cast<double>(step) + 0.5));
}

// Per-element nearest point of the lattice {step * k : k integer}.
inline CoeffBlock quantize_lattice(const CoeffBlock& c, const QuantTable& q) {
    CoeffBlock out;
    for (int i = 0; i < kBlockSize; ++i)
        out[i] = static_cast<double>(q.steps[i]) *
                 static_cast<double>(quantize_index(c[i], q.steps[i]));
    return out;
}

// ---------------------------------------------------------------------------
// DCT basis
// ---------------------------------------------------------------------------

// Orthonormal 8-point DCT-II matrix P and its 64x64 Kronecker form.
// Row 0 is the constant 1/(2*sqrt(2)); row k>=1 is cos(pi*(2n+1)*k/16)/2.
// P*P^T = P^T*P = I to 1e-12, which the error chain arguments rely on.
//
// The transforms below evaluate P*X*P^T as an unnormalized cosine sandwich
// C*X*C^T followed by an elementwise scale (the normalizing factor split
// that practical codecs use; it changes nothing mathematically). The scale
// entries 1/8 and 1/4 are exact binary fractions, so the DC coefficient of
// an integer block is exact: sums of integers scaled by 1/8.
struct DctBasis {
    std::array<std::array<double, kBlockDim>, kBlockDim> matrix{};  // orthonormal P
    // vec(dct2(X)) = kron * vec(X) on raster-order vectors.
    std::array<std::array<double, kBlockSize>, kBlockSize> kron{};
    // unnormalized cosines: row 0 is all ones, row k>=1 is cos(pi*(2n+1)*k/16)
    std::array<std::array<double, kBlockDim>, kBlockDim> cosine{};
    // scale[k][l]: 1/8 for DC, 1/(4*sqrt(2)) on the DC row/column, 1/4 elsewhere
    std::array<std::array<double, kBlockDim>, kBlockDim> scale{};

    static const DctBasis& instance() {
        static const DctBasis basis;
        return basis;
    }

private:
    DctBasis() {
        const double pi = std::acos(-1.0);
        for (int k = 0; k < kBlockDim; ++k)
            for (int n = 0; n < kBlockDim; ++n) {
                cosine[k][n] = (k == 0) ? 1.0 : std::cos(pi * (2 * n + 1) * k / 16.0);
                matrix[k][n] = (k == 0)
                                   ? 1.0 / (2.0 * std::sqrt(2.0))
                                   : 0.5 * std::cos(pi * (2 * n + 1) * k / 16.0);
            }
        const double dc_cross = 1.0 / (4.0 * std::sqrt(2.0));
        for (int k = 0; k < kBlockDim; ++k)
            for (int l = 0; l < kBlockDim; ++l)
                scale[k][l] = (k == 0 && l == 0) ? 0.125
                              : (k == 0 || l == 0) ? dc_cross
                                                   : 0.25;
        for (int k = 0; k < kBlockDim; ++k)
            for (int l = 0; l < kBlockDim; ++l)
                for (int i = 0; i < kBlockDim; ++i)
                    for (int j = 0; j < kBlockDim; ++j)
                        kron[k * kBlockDim + l][i * kBlockDim + j] = matrix[k][i] * matrix[l][j];
    }
};

namespace detail {

inline RealBlock to_real(const PixelBlock& b) {
    RealBlock r;
    for (int i = 0; i < kBlockSize; ++i) r[i] = static_cast<double>(b[i]);
    return r;
}

inline RealBlock level_shifted(const PixelBlock& b) {
    RealBlock r;
    for (int i = 0; i < kBlockSize; ++i)
        r[i] = static_cast<double>(b[i]) - kLevelShift;
    return r;
}

inline double l2_distance(const std::array<double, kBlockSize>& a,
                          const std::array<double, kBlockSize>& b) {
    double s = 0.0;
    for (int i = 0; i < kBlockSize; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

// Forward 2-D DCT: P * X * P^T, evaluated as scale .* (C * X * C^T).
inline CoeffBlock dct2(const RealBlock& x) {
    const DctBasis& basis = DctBasis::instance();
    const auto& c = basis.cosine;
    std::array<double, kBlockSize> tmp;  // C * X
    for (int k = 0; k < kBlockDim; ++k)
        for (int j = 0; j < kBlockDim; ++j) {
            double s = 0.0;
            for (int i = 0; i < kBlockDim; ++i) s += c[k][i] * x[i * kBlockDim + j];
            tmp[k * kBlockDim + j] = s;
        }
    CoeffBlock out;
    for (int k = 0; k < kBlockDim; ++k)
        for (int l = 0; l < kBlockDim; ++l) {
            double s = 0.0;
            for (int j = 0; j < kBlockDim; ++j) s += tmp[k * kBlockDim + j] * c[l][j];
            out[k * kBlockDim + l] = basis.scale[k][l] * s;
        }
    return out;
}

inline CoeffBlock dct2(const PixelBlock& b) { return dct2(detail::to_real(b)); }

// Inverse 2-D DCT: P^T * Y * P, evaluated as C^T * (scale .* Y) * C
// (exact adjoint of dct2).
inline RealBlock idct2(const CoeffBlock& y) {
    const DctBasis& basis = DctBasis::instance();
    const auto& c = basis.cosine;
    std::array<double, kBlockSize> scaled;
    for (int k = 0; k < kBlockDim; ++k)
        for (int l = 0; l < kBlockDim; ++l)
            scaled[k * kBlockDim + l] = basis.scale[k][l] * y[k * kBlockDim + l];
    std::array<double, kBlockSize> tmp;  // C^T * scaled
    for (int i = 0; i < kBlockDim; ++i)
        for (int l = 0; l < kBlockDim; ++l) {
            double s = 0.0;
            for (int k = 0; k < kBlockDim; ++k) s += c[k][i] * scaled[k * kBlockDim + l];
            tmp[i * kBlockDim + l] = s;
        }
    RealBlock out;
    for (int i = 0; i < kBlockDim; ++i)
        for (int j = 0; j < kBlockDim; ++j) {
            double s = 0.0;
            for (int l = 0; l < kBlockDim; ++l) s += tmp[i * kBlockDim + l] * c[l][j];
            out[i * kBlockDim + j] = s;
        }
    return out;
}

// ---------------------------------------------------------------------------
// JPEG block transform
// ---------------------------------------------------------------------------

// Raster-order quantization indices of a block: the compression half of the
// transform and exactly what the entropy coder serializes.
inline std::array<int, kBlockSize> quantize_to_indices(const PixelBlock& b,
                                                       const QuantTable& q) {
    const CoeffBlock c = dct2(detail::level_shifted(b));
    std::array<int, kBlockSize> idx;
    for (int i = 0; i < kBlockSize; ++i)
        idx[i] = static_cast<int>(quantize_index(c[i], q.steps[i]));
    return idx;
}

// Dequantize, inverse-transform, round and clamp: the decompression half.
inline PixelBlock reconstruct_from_indices(const std::array<int, kBlockSize>& idx,
                                           const QuantTable& q) {
    CoeffBlock c;
    for (int i = 0; i < kBlockSize; ++i)
        c[i] = static_cast<double>(q.steps[i]) * static_cast<double>(idx[i]);
    const RealBlock recon = idct2(c);
    PixelBlock out;
    for (int i = 0; i < kBlockSize; ++i) {
        const long long v = round_half_away(recon[i]) + kLevelShift;
        out[i] = static_cast<std::uint8_t>(truncate(static_cast<double>(v), 0, 255));
    }
    return out;
}

// One full round of block compression + decompression. An integer transform:
// the output is again a valid image block. Composing the two codec halves
// keeps this bit-identical to a file round trip.
inline PixelBlock jpeg_block_transform(const PixelBlock& b, const QuantTable& q) {
    return reconstruct_from_indices(quantize_to_indices(b, q), q);
}

// Quantization error of the DCT of the level-shifted block:
// epsilon = || D*x~ - [D*x~]_q ||_2. Zero exactly at lattice points.
inline double quant_error(const PixelBlock& b, const QuantTable& q) {
    const CoeffBlock c = dct2(detail::level_shifted(b));
    return detail::l2_distance(c, quantize_lattice(c, q));
}

// Rounding/truncation error of one transform step, for next = T_q(prev):
// eta = || D*x~_next - [D*x~_prev]_q ||_2. Computed in the DCT domain (the
// norm is the same in either domain for an orthonormal transform); at a
// fixed point this is bit-identical to quant_error.
inline double recon_error(const PixelBlock& next, const PixelBlock& prev, const QuantTable& q) {
    const CoeffBlock c_next = dct2(detail::level_shifted(next));
    const CoeffBlock cq_prev = quantize_lattice(dct2(detail::level_shifted(prev)), q);
    return detail::l2_distance(c_next, cq_prev);
}

// l2 distance between two blocks in the pixel domain.
inline double block_distance(const PixelBlock& a, const PixelBlock& b) {
    double s = 0.0;
    for (int i = 0; i < kBlockSize; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

inline int changed_pixels(const PixelBlock& a, const PixelBlock& b) {
    int n = 0;
    for (int i = 0; i < kBlockSize; ++i) n += (a[i] != b[i]);
    return n;
}

}  // namespace jfp
