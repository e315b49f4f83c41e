#pragma once

// Desk-scale analog of the JPEG block transform with a fully enumerable
// state space: n x n blocks, pixels in [0, max_value], a single scalar
// quantization step, and an n-point orthonormal DCT. The full 8x8 space is
// far beyond enumeration, so the nesting / finite-convergence / stabilization
// / separation results are verified exhaustively here instead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "jfp/block.hpp"

namespace jfp {

inline constexpr std::uint64_t kMiniEnumerationBudget = 10'000'000;

struct MiniModel {
    int n = 2;          // block edge; state is an n*n vector
    int max_value = 15; // pixels in [0, max_value]
    int qstep = 1;
    int level_shift = 0;

    // Test hook: 'alternating' flips the quantization and pixel-rounding tie
    // rules on every transform call. That breaks the projection-uniqueness
    // argument on purpose, so trajectories may cycle; used as a negative
    // control for the convergence checks.
    enum class TieBreak { standard, alternating };
    TieBreak tie_break = TieBreak::standard;

    std::uint64_t state_count() const {
        std::uint64_t c = 1;
        for (int i = 0; i < n * n; ++i) {
            c *= static_cast<std::uint64_t>(max_value + 1);
            if (c > kMiniEnumerationBudget) return c;
        }
        return c;
    }
};

using MiniBlock = std::vector<int>;  // n*n samples, raster order

class MiniJpeg {
public:
    explicit MiniJpeg(const MiniModel& m) : model_(m) {
        if (m.n < 1) throw std::invalid_argument("mini model needs n >= 1");
        if (m.max_value < 0 || m.max_value > 255)
            throw std::invalid_argument("mini model pixel range outside [0,255]");
        if (m.qstep < 1) throw std::invalid_argument("mini model qstep must be >= 1");
        build_basis();
    }

    const MiniModel& model() const { return model_; }

    // n-point orthonormal DCT-II matrix; orthonormal to 1e-12.
    const std::vector<double>& basis() const { return basis_; }
    double basis_at(int k, int j) const { return basis_[static_cast<std::size_t>(k) * model_.n + j]; }

    // One transform round: clamp(round(idct([dct(x - shift)]_q)) + shift).
    MiniBlock transform(const MiniBlock& x) {
        const int n = model_.n;
        if (static_cast<int>(x.size()) != n * n)
            throw std::invalid_argument("mini block has wrong size");
        const bool flip = (model_.tie_break == MiniModel::TieBreak::alternating) &&
                          (calls_++ % 2 == 1);

        std::vector<double> shifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            shifted[i] = static_cast<double>(x[i]) - model_.level_shift;

        std::vector<double> coeff = dct_2d(shifted);
        const double q = static_cast<double>(model_.qstep);
        for (double& c : coeff)
            c = flip ? q * std::ceil(c / q - 0.5)    // half toward -inf
                     : q * std::floor(c / q + 0.5);  // half toward +inf

        const std::vector<double> recon = idct_2d(coeff);
        MiniBlock out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = recon[i];
            const long long v = flip ? static_cast<long long>(std::ceil(r - 0.5))
                                     : round_half_away(r);
            out[i] = static_cast<int>(
                truncate(static_cast<double>(v + model_.level_shift), 0, model_.max_value));
        }
        return out;
    }

    std::uint64_t pack(const MiniBlock& x) const {
        std::uint64_t key = 0;
        const std::uint64_t radix = static_cast<std::uint64_t>(model_.max_value) + 1;
        for (std::size_t i = x.size(); i-- > 0;) key = key * radix + static_cast<std::uint64_t>(x[i]);
        return key;
    }

    MiniBlock unpack(std::uint64_t key) const {
        const int cells = model_.n * model_.n;
        const std::uint64_t radix = static_cast<std::uint64_t>(model_.max_value) + 1;
        MiniBlock x(static_cast<std::size_t>(cells));
        for (int i = 0; i < cells; ++i) {
            x[static_cast<std::size_t>(i)] = static_cast<int>(key % radix);
            key /= radix;
        }
        return x;
    }

    static std::uint64_t distance_sq(const MiniBlock& a, const MiniBlock& b) {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const long long d = a[i] - b[i];
            s += static_cast<std::uint64_t>(d * d);
        }
        return s;
    }

private:
    // Same normalization split as the 8x8 path: unnormalized cosines plus an
    // elementwise scale. scale[0][0] = 1/n is an exact binary fraction for
    // power-of-two n, so the DC coefficient of an integer block is exact.
    void build_basis() {
        const int n = model_.n;
        const double pi = std::acos(-1.0);
        basis_.resize(static_cast<std::size_t>(n) * n);
        cosine_.resize(static_cast<std::size_t>(n) * n);
        scale_.resize(static_cast<std::size_t>(n) * n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const double cosv = std::cos(pi * (2 * j + 1) * k / (2.0 * n));
                cosine_[static_cast<std::size_t>(k) * n + j] = (k == 0) ? 1.0 : cosv;
                basis_[static_cast<std::size_t>(k) * n + j] =
                    (k == 0) ? 1.0 / std::sqrt(static_cast<double>(n))
                             : std::sqrt(2.0 / n) * cosv;
            }
        const double dc = 1.0 / n;
        const double cross = std::sqrt(2.0) / n;
        const double ac = 2.0 / n;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                scale_[static_cast<std::size_t>(k) * n + l] =
                    (k == 0 && l == 0) ? dc : (k == 0 || l == 0) ? cross : ac;
    }

    // scale .* (C * X * C^T)
    std::vector<double> dct_2d(const std::vector<double>& x) const {
        std::vector<double> out = sandwich(x, /*transpose=*/false);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale_[i];
        return out;
    }

    // C^T * (scale .* Y) * C
    std::vector<double> idct_2d(const std::vector<double>& y) const {
        std::vector<double> scaled(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) scaled[i] = scale_[i] * y[i];
        return sandwich(scaled, /*transpose=*/true);
    }

    // C * X * C^T, or C^T * X * C when transpose is set; row-major order.
    std::vector<double> sandwich(const std::vector<double>& x, bool transpose) const {
        const int n = model_.n;
        auto c = [&](int a, int b) {
            return transpose ? cosine_[static_cast<std::size_t>(b) * n + a]
                             : cosine_[static_cast<std::size_t>(a) * n + b];
        };
        std::vector<double> tmp(x.size()), out(x.size());
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += c(k, i) * x[static_cast<std::size_t>(i) * n + j];
                tmp[static_cast<std::size_t>(k) * n + j] = s;
            }
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += tmp[static_cast<std::size_t>(k) * n + j] * c(l, j);
                out[static_cast<std::size_t>(k) * n + l] = s;
            }
        return out;
    }

    MiniModel model_;
    std::vector<double> basis_;
    std::vector<double> cosine_;
    std::vector<double> scale_;
    std::uint64_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

struct MiniReport {
    MiniModel model;

    // Set chain keys, sorted: omega_chain[0] = Omega_0, ..., last = stabilized.
    std::vector<std::vector<std::uint32_t>> omega_chain;
    bool chain_stabilized = false;
    bool nesting_ok = false;

    // Per-state results, indexed by packed key.
    std::vector<std::uint32_t> fixpoint_of;
    std::vector<std::uint16_t> steps_to_fix;
    bool all_converged = false;
    std::uint64_t counterexample = 0;  // first non-converging key, if any

    int tau_max = 0;
    std::uint64_t delta_sq_exact = 0;  // exact squared max distance to own fixed point
    double delta_exact = 0.0;

    bool stabilized_all_fixed = false;  // every member of the last chain set is a fixed point

    const std::vector<std::uint32_t>& fixed_points() const { return omega_chain.back(); }
    bool theorems_hold() const {
        return nesting_ok && all_converged && chain_stabilized && stabilized_all_fixed;
    }
};

inline constexpr int kMiniIterationCap = 4096;

namespace detail {

struct MiniTrajectory {
    bool converged = false;
    std::uint64_t fixpoint_key = 0;
    int steps = 0;
};

inline MiniTrajectory mini_iterate(MiniJpeg& engine, std::uint64_t key) {
    MiniTrajectory out;
    MiniBlock x = engine.unpack(key);
    std::uint64_t prev_key = 0;
    for (int t = 0; t < kMiniIterationCap; ++t) {
        const std::uint64_t xkey = engine.pack(x);
        const MiniBlock y = engine.transform(x);
        const std::uint64_t ykey = engine.pack(y);
        if (ykey == xkey) {
            out.converged = true;
            out.fixpoint_key = xkey;
            out.steps = t;
            return out;
        }
        if (t >= 1 && ykey == prev_key) return out;  // x_{t+1} == x_{t-1}: 2-cycle
        prev_key = xkey;
        x = y;
    }
    return out;
}

}  // namespace detail

// Enumerate the whole state space: per-state trajectories (convergence steps,
// fixed point, exact distance) and the set chain Omega_{t+1} = T(Omega_t)
// until it stops shrinking.
inline MiniReport enumerate_mini_model(const MiniModel& m) {
    const std::uint64_t count = m.state_count();
    if (count > kMiniEnumerationBudget)
        throw std::invalid_argument("mini model state space exceeds the enumeration budget");

    MiniJpeg engine(m);
    MiniReport rep;
    rep.model = m;
    rep.fixpoint_of.assign(static_cast<std::size_t>(count), 0);
    rep.steps_to_fix.assign(static_cast<std::size_t>(count), 0);
    rep.all_converged = true;

    for (std::uint64_t key = 0; key < count; ++key) {
        const detail::MiniTrajectory tr = detail::mini_iterate(engine, key);
        if (!tr.converged) {
            if (rep.all_converged) rep.counterexample = key;
            rep.all_converged = false;
            continue;
        }
        rep.fixpoint_of[static_cast<std::size_t>(key)] = static_cast<std::uint32_t>(tr.fixpoint_key);
        rep.steps_to_fix[static_cast<std::size_t>(key)] =
            static_cast<std::uint16_t>(std::min(tr.steps, 0xFFFF));
        rep.tau_max = std::max(rep.tau_max, tr.steps);
        const std::uint64_t d2 =
            MiniJpeg::distance_sq(engine.unpack(key), engine.unpack(tr.fixpoint_key));
        rep.delta_sq_exact = std::max(rep.delta_sq_exact, d2);
    }
    rep.delta_exact = std::sqrt(static_cast<double>(rep.delta_sq_exact));

    // set chain
    std::vector<std::uint32_t> current(static_cast<std::size_t>(count));
    for (std::uint64_t key = 0; key < count; ++key) current[static_cast<std::size_t>(key)] = static_cast<std::uint32_t>(key);
    rep.omega_chain.push_back(current);
    rep.nesting_ok = true;
    for (int level = 0; level < kMiniIterationCap; ++level) {
        std::vector<std::uint32_t> next;
        next.reserve(current.size());
        for (std::uint32_t key : current)
            next.push_back(static_cast<std::uint32_t>(engine.pack(engine.transform(engine.unpack(key)))));
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (!std::includes(current.begin(), current.end(), next.begin(), next.end()))
            rep.nesting_ok = false;
        if (next == current) {
            rep.chain_stabilized = true;
            break;
        }
        rep.omega_chain.push_back(next);
        current = std::move(next);
    }

    rep.stabilized_all_fixed = rep.chain_stabilized;
    if (rep.chain_stabilized) {
        for (std::uint32_t key : rep.omega_chain.back()) {
            MiniJpeg probe(m);  // fresh engine: parity-independent check
            const MiniBlock x = probe.unpack(key);
            if (probe.transform(x) != x) {
                rep.stabilized_all_fixed = false;
                break;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive separation check (integer-exact)
// ---------------------------------------------------------------------------

struct MiniSeparation {
    std::uint64_t omega1_size = 0;
    std::uint64_t groups = 0;             // distinct fixed points among Omega_1
    std::uint64_t pairs_checked = 0;      // same-fixed-point pairs examined
    std::uint64_t max_intra_distance_sq = 0;
    std::uint64_t delta_sq = 0;           // 4 * delta^2 is the separation threshold
    std::uint64_t violations = 0;         // pairs with dist^2 > 4*delta^2 sharing a fixed point
};

// Pairs from different groups have distinct fixed points by construction, so
// a violation can only be a same-group pair with squared distance above
// 4*delta^2; everything is integer arithmetic, no float tolerance involved.
inline MiniSeparation mini_separation_check(const MiniReport& rep) {
    if (!rep.all_converged)
        throw std::invalid_argument("separation check requires a fully converged enumeration");
    MiniJpeg engine(rep.model);

    if (rep.omega_chain.size() < 2)
        throw std::invalid_argument("enumeration report lacks Omega_1");
    const std::vector<std::uint32_t>& omega1 = rep.omega_chain[1];

    // group Omega_1 members by their fixed point
    std::vector<std::pair<std::uint32_t, std::uint32_t>> by_fix;  // (fixpoint, member)
    by_fix.reserve(omega1.size());
    for (std::uint32_t key : omega1)
        by_fix.emplace_back(rep.fixpoint_of[static_cast<std::size_t>(key)], key);
    std::sort(by_fix.begin(), by_fix.end());

    MiniSeparation sep;
    sep.omega1_size = omega1.size();
    sep.delta_sq = rep.delta_sq_exact;
    const std::uint64_t threshold = 4 * rep.delta_sq_exact;

    std::size_t start = 0;
    while (start < by_fix.size()) {
        std::size_t end = start;
        while (end < by_fix.size() && by_fix[end].first == by_fix[start].first) ++end;
        ++sep.groups;
        for (std::size_t i = start; i < end; ++i) {
            const MiniBlock a = engine.unpack(by_fix[i].second);
            for (std::size_t j = i + 1; j < end; ++j) {
                const MiniBlock b = engine.unpack(by_fix[j].second);
                const std::uint64_t d2 = MiniJpeg::distance_sq(a, b);
                ++sep.pairs_checked;
                sep.max_intra_distance_sq = std::max(sep.max_intra_distance_sq, d2);
                if (d2 > threshold) ++sep.violations;
            }
        }
        start = end;
    }
    return sep;
}

}  // namespace jfp
