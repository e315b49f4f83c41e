#pragma once

// Fixed-point iteration of the JPEG block transform with convergence
// telemetry. Every trajectory of a consistent transform reaches a block x*
// with T_q(x*) = x* in finitely many steps; failure to converge is reported
// as an error because it can only come from an implementation inconsistency.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jfp/block.hpp"
#include "jfp/parallel.hpp"
#include "jfp/planes.hpp"
#include "jfp/sampling.hpp"

namespace jfp {

// Row t pairs the quantization error of iterate t with the reconstruction
// error of iterate t+1: the chain eps_0 >= eta_1 >= eps_1 >= ... >= 0.
struct TraceRecord {
    int t = 0;
    double epsilon = 0.0;   // eps_t  = quant_error(x_t)
    double eta = 0.0;       // eta_{t+1} = recon_error(x_{t+1}, x_t)
    double delta = 0.0;     // ||x_t - x_{t+1}||_2, exactly 0 at convergence
    int changed_pixels = 0;
};

using ConvergenceTrace = std::vector<TraceRecord>;

struct FixpointResult {
    PixelBlock fixpoint{};
    int iterations = 0;  // applications that changed the block
    ConvergenceTrace trace;
    bool converged = false;
};

// Diagnostic for a trajectory that cycles or exhausts the iteration cap.
// Theoretically impossible, so it carries the evidence for debugging.
class convergence_error : public std::runtime_error {
public:
    enum class Kind { iteration_cap, cycle };

    convergence_error(Kind kind, ConvergenceTrace trace, const PixelBlock& last)
        : std::runtime_error(kind == Kind::cycle
                                 ? "2-cycle detected: block transform is not a consistent projection"
                                 : "no fixed point within the iteration cap"),
          kind_(kind),
          trace_(std::move(trace)),
          last_(last) {}

    Kind kind() const { return kind_; }
    const ConvergenceTrace& trace() const { return trace_; }
    const PixelBlock& last_block() const { return last_; }

private:
    Kind kind_;
    ConvergenceTrace trace_;
    PixelBlock last_;
};

// Apply T_q until x_{t+1} = x_t (exact equality of all 64 samples; the
// transform is integer-valued so there is no tolerance). The default cap is
// a bug detector, not a tuning knob: fixed points arrive within a few
// iterations.
inline FixpointResult iterate_block(const PixelBlock& b, const QuantTable& q,
                                    int max_iter = 64) {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    FixpointResult res;
    PixelBlock x = b;
    PixelBlock before_prev{};
    bool have_before_prev = false;
    for (int t = 0; t < max_iter; ++t) {
        const PixelBlock y = jpeg_block_transform(x, q);
        TraceRecord rec;
        rec.t = t;
        rec.epsilon = quant_error(x, q);
        rec.eta = recon_error(y, x, q);
        rec.delta = block_distance(x, y);
        rec.changed_pixels = changed_pixels(x, y);
        res.trace.push_back(rec);
        if (y == x) {
            // converged; one more application must keep the block unchanged
            if (jpeg_block_transform(y, q) != y)
                throw convergence_error(convergence_error::Kind::cycle,
                                        std::move(res.trace), y);
            res.fixpoint = y;
            res.iterations = t;
            res.converged = true;
            return res;
        }
        if (have_before_prev && y == before_prev)
            throw convergence_error(convergence_error::Kind::cycle, std::move(res.trace), y);
        before_prev = x;
        have_before_prev = true;
        x = y;
    }
    throw convergence_error(convergence_error::Kind::iteration_cap, std::move(res.trace), x);
}

struct PlaneFixpointResult {
    Plane plane;  // every 8x8 block replaced by its fixed point
    int blocks_x = 0;
    int blocks_y = 0;
    std::vector<FixpointResult> blocks;  // raster block order
};

// Blocks are independent, so the plane fixed point is the assembly of the
// per-block fixed points. The plane must already be cropped to the grid.
inline PlaneFixpointResult iterate_plane(const Plane& p, const QuantTable& q,
                                         int max_iter = 64) {
    q.check();
    BlockGrid grid = split_blocks(p);  // rejects non-multiple-of-8 dimensions
    PlaneFixpointResult out;
    out.blocks_x = grid.blocks_x;
    out.blocks_y = grid.blocks_y;
    out.blocks.resize(grid.blocks.size());
    parallel_for(static_cast<int>(grid.blocks.size()), [&](int i) {
        out.blocks[i] = iterate_block(grid.blocks[i], q, max_iter);
        grid.blocks[i] = out.blocks[i].fixpoint;
    });
    out.plane = assemble_blocks(grid);
    return out;
}

// ---------------------------------------------------------------------------
// Separation (distinctness of fixed points)
// ---------------------------------------------------------------------------

struct SeparationVerdict {
    double distance = 0.0;
    bool hypothesis = false;        // 2 * delta_bound < ||x - x'||
    bool fixpoints_differ = false;
    bool contradiction = false;     // hypothesis held yet the fixed points coincide
};

// Check the separation implication for one pair. delta_bound is an empirical
// estimate of the maximum block-to-fixed-point distance; a contradiction
// would falsify that estimate.
inline SeparationVerdict separation_check(const PixelBlock& x, const PixelBlock& xp,
                                          const QuantTable& q, double delta_bound,
                                          int max_iter = 64) {
    SeparationVerdict v;
    v.distance = block_distance(x, xp);
    v.hypothesis = 2.0 * delta_bound < v.distance;
    const PixelBlock fx = iterate_block(x, q, max_iter).fixpoint;
    const PixelBlock fxp = iterate_block(xp, q, max_iter).fixpoint;
    v.fixpoints_differ = fx != fxp;
    v.contradiction = v.hypothesis && !v.fixpoints_differ;
    return v;
}

// Empirical separation radius: max ||x - x*|| over `samples` random blocks.
// The exact global maximum is out of reach at full scale (the state space is
// astronomically large), so this is an estimate and labeled as such.
inline double estimate_delta_bound(const QuantTable& q, int samples, std::uint64_t seed,
                                   int max_iter = 64) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    BlockSampler sampler(seed);
    std::vector<PixelBlock> blocks(static_cast<std::size_t>(samples));
    for (auto& b : blocks) b = sampler.next();
    std::vector<double> dist(blocks.size());
    parallel_for(static_cast<int>(blocks.size()), [&](int i) {
        const FixpointResult r = iterate_block(blocks[i], q, max_iter);
        dist[i] = block_distance(blocks[i], r.fixpoint);
    });
    double best = 0.0;
    for (double d : dist) best = std::max(best, d);
    return best;
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

namespace detail {

// Fixed %.17g formatting keeps CSV output byte-stable for identical inputs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_trace_csv_header(std::ostream& os) {
    os << "# jfp-trace v1\n";
    os << "block_id,t,epsilon,eta,delta,changed_pixels\n";
}

inline void write_trace_csv_rows(std::ostream& os, std::uint64_t block_id,
                                 const ConvergenceTrace& trace) {
    for (const TraceRecord& r : trace)
        os << block_id << ',' << r.t << ',' << detail::format_double(r.epsilon) << ','
           << detail::format_double(r.eta) << ',' << detail::format_double(r.delta) << ','
           << r.changed_pixels << '\n';
}

}  // namespace jfp
