// jfp: JPEG fixed-point toolkit.
//
// Subcommands cover the full pipeline: create tamper-evident images
// (fixpoint), check them (verify), generate attack fixtures (manipulate),
// and run the desk-scale experiments behind the convergence and quality
// plots (chains, psnr, mini-oracle).
//
// Exit codes: 0 success/intact, 1 tampered or failed oracle, 2 usage/parse
// errors. JFP_THREADS overrides the worker count for block-parallel steps.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "jfp/fixpoint.hpp"
#include "jfp/jfif.hpp"
#include "jfp/mini_model.hpp"
#include "jfp/pnm.hpp"
#include "jfp/sampling.hpp"
#include "jfp/tamper.hpp"

namespace {

struct LoadedImage {
    jfp::ImagePlanes image;
    bool from_jfif = false;
    jfp::QuantTable q_luma;
    jfp::QuantTable q_chroma;
};

LoadedImage load_image(const std::string& path) {
    const std::vector<std::uint8_t> bytes = jfp::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
        jfp::DecodeResult dec = jfp::decode_baseline(bytes);
        return {std::move(dec.image), true, dec.q_luma, dec.q_chroma};
    }
    return {jfp::load_pnm_bytes(bytes), false, {}, {}};
}

int percentile(std::vector<int> v, double p) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
    return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

std::string fmt(double v) { return jfp::detail::format_double(v); }

// ---------------------------------------------------------------------------
// fixpoint
// ---------------------------------------------------------------------------

struct FixpointOpts {
    std::string input;
    std::string output;
    std::string pnm_output;
    int quality = 75;
    int max_iter = 64;
    bool use_420 = false;
};

int cmd_fixpoint(const FixpointOpts& o) {
    LoadedImage in = load_image(o.input);
    jfp::ImagePlanes img = std::move(in.image);
    if (o.use_420) {
        if (img.mode != jfp::ColorMode::ycbcr444) {
            std::cerr << "error: --experimental-420 requires a color input\n";
            return 2;
        }
        img = jfp::to_ycbcr420(img);
    }

    const jfp::TamperEvident te = jfp::make_tamper_evident(img, o.quality, o.max_iter);

    // aggregate per-pass pixel changes and per-block iteration counts
    std::vector<long long> pass_changes;
    std::vector<int> iters;
    for (const auto& plane_res : te.plane_results) {
        for (const auto& block : plane_res.blocks) {
            iters.push_back(block.iterations);
            for (const auto& rec : block.trace) {
                if (static_cast<std::size_t>(rec.t) >= pass_changes.size())
                    pass_changes.resize(static_cast<std::size_t>(rec.t) + 1, 0);
                pass_changes[static_cast<std::size_t>(rec.t)] += rec.changed_pixels;
            }
        }
    }

    std::printf("input: %s (%dx%d, %zu plane%s), quality %d\n", o.input.c_str(),
                te.image.width(), te.image.height(), te.image.planes.size(),
                te.image.planes.size() == 1 ? "" : "s", o.quality);
    for (std::size_t t = 0; t < pass_changes.size(); ++t)
        std::printf("pass %zu: %lld pixels changed\n", t + 1, pass_changes[t]);
    std::printf("iterations per block: median %d, p90 %d, max %d\n",
                percentile(iters, 0.50), percentile(iters, 0.90), percentile(iters, 1.0));

    jfp::store_jfif(te.stream, o.output);
    std::printf("wrote %s (%zu bytes)\n", o.output.c_str(), te.stream.bytes.size());
    if (!o.pnm_output.empty()) {
        jfp::store_pnm(te.image, o.pnm_output);
        std::printf("wrote %s\n", o.pnm_output.c_str());
    }

    const jfp::TamperReport check = jfp::verify(jfp::decode_baseline(te.stream));
    if (!check.intact()) {
        std::fprintf(stderr, "internal error: emitted file does not verify intact\n");
        return 2;
    }
    std::printf("self-check: output verifies intact (%d blocks)\n", check.total_blocks);
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
    std::string input;
    std::string report_path;
    std::string mask_path;
    int quality = 0;  // 0: use tables embedded in the file
};

int cmd_verify(const VerifyOpts& o) {
    LoadedImage in = load_image(o.input);
    jfp::TamperReport rep;
    if (o.quality > 0) {
        rep = jfp::verify(in.image, o.quality);
    } else if (in.from_jfif) {
        rep = jfp::verify(in.image, in.q_luma, in.q_chroma);
    } else {
        std::cerr << "error: raster input carries no quantization tables; pass --quality\n";
        return 2;
    }

    std::printf("%s: %s (%d of %d blocks changed)\n", o.input.c_str(),
                rep.intact() ? "intact" : "TAMPERED", rep.changed_block_count,
                rep.total_blocks);
    if (!o.report_path.empty()) {
        jfp::write_file_atomic(o.report_path, jfp::report_to_json(rep));
        std::printf("wrote %s\n", o.report_path.c_str());
    }
    if (!o.mask_path.empty()) {
        jfp::store_pgm(jfp::mask_to_plane(rep.mask), o.mask_path);
        std::printf("wrote %s\n", o.mask_path.c_str());
    }
    return rep.intact() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// chains experiment
// ---------------------------------------------------------------------------

struct ChainsOpts {
    int samples = 10000;
    std::vector<int> qualities{50, 75, 90};
    std::uint64_t seed = 1;
    std::string csv;
    int max_iter = 64;
};

int cmd_chains(const ChainsOpts& o) {
    std::ostringstream csv;
    csv << "# jfp-chains v1: per-iteration aggregates over random blocks;\n";
    csv << "# start state is the once-transformed block\n";
    csv << "quality,t,samples,delta_mean,delta_p50,delta_p90,delta_max,"
           "mono_viol_eps_eta,mono_viol_eta_epsnext,converged\n";

    for (int quality : o.qualities) {
        const jfp::QuantTable q = jfp::standard_tables(quality).first;
        jfp::BlockSampler sampler(o.seed);  // same blocks for every quality
        std::vector<jfp::PixelBlock> starts(static_cast<std::size_t>(o.samples));
        for (auto& b : starts) b = jfp::jpeg_block_transform(sampler.next(), q);

        std::vector<jfp::FixpointResult> results(starts.size());
        jfp::parallel_for(o.samples, [&](int i) {
            results[static_cast<std::size_t>(i)] =
                jfp::iterate_block(starts[static_cast<std::size_t>(i)], q, o.max_iter);
        });

        std::size_t tmax = 0;
        for (const auto& r : results) tmax = std::max(tmax, r.trace.size());

        long long viol_eps_eta = 0, viol_eta_epsnext = 0;
        std::vector<int> iter_counts;
        iter_counts.reserve(results.size());
        for (const auto& r : results) {
            iter_counts.push_back(r.iterations);
            for (std::size_t t = 0; t < r.trace.size(); ++t) {
                if (r.trace[t].epsilon - r.trace[t].eta < -1e-9) ++viol_eps_eta;
                if (t + 1 < r.trace.size() &&
                    r.trace[t].eta - r.trace[t + 1].epsilon < -1e-9)
                    ++viol_eta_epsnext;
            }
        }

        for (std::size_t t = 0; t < tmax; ++t) {
            std::vector<double> deltas(results.size(), 0.0);  // 0 once converged
            long long converged = 0;
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (t < results[i].trace.size()) deltas[i] = results[i].trace[t].delta;
                if (static_cast<std::size_t>(results[i].iterations) <= t) ++converged;
            }
            double mean = 0.0, dmax = 0.0;
            for (double d : deltas) {
                mean += d;
                dmax = std::max(dmax, d);
            }
            mean /= static_cast<double>(deltas.size());
            std::sort(deltas.begin(), deltas.end());
            const auto nearest_rank = [&](double p) {
                const auto r = static_cast<std::size_t>(
                    std::ceil(p * static_cast<double>(deltas.size())));
                return deltas[std::min(deltas.size() - 1, r == 0 ? 0 : r - 1)];
            };
            const double p50 = nearest_rank(0.5);
            const double p90 = nearest_rank(0.9);
            csv << quality << ',' << t << ',' << o.samples << ',' << fmt(mean) << ','
                << fmt(p50) << ',' << fmt(p90) << ',' << fmt(dmax) << ',' << viol_eps_eta
                << ',' << viol_eta_epsnext << ',' << converged << '\n';
        }

        std::printf(
            "quality %d: %d blocks, median iterations %d, max %d, "
            "monotone violations %lld/%lld\n",
            quality, o.samples, percentile(iter_counts, 0.5), percentile(iter_counts, 1.0),
            viol_eps_eta, viol_eta_epsnext);
    }

    jfp::write_file_atomic(o.csv, csv.str());
    std::printf("wrote %s\n", o.csv.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// psnr experiment
// ---------------------------------------------------------------------------

struct PsnrOpts {
    std::string input;
    std::vector<int> qualities{30, 50, 70, 90};
    std::string csv;
    int max_iter = 64;
};

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return v[i] < v[j];
        });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[order[i]] = static_cast<double>(i);
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double mean = (static_cast<double>(n) - 1.0) / 2.0;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (ra[i] - mean) * (rb[i] - mean);
        da += (ra[i] - mean) * (ra[i] - mean);
        db += (rb[i] - mean) * (rb[i] - mean);
    }
    return (da == 0.0 || db == 0.0) ? 0.0 : num / std::sqrt(da * db);
}

int cmd_psnr(const PsnrOpts& o) {
    LoadedImage in = load_image(o.input);
    const jfp::ImagePlanes img = jfp::crop_to_block_grid(in.image);

    std::ostringstream csv;
    csv << "# jfp-psnr v1: fixed-point image vs single-JPEG image\n";
    csv << "quality,psnr_db,iterations\n";

    std::vector<double> qs, ps;
    for (int quality : o.qualities) {
        const auto [q_luma, q_chroma] = jfp::standard_tables(quality);
        const jfp::TamperEvident te = jfp::make_tamper_evident(img, quality, o.max_iter);
        const jfp::ImagePlanes single =
            jfp::decode_baseline(jfp::encode_baseline(img, q_luma, q_chroma)).image;
        const double db = jfp::psnr(te.image, single);
        int iters = 0;
        for (const auto& pr : te.plane_results)
            for (const auto& blk : pr.blocks) iters = std::max(iters, blk.iterations);
        if (!std::isfinite(db)) {
            std::printf("quality %d: images identical (infinite PSNR), row skipped\n",
                        quality);
            continue;
        }
        csv << quality << ',' << fmt(db) << ',' << iters << '\n';
        qs.push_back(quality);
        ps.push_back(db);
        std::printf("quality %d: PSNR %.3f dB, max block iterations %d\n", quality, db,
                    iters);
    }
    if (qs.size() >= 2)
        std::printf("rank correlation (quality vs PSNR): %.3f\n", rank_correlation(qs, ps));

    jfp::write_file_atomic(o.csv, csv.str());
    std::printf("wrote %s\n", o.csv.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// mini-oracle
// ---------------------------------------------------------------------------

struct MiniOpts {
    int n = 2;
    int range = 15;
    std::vector<int> qsteps{1, 2, 3, 5};
    std::string csv;
    std::string tie_break = "standard";
};

void dump_mini_block(const jfp::MiniJpeg& engine, std::uint64_t key) {
    const jfp::MiniBlock b = engine.unpack(key);
    std::printf("  counterexample block (key %llu):", static_cast<unsigned long long>(key));
    for (int v : b) std::printf(" %d", v);
    std::printf("\n");
}

int cmd_mini_oracle(const MiniOpts& o) {
    std::ostringstream csv;
    csv << "# jfp-mini v1\n";
    csv << "n,max_value,qstep,omega1_size,omega_star_size,chain_length,tau_max,"
           "delta_exact,separation_pairs,separation_violations,pass\n";

    bool all_pass = true;
    for (int qstep : o.qsteps) {
        jfp::MiniModel model;
        model.n = o.n;
        model.max_value = o.range;
        model.qstep = qstep;
        model.tie_break = o.tie_break == "alternating"
                              ? jfp::MiniModel::TieBreak::alternating
                              : jfp::MiniModel::TieBreak::standard;

        const jfp::MiniReport rep = jfp::enumerate_mini_model(model);
        bool pass = rep.theorems_hold();
        std::uint64_t sep_pairs = 0, sep_viol = 0;
        if (rep.all_converged) {
            const jfp::MiniSeparation sep = jfp::mini_separation_check(rep);
            sep_pairs = sep.pairs_checked;
            sep_viol = sep.violations;
            pass = pass && sep.violations == 0;
        }

        std::printf("n=%d range=0..%d q=%d: ", o.n, o.range, qstep);
        if (pass) {
            std::printf("PASS  |omega*|=%zu tau_max=%d delta=%s chain=%zu sets\n",
                        rep.fixed_points().size(), rep.tau_max,
                        fmt(rep.delta_exact).c_str(), rep.omega_chain.size());
        } else {
            all_pass = false;
            std::printf("FAIL  nesting=%d converged=%d stabilized=%d fixed=%d sep_viol=%llu\n",
                        rep.nesting_ok, rep.all_converged, rep.chain_stabilized,
                        rep.stabilized_all_fixed,
                        static_cast<unsigned long long>(sep_viol));
            if (!rep.all_converged) {
                jfp::MiniJpeg engine(model);
                dump_mini_block(engine, rep.counterexample);
            }
        }
        csv << o.n << ',' << o.range << ',' << qstep << ','
            << (rep.omega_chain.size() > 1 ? rep.omega_chain[1].size() : 0) << ','
            << rep.fixed_points().size() << ',' << rep.omega_chain.size() << ','
            << rep.tau_max << ',' << fmt(rep.delta_exact) << ',' << sep_pairs << ','
            << sep_viol << ',' << (pass ? 1 : 0) << '\n';
    }

    if (!o.csv.empty()) {
        jfp::write_file_atomic(o.csv, csv.str());
        std::printf("wrote %s\n", o.csv.c_str());
    }
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// manipulate
// ---------------------------------------------------------------------------

struct ManipulateOpts {
    std::string input;
    std::string output;
    std::string kind;
    double density = 0.01;
    std::vector<int> src;  // x,y,w,h
    std::vector<int> dst;
    std::string donor;
    int requality = 50;
    std::uint64_t seed = 1;
};

jfp::Rect rect_from(const std::vector<int>& v, const char* what) {
    if (v.size() != 4)
        throw std::invalid_argument(std::string(what) + " must be x,y,w,h");
    return {v[0], v[1], v[2], v[3]};
}

int cmd_manipulate(const ManipulateOpts& o) {
    LoadedImage in = load_image(o.input);
    jfp::Manipulation m;
    if (o.kind == "salt_pepper") {
        m.kind = jfp::ManipulationKind::salt_pepper;
        m.density = o.density;
    } else if (o.kind == "copy_move") {
        m.kind = jfp::ManipulationKind::copy_move;
        m.src = rect_from(o.src, "--src");
        m.dst = rect_from(o.dst, "--dst");
    } else if (o.kind == "splice") {
        m.kind = jfp::ManipulationKind::splice;
        m.src = rect_from(o.src, "--src");
        m.dst = rect_from(o.dst, "--dst");
        m.donor = load_image(o.donor).image;
    } else if (o.kind == "requantize") {
        m.kind = jfp::ManipulationKind::requantize;
        m.requantize_quality = o.requality;
    } else {
        std::cerr << "error: unknown manipulation kind '" << o.kind << "'\n";
        return 2;
    }
    const jfp::ImagePlanes out = jfp::apply_manipulation(in.image, m, o.seed);
    // PNM on purpose: a JPEG re-save would itself apply a transform round
    jfp::store_pnm(out, o.output);
    std::printf("wrote %s\n", o.output.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// gen-image
// ---------------------------------------------------------------------------

struct GenOpts {
    std::string output;
    int width = 512;
    int height = 512;
    std::uint64_t seed = 1;
    bool color = false;
};

int cmd_gen_image(const GenOpts& o) {
    const jfp::ImagePlanes img = jfp::synthetic_test_image(
        o.width, o.height, o.seed, o.color ? jfp::ColorMode::ycbcr444 : jfp::ColorMode::grayscale);
    jfp::store_pnm(img, o.output);
    std::printf("wrote %s (%dx%d %s)\n", o.output.c_str(), o.width, o.height,
                o.color ? "color" : "grayscale");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "jfp: JPEG fixed-point toolkit (tamper-evident images, convergence "
        "experiments, exhaustive mini-model oracle)"};
    app.require_subcommand(1);

    FixpointOpts fo;
    auto* fix = app.add_subcommand("fixpoint",
                                   "Drive an image to its JPEG fixed point and write a "
                                   "tamper-evident .jpg");
    fix->add_option("input", fo.input, "input image (.pnm or baseline .jpg)")->required();
    fix->add_option("-q,--quality", fo.quality, "JPEG quality (1..100)")
        ->required()
        ->check(CLI::Range(1, 100));
    fix->add_option("-o,--output", fo.output, "output JFIF path")->required();
    fix->add_option("--pnm", fo.pnm_output, "also write the fixed-point raster as PNM");
    fix->add_option("--max-iter", fo.max_iter, "iteration cap per block")
        ->check(CLI::Range(1, 100000));
    fix->add_flag("--experimental-420", fo.use_420,
                  "run in the experimental 4:2:0 chroma-subsampled mode");

    VerifyOpts vo;
    auto* ver = app.add_subcommand("verify",
                                   "Check a tamper-evident image; exit 0 intact, 1 tampered");
    ver->add_option("input", vo.input, "image to verify (.jpg, or .pnm with --quality)")
        ->required();
    ver->add_option("-q,--quality", vo.quality,
                    "verify against standard tables for this quality instead of the "
                    "tables in the file")
        ->check(CLI::Range(1, 100));
    ver->add_option("--report", vo.report_path, "write a JSON report");
    ver->add_option("--mask", vo.mask_path, "write the changed-block mask as PGM");

    ChainsOpts co;
    auto* cha = app.add_subcommand("chains",
                                   "Iterate random blocks and record the error-chain "
                                   "telemetry as CSV");
    cha->add_option("-n,--samples", co.samples, "number of random blocks")
        ->check(CLI::Range(1, 100000000));
    cha->add_option("--qualities", co.qualities, "JPEG qualities")->delimiter(',');
    cha->add_option("--seed", co.seed, "PRNG seed");
    cha->add_option("--csv", co.csv, "output CSV path")->required();
    cha->add_option("--max-iter", co.max_iter, "iteration cap per block");

    PsnrOpts po;
    auto* psn = app.add_subcommand("psnr",
                                   "Fixed-point vs single-JPEG quality sweep, CSV output");
    psn->add_option("input", po.input, "input image (.pnm)")->required();
    psn->add_option("--qualities", po.qualities, "JPEG qualities")->delimiter(',');
    psn->add_option("--csv", po.csv, "output CSV path")->required();
    psn->add_option("--max-iter", po.max_iter, "iteration cap per block");

    MiniOpts mo;
    auto* min = app.add_subcommand("mini-oracle",
                                   "Exhaustively verify nesting/convergence/stabilization/"
                                   "separation on the enumerable mini model");
    min->add_option("--n", mo.n, "mini block edge length")->check(CLI::Range(1, 8));
    min->add_option("--range", mo.range, "max pixel value")->check(CLI::Range(0, 255));
    min->add_option("--q", mo.qsteps, "quantization steps to test")->delimiter(',');
    min->add_option("--csv", mo.csv, "optional CSV output path");
    min->add_option("--tie-break", mo.tie_break,
                    "'standard', or 'alternating' to deliberately break tie consistency "
                    "(negative control; expect FAIL)")
        ->check(CLI::IsMember({"standard", "alternating"}));

    ManipulateOpts xo;
    auto* man = app.add_subcommand("manipulate",
                                   "Apply a tampering fixture (salt_pepper, copy_move, "
                                   "splice, requantize); writes PNM so no extra JPEG "
                                   "round is applied");
    man->add_option("input", xo.input, "image to manipulate (.jpg or .pnm)")->required();
    man->add_option("-o,--output", xo.output, "output PNM path")->required();
    man->add_option("--kind", xo.kind, "salt_pepper | copy_move | splice | requantize")
        ->required();
    man->add_option("--density", xo.density, "salt_pepper: fraction of pixels hit");
    man->add_option("--src", xo.src, "source rectangle x,y,w,h")->delimiter(',');
    man->add_option("--dst", xo.dst, "destination rectangle x,y,w,h")->delimiter(',');
    man->add_option("--donor", xo.donor, "splice donor image");
    man->add_option("--requality", xo.requality, "requantize: alternate quality")
        ->check(CLI::Range(1, 100));
    man->add_option("--seed", xo.seed, "PRNG seed");

    GenOpts go;
    auto* gen = app.add_subcommand("gen-image",
                                   "Write a reproducible synthetic test image as PNM");
    gen->add_option("-o,--output", go.output, "output PNM path")->required();
    gen->add_option("--width", go.width)->check(CLI::Range(8, 65500));
    gen->add_option("--height", go.height)->check(CLI::Range(8, 65500));
    gen->add_option("--seed", go.seed, "PRNG seed");
    gen->add_flag("--color", go.color, "emit a color (PPM) image");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(fix)) return cmd_fixpoint(fo);
        if (app.got_subcommand(ver)) return cmd_verify(vo);
        if (app.got_subcommand(cha)) return cmd_chains(co);
        if (app.got_subcommand(psn)) return cmd_psnr(po);
        if (app.got_subcommand(min)) return cmd_mini_oracle(mo);
        if (app.got_subcommand(man)) return cmd_manipulate(xo);
        if (app.got_subcommand(gen)) return cmd_gen_image(go);
    } catch (const jfp::convergence_error& e) {
        std::cerr << "error: " << e.what() << " (trace has " << e.trace().size()
                  << " steps)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
