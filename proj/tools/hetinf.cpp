// Command-line front end.  Every subcommand writes a metadata record next to
// its outputs: the effective argument vector (defaults expanded) plus the
// artifact version, so a run can be reproduced bit-for-bit from its own
// metadata.  Relative output paths land in $HETINF_OUTPUT_DIR when that is
// set; --output-dir overrides the environment.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hetinf/charts.hpp"
#include "hetinf/eigenstructure.hpp"
#include "hetinf/error.hpp"
#include "hetinf/fields.hpp"
#include "hetinf/infinity.hpp"
#include "hetinf/io.hpp"
#include "hetinf/lins.hpp"
#include "hetinf/periodic.hpp"

namespace {

using namespace hetinf;

constexpr const char* kVersion = "1.0.0";

std::string g_output_dir;  // resolved once in main

std::string out_path(const std::string& p) {
    if (p.empty() || p.front() == '/' || g_output_dir.empty()) return p;
    return g_output_dir + "/" + p;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Rebuilds the command line from the final option values so the metadata
/// record replays the run exactly, config file and defaults included.
struct ArgvBuilder {
    std::vector<std::string> v;
    explicit ArgvBuilder(const std::string& sub) : v{"hetinf", sub} {}
    ArgvBuilder& arg(const std::string& flag, double x) {
        v.push_back(flag);
        v.push_back(fmt17(x));
        return *this;
    }
    ArgvBuilder& arg(const std::string& flag, int x) {
        v.push_back(flag);
        v.push_back(std::to_string(x));
        return *this;
    }
    ArgvBuilder& arg(const std::string& flag, const std::string& x) {
        v.push_back(flag);
        v.push_back(x);
        return *this;
    }
    ArgvBuilder& flag(const std::string& f, bool on) {
        if (on) v.push_back(f);
        return *this;
    }
};

void emit_metadata(const std::string& meta, const ArgvBuilder& ab,
                   std::vector<std::pair<std::string, std::string>> extra) {
    extra.emplace_back("artifact_version", kVersion);
    if (!g_output_dir.empty()) extra.emplace_back("output_dir", g_output_dir);
    write_metadata_json(out_path(meta), ab.v, extra);
}

// ---------------------------------------------------------------- equilibria

struct EquilibriaOpts {
    double alpha = 0.0, beta = 0.0, gamma = 0.5;
    std::string json, meta = "equilibria.meta.json";
};

int run_equilibria(const EquilibriaOpts& o) {
    const Params ps{o.alpha, o.beta, o.gamma};
    const SaddleData sd = saddle_at_origin(ps);
    const double margin = case_c_margin(sd);
    const CriticalCylinder cc = critical_cylinder(ps);

    std::printf("saddle at the origin (alpha=%g beta=%g gamma=%g)\n", o.alpha, o.beta, o.gamma);
    std::printf("  lambda_s  = %.12f   e_s  = (%.9f, %.9f, %.9f)\n", sd.lambda_s, sd.e_s[0],
                sd.e_s[1], sd.e_s[2]);
    std::printf("  lambda_u  = %.12f   e_u  = (%.9f, %.9f, %.9f)\n", sd.lambda_u, sd.e_u[0],
                sd.e_u[1], sd.e_u[2]);
    std::printf("  lambda_uu = %.12f   e_uu = (%.9f, %.9f, %.9f)\n", sd.lambda_uu, sd.e_uu[0],
                sd.e_uu[1], sd.e_uu[2]);
    std::printf("  resonance margin (-lambda_s) - lambda_uu = %.12f\n", margin);
    std::printf("critical cylinder in the blow-up chart\n");
    std::printf("  radius r* = %.12f (closed form %.12f)\n", cc.radius, critical_radius());
    std::printf("  axis point (%.6f, %.6f, %.6f)\n", cc.axis_point[0], cc.axis_point[1],
                cc.axis_point[2]);

    if (!o.json.empty()) {
        nlohmann::json j;
        j["params"] = {{"alpha", o.alpha}, {"beta", o.beta}, {"gamma", o.gamma}};
        j["lambda"] = {sd.lambda_s, sd.lambda_u, sd.lambda_uu};
        j["e_s"] = sd.e_s;
        j["e_u"] = sd.e_u;
        j["e_uu"] = sd.e_uu;
        j["case_c_margin"] = margin;
        j["critical_radius"] = cc.radius;
        std::FILE* f = std::fopen(out_path(o.json).c_str(), "w");
        if (!f) throw Error(Errc::IoError, "cannot open " + out_path(o.json));
        std::fprintf(f, "%s\n", j.dump(2).c_str());
        std::fclose(f);
    }

    ArgvBuilder ab("equilibria");
    ab.arg("--alpha", o.alpha).arg("--beta", o.beta).arg("--gamma", o.gamma);
    if (!o.json.empty()) ab.arg("--json", o.json);
    ab.arg("--meta", o.meta);
    emit_metadata(o.meta, ab, {{"command", "equilibria"}});
    return 0;
}

// ---------------------------------------------------------------------- flux

struct FluxOpts {
    double alpha = 5.3, beta = 2.0, gamma = 0.5;
    double rlo = 0.1, rhi = 1.5, wb = 0.05;
    int count = 29;
    std::string out = "flux.csv", meta = "flux.meta.json";
};

int run_flux(const FluxOpts& o) {
    if (o.count < 2 || o.rhi <= o.rlo)
        throw Error(Errc::ConfigInvalid, "flux table needs rlo < rhi and count >= 2");
    const Params ps{o.alpha, o.beta, o.gamma};
    const std::string path = out_path(o.out);
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(Errc::IoError, "cannot open " + path);
    std::fprintf(f, "r,flux_closed_form,flux_numeric\n");
    double worst = 0.0;
    for (int i = 0; i < o.count; ++i) {
        const double r = o.rlo + (o.rhi - o.rlo) * i / (o.count - 1);
        const double cf = o.wb * o.wb * flux_through_cylinder(r);
        const double nm = flux_numeric(r, o.wb, ps);
        worst = std::max(worst, std::fabs(cf - nm));
        std::fprintf(f, "%s,%s,%s\n", fmt17(r).c_str(), fmt17(cf).c_str(), fmt17(nm).c_str());
    }
    std::fclose(f);
    std::printf("flux table: %d rows on [%g, %g] at wB=%g -> %s\n", o.count, o.rlo, o.rhi, o.wb,
                path.c_str());
    std::printf("  max |closed form - numeric| = %.3e\n", worst);
    std::printf("  critical radius r* = %.12f\n", critical_radius());

    ArgvBuilder ab("flux");
    ab.arg("--alpha", o.alpha).arg("--beta", o.beta).arg("--gamma", o.gamma);
    ab.arg("--r-lo", o.rlo).arg("--r-hi", o.rhi).arg("--count", o.count).arg("--wb", o.wb);
    ab.arg("--out", o.out).arg("--meta", o.meta);
    emit_metadata(o.meta, ab, {{"command", "flux"}, {"output", path}});
    return 0;
}

// --------------------------------------------------------------------- probe

struct ProbeOpts {
    double alpha = 5.3, beta = 2.0, gamma = 0.5;
    double x0 = 1.0, delta = 0.05, max_time = 2e5, tol = 1e-6;
    bool bisect = false;
    double lo = 0.5, hi = 2.0, xtol = 1e-3;
    std::string meta = "probe.meta.json";
};

int run_probe(const ProbeOpts& o) {
    const Params ps{o.alpha, o.beta, o.gamma};
    std::vector<std::pair<std::string, std::string>> extra{{"command", "probe"}};
    if (o.bisect) {
        const double xc = separatrix_bisection(ps, o.lo, o.hi, o.delta, o.xtol, o.max_time);
        std::printf("separatrix crossing on [%g, %g] at delta=%g: x0 = %.10f\n", o.lo, o.hi,
                    o.delta, xc);
        std::printf("  critical radius r* = %.10f, ratio %.6f\n", critical_radius(),
                    xc / critical_radius());
        extra.emplace_back("x0_critical", fmt17(xc));
    } else {
        const ProbeResult pr = separatrix_probe(ps, o.x0, o.delta, o.max_time, o.tol);
        std::printf("probe x0=%g delta=%g: %s after t=%.6g\n", o.x0, o.delta,
                    probe_outcome_name(pr.outcome), pr.t_elapsed);
        std::printf("  last state (%.8f, %.8f, %.8f)\n", pr.last_state[0], pr.last_state[1],
                    pr.last_state[2]);
        extra.emplace_back("outcome", probe_outcome_name(pr.outcome));
    }

    ArgvBuilder ab("probe");
    ab.arg("--alpha", o.alpha).arg("--beta", o.beta).arg("--gamma", o.gamma);
    if (o.bisect)
        ab.flag("--bisect", true).arg("--lo", o.lo).arg("--hi", o.hi).arg("--xtol", o.xtol);
    else
        ab.arg("--x0", o.x0);
    ab.arg("--delta", o.delta).arg("--max-time", o.max_time).arg("--tol", o.tol);
    ab.arg("--meta", o.meta);
    emit_metadata(o.meta, ab, extra);
    return 0;
}

// ---------------------------------------------------------------------- seed

struct SeedOpts {
    double alpha = 5.3, beta = 1.8, gamma = 0.5;
    SeedOptions so;
    int ntst = 200, ncol = 4;
    bool no_correct = false;
    std::string out = "problem.json", meta = "seed.meta.json";
};

int run_seed(const SeedOpts& o) {
    const Params ps{o.alpha, o.beta, o.gamma};
    LinSeedInfo info;
    auto lp = make_saddle_connection(ps, o.so, o.ntst, o.ncol, &info);

    // Every recorded forward section crossing of the infinity segment, in
    // ambient coordinates, with its gap to the section state of segment u.
    const Vec3 u0 = info.u.x.front();
    std::printf("segment u: backward crossing %d, section state (%.8f, %.8f, %.8f)\n",
                o.so.crossing_u, u0[0], u0[1], u0[2]);
    std::printf("segment uB crossings (blow-up chart -> ambient), gap to u(0):\n");
    for (size_t i = 0; i < info.uB_crossings.size(); ++i) {
        const Vec3 pB = info.uB_crossings[i];
        const Vec3 pa = blownup_to_original({ChartId::BlownUp, pB}).p;
        const double gap = norm(pa - u0);
        std::printf("  %zu: wB=%.6f -> (%.6f, %.6f, %.6f)  |gap| = %.6f%s\n", i + 1, pB[2], pa[0],
                    pa[1], pa[2], gap, int(i) + 1 == info.crossing_used ? "  [chosen]" : "");
    }
    std::printf("Lin direction Psi = (%.8f, %.8f, %.8f), eta0 = %.8f\n", info.psi[0], info.psi[1],
                info.psi[2], info.eta0);

    if (!o.no_correct) {
        const NewtonResult nr = lp->correct();
        const double res = nr.residual_history.empty() ? 0.0 : nr.residual_history.back();
        if (!nr.converged)
            throw Error(Errc::MaxSteps, "seed correction stalled at |F| = " + fmt17(res));
        std::printf("corrected: |F| = %.3e, eta = %.8f, T0 = %.6f, TB = %.6f\n", res,
                    lp->scalar(lp->iEta()), lp->scalar(lp->iT0()), lp->scalar(lp->iTB()));
    }
    save_lin(out_path(o.out), *lp);
    std::printf("saved problem -> %s\n", out_path(o.out).c_str());

    ArgvBuilder ab("seed");
    ab.arg("--alpha", o.alpha).arg("--beta", o.beta).arg("--gamma", o.gamma);
    ab.arg("--delta0", o.so.delta0).arg("--deltab", o.so.deltaB).arg("--theta0", o.so.theta0);
    ab.arg("--crossing-u", o.so.crossing_u).arg("--crossing-ub", o.so.crossing_uB);
    ab.arg("--ntst", o.ntst).arg("--ncol", o.ncol).arg("--ntstb", o.so.ntstB);
    ab.arg("--max-time", o.so.max_time).arg("--ode-tol", o.so.ode_tol);
    ab.flag("--no-correct", o.no_correct);
    ab.arg("--out", o.out).arg("--meta", o.meta);
    emit_metadata(o.meta, ab, {{"command", "seed"}, {"output", out_path(o.out)}});
    return 0;
}

// ----------------------------------------------------------------- close-gap

struct CloseGapOpts {
    std::string in = "problem.json";
    double lo = 0.0, hi = 0.0;
    double ds0 = 0.05, ds_max = 0.5;
    int max_steps = 400, adapt_every = 0;  // 0 = driver default, -1 = frozen meshes
    std::string out = "solved.json", branch = "gap_branch.csv", events = "gap_events.json";
    std::string meta = "close_gap.meta.json";
};

int run_close_gap(const CloseGapOpts& o) {
    if (!(o.lo < o.hi)) throw Error(Errc::ConfigInvalid, "close-gap needs --lo < --hi");
    auto lp = load_lin(out_path(o.in));
    ContinuationOptions co;
    co.ds0 = o.ds0;
    co.ds_max = o.ds_max;
    co.max_steps = o.max_steps;
    co.adapt_every = o.adapt_every;
    const CloseGapResult res = close_gap(*lp, o.lo, o.hi, co);

    std::vector<std::string> outputs;
    for (size_t i = 0; i < res.branches.size(); ++i) {
        const std::string tag = i == 0 ? "" : "_dir" + std::to_string(i + 1);
        std::string b = out_path(o.branch), e = out_path(o.events);
        b.insert(b.rfind('.'), tag);
        e.insert(e.rfind('.'), tag);
        write_lin_branch_csv(b, res.branches[i], *lp);
        write_events_json(e, res.branches[i], lp->layout());
        outputs.push_back(b);
        outputs.push_back(e);
    }

    ArgvBuilder ab("close-gap");
    ab.arg("--in", o.in).arg("--lo", o.lo).arg("--hi", o.hi);
    ab.arg("--ds0", o.ds0).arg("--ds-max", o.ds_max).arg("--max-steps", o.max_steps);
    ab.arg("--adapt-every", o.adapt_every);
    ab.arg("--out", o.out).arg("--branch-csv", o.branch).arg("--events-json", o.events);
    ab.arg("--meta", o.meta);
    std::vector<std::pair<std::string, std::string>> extra{{"command", "close-gap"}};
    for (const std::string& s : outputs) extra.emplace_back("output", s);
    extra.emplace_back("found", res.found ? "true" : "false");
    if (res.found) extra.emplace_back("param_star", fmt17(res.param_star));
    emit_metadata(o.meta, ab, extra);

    if (!res.found)
        throw Error(Errc::NoZeroInRange,
                    "no eta zero in [" + fmt17(o.lo) + ", " + fmt17(o.hi) + "]");
    save_lin(out_path(o.out), *lp);
    std::printf("eta = 0 at primary = %.10f; problem parked there -> %s\n", res.param_star,
                out_path(o.out).c_str());
    return 0;
}

// -------------------------------------------------------------- continue-het

struct ContinueHetOpts {
    std::string in = "solved.json";
    std::string dir = "both";  // fwd | bwd | both
    double alpha_lo = 4.5, alpha_hi = 6.5;
    double ds0 = 0.02, ds_max = 0.1;
    int max_steps = 2000, adapt_every = 0;
    std::string out = "het.json", branch = "het_branch.csv", events = "het_events.json";
    std::string near;  // "alpha,beta" to report the closest approach
    std::string meta = "continue_het.meta.json";
};

int run_continue_het(const ContinueHetOpts& o) {
    auto solved = load_lin(out_path(o.in));
    std::unique_ptr<LinProblem> het;
    if (solved->iAlpha() >= 0)
        het = std::move(solved);  // already the two-parameter problem
    else
        het = make_het_problem(*solved);

    std::optional<Vec2> near_pt;
    if (!o.near.empty()) {
        double a = 0, b = 0;
        if (std::sscanf(o.near.c_str(), "%lf,%lf", &a, &b) != 2)
            throw Error(Errc::ConfigInvalid, "--near wants \"alpha,beta\"");
        near_pt = Vec2{a, b};
    }

    ContinuationOptions co;
    co.ds0 = o.ds0;
    co.ds_max = o.ds_max;
    co.max_steps = o.max_steps;
    co.adapt_every = o.adapt_every;

    std::vector<double> dirs;
    if (o.dir == "fwd")
        dirs = {+1.0};
    else if (o.dir == "bwd")
        dirs = {-1.0};
    else if (o.dir == "both")
        dirs = {+1.0, -1.0};
    else
        throw Error(Errc::ConfigInvalid, "--dir wants fwd, bwd or both");

    const int ia = het->layout().ix_scalar(het->iAlpha());
    const int ib = het->layout().ix_scalar(het->iBeta());
    std::vector<std::string> outputs;
    for (double d : dirs) {
        const Branch br = continue_het(*het, d, o.alpha_lo, o.alpha_hi, co);
        const std::string tag = dirs.size() == 1 ? "" : (d > 0 ? "_fwd" : "_bwd");
        std::string b = out_path(o.branch), e = out_path(o.events);
        b.insert(b.rfind('.'), tag);
        e.insert(e.rfind('.'), tag);
        write_lin_branch_csv(b, br, *het);
        write_events_json(e, br, het->layout());
        outputs.push_back(b);
        outputs.push_back(e);

        const BranchPoint& last = br.points.back();
        std::printf("direction %+g: %zu points, ended by %s at (alpha, beta) = (%.6f, %.6f)\n", d,
                    br.points.size(), branch_end_name(br.end), last.x[ia], last.x[ib]);
        for (const BranchEvent& ev : br.events)
            if (ev.kind == BranchEvent::Kind::Fold)
                std::printf("  fold in alpha at %.7f (beta = %.6f)\n", ev.refined_param,
                            ev.point.x[ib]);
        if (near_pt) {
            double best = 1e300, ba = 0, bb = 0;
            for (const BranchPoint& p : br.points) {
                const double da = p.x[ia] - (*near_pt)[0], db = p.x[ib] - (*near_pt)[1];
                const double d2 = da * da + db * db;
                if (d2 < best) best = d2, ba = p.x[ia], bb = p.x[ib];
            }
            std::printf("  closest approach to (%.5f, %.5f): %.6f at (%.5f, %.5f)\n", (*near_pt)[0],
                        (*near_pt)[1], std::sqrt(best), ba, bb);
        }
    }
    save_lin(out_path(o.out), *het);

    ArgvBuilder ab("continue-het");
    ab.arg("--in", o.in).arg("--dir", o.dir);
    ab.arg("--alpha-lo", o.alpha_lo).arg("--alpha-hi", o.alpha_hi);
    ab.arg("--ds0", o.ds0).arg("--ds-max", o.ds_max).arg("--max-steps", o.max_steps);
    ab.arg("--adapt-every", o.adapt_every);
    if (!o.near.empty()) ab.arg("--near", o.near);
    ab.arg("--out", o.out).arg("--branch-csv", o.branch).arg("--events-json", o.events);
    ab.arg("--meta", o.meta);
    std::vector<std::pair<std::string, std::string>> extra{{"command", "continue-het"}};
    for (const std::string& s : outputs) extra.emplace_back("output", s);
    emit_metadata(o.meta, ab, extra);
    return 0;
}

// ------------------------------------------------------------------ periodic

struct PeriodicOpts {
    double alpha = 6.2, beta = 1.6, gamma = 0.5;
    double offset = 1e-3;
    int ntst = 200, ncol = 4;
    char cont = 0;  // 'a' or 'b': continue the family after correcting
    double target = 0.0;
    double ds0 = 0.02, ds_max = 0.2;
    int max_steps = 400;
    std::string out = "po.json", meta = "periodic.meta.json";
};

int run_periodic(const PeriodicOpts& o) {
    const Params ps{o.alpha, o.beta, o.gamma};
    double period_guess = 0.0;
    const SampledCurve guess = shadow_loop_guess(ps, o.offset, &period_guess);
    PeriodicOrbit po = correct_periodic(ps, guess, period_guess, o.ntst, o.ncol);
    std::printf("periodic orbit at (alpha, beta) = (%g, %g): period %.10f\n", o.alpha, o.beta,
                po.period);

    if (o.cont == 'a' || o.cont == 'b') {
        const double from = o.cont == 'a' ? o.alpha : o.beta;
        ContinuationOptions co;
        co.ds0 = o.ds0;
        co.ds_max = o.ds_max;
        co.max_steps = o.max_steps;
        const double dir = o.target > from ? +1.0 : -1.0;
        const double lo = std::min(from, o.target), hi = std::max(from, o.target);
        continue_periodic(po, o.cont, dir, lo, hi, co);
        std::printf("continued in %c to (alpha, beta) = (%g, %g): period %.10f\n", o.cont,
                    po.params.alpha, po.params.beta, po.period);
    }
    const FloquetData fl = floquet(po);
    std::printf("multipliers:");
    for (const auto& m : fl.multipliers) std::printf("  %.8f%+.8fi", m.real(), m.imag());
    std::printf("\n  trivial defect %.3e, liouville defect %.3e\n", fl.trivial_defect,
                fl.liouville_defect);
    save_periodic(out_path(o.out), po);
    std::printf("saved orbit -> %s\n", out_path(o.out).c_str());

    ArgvBuilder ab("periodic");
    ab.arg("--alpha", o.alpha).arg("--beta", o.beta).arg("--gamma", o.gamma);
    ab.arg("--offset", o.offset).arg("--ntst", o.ntst).arg("--ncol", o.ncol);
    if (o.cont) {
        ab.arg("--continue", std::string(1, o.cont)).arg("--target", o.target);
        ab.arg("--ds0", o.ds0).arg("--ds-max", o.ds_max).arg("--max-steps", o.max_steps);
    }
    ab.arg("--out", o.out).arg("--meta", o.meta);
    emit_metadata(o.meta, ab, {{"command", "periodic"}, {"output", out_path(o.out)}});
    return 0;
}

// ------------------------------------------------------------------- floquet

struct FloquetOpts {
    std::string in = "po.json";
    bool no_refine = false;
    std::string json, meta = "floquet.meta.json";
};

int run_floquet(const FloquetOpts& o) {
    const PeriodicOrbit po = load_periodic(out_path(o.in));
    const FloquetData fl = floquet(po, !o.no_refine);
    std::printf("orbit at (alpha, beta) = (%g, %g), period %.10f\n", po.params.alpha,
                po.params.beta, po.period);
    for (const auto& m : fl.multipliers)
        std::printf("  mu = %.12f %+.12fi  (|mu| = %.12f)\n", m.real(), m.imag(), std::abs(m));
    std::printf("trivial defect   %.3e\n", fl.trivial_defect);
    std::printf("liouville defect %.3e\n", fl.liouville_defect);
    std::printf("stable multiplier %.12f\n", fl.mu_stable);

    if (!o.json.empty()) {
        nlohmann::json j;
        j["period"] = po.period;
        j["mu_stable"] = fl.mu_stable;
        j["trivial_defect"] = fl.trivial_defect;
        j["liouville_defect"] = fl.liouville_defect;
        for (const auto& m : fl.multipliers)
            j["multipliers"].push_back({m.real(), m.imag()});
        std::FILE* f = std::fopen(out_path(o.json).c_str(), "w");
        if (!f) throw Error(Errc::IoError, "cannot open " + out_path(o.json));
        std::fprintf(f, "%s\n", j.dump(2).c_str());
        std::fclose(f);
    }

    ArgvBuilder ab("floquet");
    ab.arg("--in", o.in).flag("--no-refine", o.no_refine);
    if (!o.json.empty()) ab.arg("--json", o.json);
    ab.arg("--meta", o.meta);
    emit_metadata(o.meta, ab, {{"command", "floquet"}});
    return 0;
}

// ---------------------------------------------------------- connect-periodic

struct ConnectPeriodicOpts {
    std::string in = "po.json";
    SeedOptions so;
    int ntst = 200, ncol = 4;
    double bundle_sign = +1.0;
    double lo = -0.02, hi = 0.02;
    double ds0 = 0.01, ds_max = 0.05;
    int max_steps = 400, adapt_every = 0;
    std::string out = "solved_po.json", branch = "po_gap_branch.csv",
                events = "po_gap_events.json", meta = "connect_periodic.meta.json";
};

int run_connect_periodic(const ConnectPeriodicOpts& o) {
    const PeriodicOrbit po = load_periodic(out_path(o.in));
    const FloquetData fl = floquet(po);
    auto lp = make_periodic_connection(po, fl, o.so, o.ntst, o.ncol, o.bundle_sign);

    ContinuationOptions co;
    co.ds0 = o.ds0;
    co.ds_max = o.ds_max;
    co.max_steps = o.max_steps;
    co.adapt_every = o.adapt_every;
    const CloseGapResult res = close_gap(*lp, o.lo, o.hi, co);

    std::vector<std::string> outputs;
    for (size_t i = 0; i < res.branches.size(); ++i) {
        const std::string tag = i == 0 ? "" : "_dir" + std::to_string(i + 1);
        std::string b = out_path(o.branch), e = out_path(o.events);
        b.insert(b.rfind('.'), tag);
        e.insert(e.rfind('.'), tag);
        write_lin_branch_csv(b, res.branches[i], *lp);
        write_events_json(e, res.branches[i], lp->layout());
        outputs.push_back(b);
        outputs.push_back(e);
    }

    ArgvBuilder ab("connect-periodic");
    ab.arg("--in", o.in);
    ab.arg("--delta0", o.so.delta0).arg("--deltab", o.so.deltaB).arg("--theta0", o.so.theta0);
    ab.arg("--crossing-u", o.so.crossing_u).arg("--crossing-ub", o.so.crossing_uB);
    ab.arg("--ntst", o.ntst).arg("--ncol", o.ncol).arg("--ntstb", o.so.ntstB);
    ab.arg("--max-time", o.so.max_time).arg("--ode-tol", o.so.ode_tol);
    ab.arg("--bundle-sign", o.bundle_sign);
    ab.arg("--lo", o.lo).arg("--hi", o.hi);
    ab.arg("--ds0", o.ds0).arg("--ds-max", o.ds_max).arg("--max-steps", o.max_steps);
    ab.arg("--adapt-every", o.adapt_every);
    ab.arg("--out", o.out).arg("--branch-csv", o.branch).arg("--events-json", o.events);
    ab.arg("--meta", o.meta);
    std::vector<std::pair<std::string, std::string>> extra{{"command", "connect-periodic"}};
    for (const std::string& s : outputs) extra.emplace_back("output", s);
    extra.emplace_back("found", res.found ? "true" : "false");
    if (res.found) extra.emplace_back("delta0_star", fmt17(res.param_star));
    emit_metadata(o.meta, ab, extra);

    if (!res.found)
        throw Error(Errc::NoZeroInRange,
                    "no eta zero in [" + fmt17(o.lo) + ", " + fmt17(o.hi) + "]");
    save_lin(out_path(o.out), *lp);
    std::printf("eta = 0 at delta_0 = %.10f; |eta| = %.3e; saved -> %s\n", res.param_star,
                std::fabs(lp->scalar(lp->iEta())), out_path(o.out).c_str());
    return 0;
}

// -------------------------------------------------------------------- export

struct ExportOpts {
    std::string in = "solved.json";
    std::string orbit = "segments.csv", ambient = "ambient.csv", sphere = "sphere.csv";
    std::string meta = "export.meta.json";
};

int run_export(const ExportOpts& o) {
    // A saved connection problem carries two segments; a saved periodic orbit
    // carries one loop.  Sniff the file by its keys.
    nlohmann::json j;
    {
        std::ifstream f(out_path(o.in));
        if (!f) throw Error(Errc::IoError, "cannot open " + out_path(o.in));
        f >> j;
    }
    std::vector<OrbitSegment> segs;
    if (j.contains("mode")) {
        auto lp = load_lin(out_path(o.in));
        segs.push_back(lp->segment(0));  // cylinder -> section, blow-up chart
        segs.push_back(lp->segment(1));  // section -> saddle, ambient
    } else {
        const PeriodicOrbit po = load_periodic(out_path(o.in));
        OrbitSegment s;
        s.chart = ChartId::Original;
        s.time_scale = po.period;
        const int n = int(po.x.size());
        for (int i = 0; i < n; ++i) {
            s.t.push_back(double(i) / (n - 1));
            s.x.push_back(po.x[i]);
            s.dx.push_back(Vec3{});
        }
        segs.push_back(s);
    }
    write_orbit_csv(out_path(o.orbit), segs);

    // Concatenated path in ambient coordinates and its sphere projection
    // p / (1 + |p|), rows ordered along the flow.
    std::FILE* fa = std::fopen(out_path(o.ambient).c_str(), "w");
    if (!fa) throw Error(Errc::IoError, "cannot open " + out_path(o.ambient));
    std::FILE* fs = std::fopen(out_path(o.sphere).c_str(), "w");
    if (!fs) throw Error(Errc::IoError, "cannot open " + out_path(o.sphere));
    std::fprintf(fa, "segment,t_normalized,x,y,z\n");
    std::fprintf(fs, "segment,t_normalized,px,py,pz\n");
    for (size_t s = 0; s < segs.size(); ++s) {
        for (size_t i = 0; i < segs[s].x.size(); ++i) {
            const ChartPoint q{segs[s].chart, segs[s].x[i]};
            const Vec3 pa =
                segs[s].chart == ChartId::Original ? q.p : blownup_to_original(q).p;
            const Vec3 sp = project_sphere({ChartId::Original, pa});
            std::fprintf(fa, "%zu,%s,%s,%s,%s\n", s, fmt17(segs[s].t[i]).c_str(),
                         fmt17(pa[0]).c_str(), fmt17(pa[1]).c_str(), fmt17(pa[2]).c_str());
            std::fprintf(fs, "%zu,%s,%s,%s,%s\n", s, fmt17(segs[s].t[i]).c_str(),
                         fmt17(sp[0]).c_str(), fmt17(sp[1]).c_str(), fmt17(sp[2]).c_str());
        }
    }
    std::fclose(fa);
    std::fclose(fs);
    std::printf("exported %zu segment(s) -> %s, %s, %s\n", segs.size(), out_path(o.orbit).c_str(),
                out_path(o.ambient).c_str(), out_path(o.sphere).c_str());

    ArgvBuilder ab("export");
    ab.arg("--in", o.in).arg("--orbit-csv", o.orbit).arg("--ambient-csv", o.ambient);
    ab.arg("--sphere-csv", o.sphere).arg("--meta", o.meta);
    emit_metadata(o.meta, ab,
                  {{"command", "export"},
                   {"output", out_path(o.orbit)},
                   {"output", out_path(o.ambient)},
                   {"output", out_path(o.sphere)}});
    return 0;
}

void add_seed_options(CLI::App* c, SeedOptions& so) {
    c->add_option("--delta0", so.delta0,
                  "signed offset along the stable direction; the sign picks the branch")
        ->capture_default_str();
    c->add_option("--deltab", so.deltaB, "cylinder height delta_B")->capture_default_str();
    c->add_option("--theta0", so.theta0, "initial cylinder angle")->capture_default_str();
    c->add_option("--crossing-u", so.crossing_u, "backward section crossing ending segment u")
        ->capture_default_str();
    c->add_option("--crossing-ub", so.crossing_uB,
                  "forward crossing ending segment uB; 0 picks the nearest gap")
        ->capture_default_str();
    c->add_option("--ntstb", so.ntstB, "uB mesh intervals; 0 sizes them from the flight time")
        ->capture_default_str();
    c->add_option("--max-time", so.max_time, "seeding integration budget")->capture_default_str();
    c->add_option("--ode-tol", so.ode_tol, "seeding integrator tolerance")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heteroclinic connections from infinity in a quadratic vector field"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read option defaults from a TOML file; flags win");
    app.set_version_flag("--version", kVersion);
    std::string output_dir;
    app.add_option("--output-dir", output_dir,
                   "directory for relative output paths; overrides HETINF_OUTPUT_DIR");

    EquilibriaOpts eq;
    auto* c_eq = app.add_subcommand("equilibria", "saddle data at the origin, critical cylinder");
    c_eq->add_option("--alpha", eq.alpha)->required();
    c_eq->add_option("--beta", eq.beta)->required();
    c_eq->add_option("--gamma", eq.gamma)->capture_default_str();
    c_eq->add_option("--json", eq.json, "also write the data as JSON");
    c_eq->add_option("--meta", eq.meta)->capture_default_str();

    FluxOpts fx;
    auto* c_fx = app.add_subcommand("flux", "averaged radial flux table across the cylinder");
    c_fx->add_option("--alpha", fx.alpha)->capture_default_str();
    c_fx->add_option("--beta", fx.beta)->capture_default_str();
    c_fx->add_option("--gamma", fx.gamma)->capture_default_str();
    c_fx->add_option("--r-lo", fx.rlo)->capture_default_str();
    c_fx->add_option("--r-hi", fx.rhi)->capture_default_str();
    c_fx->add_option("--count", fx.count, "table rows")->capture_default_str();
    c_fx->add_option("--wb", fx.wb, "cylinder height for the numeric column")
        ->capture_default_str();
    c_fx->add_option("--out", fx.out)->capture_default_str();
    c_fx->add_option("--meta", fx.meta)->capture_default_str();

    ProbeOpts pb;
    auto* c_pb = app.add_subcommand("probe", "backward separatrix probe in the blow-up chart");
    c_pb->add_option("--alpha", pb.alpha)->capture_default_str();
    c_pb->add_option("--beta", pb.beta)->capture_default_str();
    c_pb->add_option("--gamma", pb.gamma)->capture_default_str();
    c_pb->add_option("--x0", pb.x0, "initial xB on the slice (x0, -alpha, delta)")
        ->capture_default_str();
    c_pb->add_option("--delta", pb.delta, "slice height wB")->capture_default_str();
    c_pb->add_option("--max-time", pb.max_time)->capture_default_str();
    c_pb->add_option("--tol", pb.tol)->capture_default_str();
    c_pb->add_flag("--bisect", pb.bisect, "bisect [--lo, --hi] on the probe outcome");
    c_pb->add_option("--lo", pb.lo)->capture_default_str();
    c_pb->add_option("--hi", pb.hi)->capture_default_str();
    c_pb->add_option("--xtol", pb.xtol)->capture_default_str();
    c_pb->add_option("--meta", pb.meta)->capture_default_str();

    SeedOpts sd;
    auto* c_sd = app.add_subcommand("seed", "assemble the two-segment connection problem");
    c_sd->add_option("--alpha", sd.alpha)->required();
    c_sd->add_option("--beta", sd.beta)->required();
    c_sd->add_option("--gamma", sd.gamma)->capture_default_str();
    add_seed_options(c_sd, sd.so);
    c_sd->add_option("--ntst", sd.ntst, "mesh intervals of segment u")->capture_default_str();
    c_sd->add_option("--ncol", sd.ncol, "collocation points per interval")->capture_default_str();
    c_sd->add_flag("--no-correct", sd.no_correct, "save the raw seed without Newton");
    c_sd->add_option("--out", sd.out)->capture_default_str();
    c_sd->add_option("--meta", sd.meta)->capture_default_str();

    CloseGapOpts cg;
    auto* c_cg = app.add_subcommand("close-gap", "continue in the primary scalar until eta = 0");
    c_cg->add_option("--in", cg.in)->capture_default_str();
    c_cg->add_option("--lo", cg.lo)->required();
    c_cg->add_option("--hi", cg.hi)->required();
    c_cg->add_option("--ds0", cg.ds0)->capture_default_str();
    c_cg->add_option("--ds-max", cg.ds_max)->capture_default_str();
    c_cg->add_option("--max-steps", cg.max_steps)->capture_default_str();
    c_cg->add_option("--adapt-every", cg.adapt_every,
                     "accepted points between mesh redistributions; 0 driver default, -1 frozen")
        ->capture_default_str();
    c_cg->add_option("--out", cg.out)->capture_default_str();
    c_cg->add_option("--branch-csv", cg.branch)->capture_default_str();
    c_cg->add_option("--events-json", cg.events)->capture_default_str();
    c_cg->add_option("--meta", cg.meta)->capture_default_str();

    ContinueHetOpts ch;
    auto* c_ch = app.add_subcommand("continue-het",
                                    "trace the two-parameter connection curve from infinity");
    c_ch->add_option("--in", ch.in)->capture_default_str();
    c_ch->add_option("--dir", ch.dir, "fwd, bwd or both")->capture_default_str();
    c_ch->add_option("--alpha-lo", ch.alpha_lo)->capture_default_str();
    c_ch->add_option("--alpha-hi", ch.alpha_hi)->capture_default_str();
    c_ch->add_option("--ds0", ch.ds0)->capture_default_str();
    c_ch->add_option("--ds-max", ch.ds_max)->capture_default_str();
    c_ch->add_option("--max-steps", ch.max_steps)->capture_default_str();
    c_ch->add_option("--adapt-every", ch.adapt_every,
                     "accepted points between mesh redistributions; 0 driver default, -1 frozen")
        ->capture_default_str();
    c_ch->add_option("--near", ch.near, "report the closest approach to \"alpha,beta\"");
    c_ch->add_option("--out", ch.out)->capture_default_str();
    c_ch->add_option("--branch-csv", ch.branch)->capture_default_str();
    c_ch->add_option("--events-json", ch.events)->capture_default_str();
    c_ch->add_option("--meta", ch.meta)->capture_default_str();

    PeriodicOpts po;
    auto* c_po = app.add_subcommand("periodic", "correct a near-saddle loop into a periodic orbit");
    c_po->add_option("--alpha", po.alpha)->required();
    c_po->add_option("--beta", po.beta)->required();
    c_po->add_option("--gamma", po.gamma)->capture_default_str();
    c_po->add_option("--offset", po.offset, "loop seed offset along e_s")->capture_default_str();
    c_po->add_option("--ntst", po.ntst)->capture_default_str();
    c_po->add_option("--ncol", po.ncol)->capture_default_str();
    std::string cont_str;
    c_po->add_option("--continue", cont_str, "continue the family in a(lpha) or b(eta)");
    c_po->add_option("--target", po.target, "parameter value to continue to")
        ->capture_default_str();
    c_po->add_option("--ds0", po.ds0)->capture_default_str();
    c_po->add_option("--ds-max", po.ds_max)->capture_default_str();
    c_po->add_option("--max-steps", po.max_steps)->capture_default_str();
    c_po->add_option("--out", po.out)->capture_default_str();
    c_po->add_option("--meta", po.meta)->capture_default_str();

    FloquetOpts fq;
    auto* c_fq = app.add_subcommand("floquet", "multipliers and stable bundle of a saved orbit");
    c_fq->add_option("--in", fq.in)->capture_default_str();
    c_fq->add_flag("--no-refine", fq.no_refine, "skip the bundle boundary value problem");
    c_fq->add_option("--json", fq.json, "also write the data as JSON");
    c_fq->add_option("--meta", fq.meta)->capture_default_str();

    ConnectPeriodicOpts cp;
    auto* c_cp = app.add_subcommand("connect-periodic",
                                    "connection from infinity to a saddle periodic orbit");
    c_cp->add_option("--in", cp.in, "saved periodic orbit")->capture_default_str();
    add_seed_options(c_cp, cp.so);
    c_cp->add_option("--ntst", cp.ntst)->capture_default_str();
    c_cp->add_option("--ncol", cp.ncol)->capture_default_str();
    c_cp->add_option("--bundle-sign", cp.bundle_sign, "side of the stable bundle to land on")
        ->capture_default_str();
    c_cp->add_option("--lo", cp.lo, "delta_0 window")->capture_default_str();
    c_cp->add_option("--hi", cp.hi)->capture_default_str();
    c_cp->add_option("--ds0", cp.ds0)->capture_default_str();
    c_cp->add_option("--ds-max", cp.ds_max)->capture_default_str();
    c_cp->add_option("--max-steps", cp.max_steps)->capture_default_str();
    c_cp->add_option("--adapt-every", cp.adapt_every)->capture_default_str();
    c_cp->add_option("--out", cp.out)->capture_default_str();
    c_cp->add_option("--branch-csv", cp.branch)->capture_default_str();
    c_cp->add_option("--events-json", cp.events)->capture_default_str();
    c_cp->add_option("--meta", cp.meta)->capture_default_str();

    ExportOpts ex;
    auto* c_ex = app.add_subcommand("export", "orbit tables from a saved problem or orbit");
    c_ex->add_option("--in", ex.in, "saved connection problem or periodic orbit")
        ->capture_default_str();
    c_ex->add_option("--orbit-csv", ex.orbit, "per-segment table in native charts")
        ->capture_default_str();
    c_ex->add_option("--ambient-csv", ex.ambient, "concatenated path in ambient coordinates")
        ->capture_default_str();
    c_ex->add_option("--sphere-csv", ex.sphere, "projection p / (1 + |p|)")
        ->capture_default_str();
    c_ex->add_option("--meta", ex.meta)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (!output_dir.empty())
            g_output_dir = output_dir;
        else if (const char* env = std::getenv("HETINF_OUTPUT_DIR"); env && *env)
            g_output_dir = env;
        if (!g_output_dir.empty()) std::filesystem::create_directories(g_output_dir);

        if (c_po->parsed() && !cont_str.empty()) {
            if (cont_str != "a" && cont_str != "b")
                throw Error(Errc::ConfigInvalid, "--continue wants a or b");
            if (c_po->count("--target") == 0)
                throw Error(Errc::ConfigInvalid, "--continue needs --target");
            po.cont = cont_str[0];
        }

        if (c_eq->parsed()) return run_equilibria(eq);
        if (c_fx->parsed()) return run_flux(fx);
        if (c_pb->parsed()) return run_probe(pb);
        if (c_sd->parsed()) return run_seed(sd);
        if (c_cg->parsed()) return run_close_gap(cg);
        if (c_ch->parsed()) return run_continue_het(ch);
        if (c_po->parsed()) return run_periodic(po);
        if (c_fq->parsed()) return run_floquet(fq);
        if (c_cp->parsed()) return run_connect_periodic(cp);
        if (c_ex->parsed()) return run_export(ex);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
