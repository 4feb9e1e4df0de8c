#include "hetinf/lins.hpp"

#include <algorithm>
#include <cmath>

#include "hetinf/charts.hpp"
#include "hetinf/fields.hpp"
#include "hetinf/infinity.hpp"
#include "hetinf/ode.hpp"

namespace hetinf {

const char* lin_mode_name(LinMode m) {
    switch (m) {
        case LinMode::GapInBeta: return "gap_in_beta";
        case LinMode::HetInfinity: return "het_infinity";
        case LinMode::PeriodicGap: return "periodic_gap";
    }
    return "?";
}

namespace {

struct RawPath {
    std::vector<double> t;
    std::vector<Vec3> y;
    std::vector<Vec3> dy;
};

void append_path(RawPath& full, const OdeResult& r, bool skip_first) {
    for (size_t i = skip_first ? 1 : 0; i < r.t.size(); ++i) {
        full.t.push_back(r.t[i]);
        full.y.push_back(r.y[i]);
        full.dy.push_back(r.dy[i]);
    }
}

OdeResult as_ode_result(RawPath&& p) {
    OdeResult r;
    r.t = std::move(p.t);
    r.y = std::move(p.y);
    r.dy = std::move(p.dy);
    return r;
}

Vec3 glue_point(const Vec3& b) { return blownup_to_original({ChartId::BlownUp, b}).p; }

std::vector<double> pack_lin(int nfB, int nf0, const std::vector<Vec3>& fineB,
                             const std::vector<Vec3>& fine0, const std::array<double, 5>& sc) {
    const int lenB = 3 * (nfB + 1);
    const int len0 = 3 * (nf0 + 1);
    std::vector<double> x(lenB + len0 + 5);
    for (int g = 0; g <= nfB; ++g)
        for (int c = 0; c < 3; ++c) x[3 * g + c] = fineB[g][c];
    for (int g = 0; g <= nf0; ++g)
        for (int c = 0; c < 3; ++c) x[lenB + 3 * g + c] = fine0[g][c];
    for (int k = 0; k < 5; ++k) x[lenB + len0 + k] = sc[k];
    return x;
}

}  // namespace

OrbitSegment seed_backward_to_section(const Params& ps, const Vec3& u_end, int crossing_index,
                                      const SeedOptions& opts) {
    if (crossing_index < 1)
        throw Error(Errc::ConfigInvalid, "seed_backward_to_section: crossing index must be >= 1");
    const OdeRhs f = [&ps](double, const Vec3& q) { return rhs_original(q, ps); };
    OdeOptions oo;
    oo.tol = opts.ode_tol;
    std::vector<EventSpec> ev(1);
    ev[0].g = [](double, const Vec3& q) { return q[0]; };
    ev[0].direction = 0;
    ev[0].terminal = true;

    RawPath full;
    Vec3 q = u_end;
    double t = 0.0;
    int found = 0;
    while (found < crossing_index) {
        if (found > 0) {  // step off the section before rearming the event
            const OdeResult rn = integrate(f, q, t, t - 1e-3, oo);
            append_path(full, rn, true);
            q = rn.y_end;
            t = rn.t_end;
        }
        const double budget = opts.max_time + t;
        if (budget <= 0.0)
            throw Error(Errc::NotEnoughCrossings,
                        "seed_backward_to_section: " + std::to_string(found) + " of " +
                            std::to_string(crossing_index) + " crossings within the time budget");
        OdeResult r;
        try {
            r = integrate(f, q, t, t - budget, oo, ev);
        } catch (const Error& e) {
            if (e.code() == Errc::StepUnderflow || e.code() == Errc::MaxSteps)
                throw Error(Errc::NotEnoughCrossings,
                            "seed_backward_to_section: escape after " + std::to_string(found) +
                                " of " + std::to_string(crossing_index) + " crossings");
            throw;
        }
        if (!r.terminated_by_event)
            throw Error(Errc::NotEnoughCrossings,
                        "seed_backward_to_section: " + std::to_string(found) + " of " +
                            std::to_string(crossing_index) + " crossings within the time budget");
        append_path(full, r, found > 0);
        q = r.y_end;
        t = r.t_end;
        ++found;
    }
    return orbit_from_ode(ChartId::Original, as_ode_result(std::move(full)), t, 0.0);
}

InfinitySeed seed_infinity_segment(const Params& ps, const SeedOptions& opts, int max_crossings) {
    if (max_crossings < 1)
        throw Error(Errc::ConfigInvalid, "seed_infinity_segment: need at least one crossing");
    const OdeRhs f = [&ps](double, const Vec3& q) { return rhs_blownup(q, ps); };
    OdeOptions oo;
    oo.tol = opts.ode_tol;
    std::vector<EventSpec> ev(1);
    ev[0].g = [](double, const Vec3& q) { return q[0]; };
    ev[0].direction = 0;
    ev[0].terminal = true;

    InfinitySeed out;
    RawPath full;
    Vec3 q = cylinder_point(opts.theta0, opts.deltaB, ps);
    double t = 0.0;
    while (static_cast<int>(out.cross_t.size()) < max_crossings) {
        if (!out.cross_t.empty()) {
            const OdeResult rn = integrate(f, q, t, t + 1e-3, oo);
            append_path(full, rn, true);
            q = rn.y_end;
            t = rn.t_end;
        }
        const double budget = opts.max_time - t;
        if (budget <= 0.0) break;
        OdeResult r;
        try {
            r = integrate(f, q, t, t + budget, oo, ev);
        } catch (const Error& e) {
            if (e.code() == Errc::StepUnderflow || e.code() == Errc::MaxSteps) break;
            throw;
        }
        if (!r.terminated_by_event) break;
        append_path(full, r, !out.cross_t.empty());
        q = r.y_end;
        t = r.t_end;
        out.cross_t.push_back(t);
        out.cross_x.push_back(q);
    }
    if (out.cross_t.empty())
        throw Error(Errc::NotEnoughCrossings,
                    "seed_infinity_segment: no section crossing leaving the cylinder");
    // drop any path tail beyond the last crossing
    while (!full.t.empty() && full.t.back() > out.cross_t.back()) {
        full.t.pop_back();
        full.y.pop_back();
        full.dy.pop_back();
    }
    out.orbit =
        orbit_from_ode(ChartId::BlownUp, as_ode_result(std::move(full)), 0.0, out.cross_t.back());
    return out;
}

namespace {

// restrict an infinity seed to its k-th crossing (1-based)
OrbitSegment truncate_infinity(const InfinitySeed& seed, int k, const Params& ps) {
    const double tc = seed.cross_t[k - 1];
    const double TS = seed.orbit.time_scale;
    OrbitSegment out;
    out.chart = seed.orbit.chart;
    out.time_scale = tc;
    for (size_t i = 0; i < seed.orbit.t.size(); ++i) {
        const double tp = seed.orbit.t[i] * TS;
        if (tp >= tc - 1e-12 * std::max(TS, 1.0)) break;
        out.t.push_back(tp / tc);
        out.x.push_back(seed.orbit.x[i]);
        out.dx.push_back((tc / TS) * seed.orbit.dx[i]);
    }
    out.t.push_back(1.0);
    out.x.push_back(seed.cross_x[k - 1]);
    out.dx.push_back(tc * rhs_blownup(seed.cross_x[k - 1], ps));
    out.t.front() = 0.0;
    return out;
}

}  // namespace

LinProblem::LinProblem(const LinSetup& setup, std::vector<double> x)
    : setup_(setup), x_(std::move(x)) {
    if (setup_.ntst < 1 || setup_.ncol < 2)
        throw Error(Errc::ConfigInvalid, "LinProblem: bad mesh sizes");
    if (setup_.ntstB < 1) setup_.ntstB = setup_.ntst;
    build();
    lay_ = layout_of(prob_);
    if (static_cast<int>(x_.size()) != lay_.n_total)
        throw Error(Errc::ConfigInvalid, "LinProblem: unknown vector has wrong length");
}

int LinProblem::primary() const {
    switch (setup_.mode) {
        case LinMode::GapInBeta: return iBeta();
        case LinMode::HetInfinity: return iAlpha();
        case LinMode::PeriodicGap: return iDelta0();
    }
    return -1;
}

Params LinProblem::params_at(const std::vector<double>& p) const {
    Params ps = setup_.params;
    if (iAlpha() >= 0) ps.alpha = p[iAlpha()];
    if (iBeta() >= 0) ps.beta = p[iBeta()];
    return ps;
}

Params LinProblem::current_params() const {
    const std::vector<double> p(x_.begin() + lay_.p_off, x_.end());
    return params_at(p);
}

Vec3 LinProblem::stable_direction(const std::vector<double>& p) const {
    Vec3 e = saddle_at_origin(params_at(p)).e_s;
    if (dot(e, es_ref_) < 0.0) e = -e;
    return e;
}

LinSetup LinProblem::snapshot() const {
    LinSetup s = setup_;
    s.es_ref = es_ref_;
    return s;
}

NewtonResult LinProblem::correct(const NewtonOptions& opt) {
    return pinned_correct(prob_, lay_, x_, primary(), scalar(primary()), opt);
}

void LinProblem::set_mesh_times(const std::vector<double>& tmB, const std::vector<double>& tm0) {
    if (static_cast<int>(tmB.size()) != setup_.ntstB + 1 ||
        static_cast<int>(tm0.size()) != setup_.ntst + 1)
        throw Error(Errc::ConfigInvalid, "set_mesh_times: breakpoint counts do not match");
    prob_.segs[0].mesh.tm = tmB;
    prob_.segs[1].mesh.tm = tm0;
}

OrbitSegment LinProblem::segment(int which) const {
    const Mesh& mesh = prob_.segs[which].mesh;  // breakpoints may have moved
    const ChartId chart = which == 0 ? ChartId::BlownUp : ChartId::Original;
    const double T = scalar(which == 0 ? iTB() : iT0());
    const Params ps = current_params();
    OrbitSegment seg;
    seg.chart = chart;
    seg.time_scale = T;
    const int nf = mesh.nfine();
    seg.t.resize(nf + 1);
    seg.x.resize(nf + 1);
    seg.dx.resize(nf + 1);
    for (int g = 0; g <= nf; ++g) {
        seg.t[g] = mesh.tfine(g);
        const int o = lay_.ix_node(which, g, 0);
        seg.x[g] = {x_[o], x_[o + 1], x_[o + 2]};
        seg.dx[g] = T * rhs_of(chart, seg.x[g], ps);
    }
    return seg;
}

void LinProblem::build() {
    meshB_ = make_mesh(setup_.ntstB, setup_.ncol);
    mesh0_ = make_mesh(setup_.ntst, setup_.ncol);
    es_ref_ = setup_.es_ref;

    const auto ident = [](const Vec3&, const std::vector<double>&) {
        return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    };

    {  // segment 0: uB in the blow-up chart, anchored on the critical cylinder
        SegmentSpec s;
        s.chart = ChartId::BlownUp;
        s.mesh = meshB_;
        s.dyn.t_scalar = iTB();
        s.dyn.f = [this](double, const Vec3& u, const std::vector<double>& p) {
            return rhs_blownup(u, params_at(p));
        };
        s.dyn.dfdx = [this](double, const Vec3& u, const std::vector<double>& p) {
            return jac_blownup(u, params_at(p));
        };
        s.dyn.dfdp = [this](int k, double, const Vec3& u, const std::vector<double>& p) {
            if (k == iAlpha()) return dalpha_of(ChartId::BlownUp, u, params_at(p));
            if (k == iBeta()) return dbeta_of(ChartId::BlownUp, u, params_at(p));
            return Vec3{0, 0, 0};
        };
        s.anchor.side = AnchorSide::Left;
        s.anchor.g = [this](const Vec3& v, const std::vector<double>& p) {
            return v - cylinder_point(p[iTheta()], setup_.deltaB, params_at(p));
        };
        s.anchor.dg_dx = ident;
        s.anchor.dg_dp = [this](const Vec3&, const std::vector<double>& p, Matrix& out) {
            const double r = critical_radius(), th = p[iTheta()];
            out(0, iTheta()) = r * std::sin(th);
            out(1, iTheta()) = -2.0 * r * std::cos(th);
            if (iAlpha() >= 0) out(1, iAlpha()) = 1.0;
        };
        prob_.segs.push_back(std::move(s));
    }

    {  // segment 1: u in the ambient chart, anchored near the finite target
        SegmentSpec s;
        s.chart = ChartId::Original;
        s.mesh = mesh0_;
        s.dyn.t_scalar = iT0();
        s.dyn.f = [this](double, const Vec3& u, const std::vector<double>& p) {
            return rhs_original(u, params_at(p));
        };
        s.dyn.dfdx = [this](double, const Vec3& u, const std::vector<double>& p) {
            return jac_original(u, params_at(p));
        };
        s.dyn.dfdp = [this](int k, double, const Vec3& u, const std::vector<double>& p) {
            if (k == iAlpha()) return dalpha_of(ChartId::Original, u, params_at(p));
            if (k == iBeta()) return dbeta_of(ChartId::Original, u, params_at(p));
            return Vec3{0, 0, 0};
        };
        s.anchor.side = AnchorSide::Right;
        s.anchor.dg_dx = ident;
        if (setup_.mode == LinMode::PeriodicGap) {
            s.anchor.g = [this](const Vec3& v, const std::vector<double>& p) {
                return v - (setup_.pbase + p[iDelta0()] * setup_.efloquet);
            };
            s.anchor.dg_dp = [this](const Vec3&, const std::vector<double>&, Matrix& out) {
                for (int r = 0; r < 3; ++r) out(r, iDelta0()) = -setup_.efloquet[r];
            };
        } else {
            s.anchor.g = [this](const Vec3& v, const std::vector<double>& p) {
                return v - setup_.delta0 * stable_direction(p);
            };
            // dg_dp: eigenvector sensitivity, left to finite differences
        }
        prob_.segs.push_back(std::move(s));
    }

    prob_.n_scalars = 5;
    switch (setup_.mode) {
        case LinMode::GapInBeta:
            prob_.scalar_names = {"T0", "TB", "theta_B", "eta", "beta"};
            break;
        case LinMode::HetInfinity:
            prob_.scalar_names = {"T0", "TB", "theta_B", "alpha", "beta"};
            break;
        case LinMode::PeriodicGap:
            prob_.scalar_names = {"T0", "TB", "theta_B", "eta", "delta_0"};
            break;
    }

    const int nfB = meshB_.nfine();
    for (int c = 0; c < 3; ++c) {  // Lin rows through the glue map
        BorderRowDef row;
        row.r = [this, c, nfB](const BvpView& v) {
            const Vec3 gl = glue_point(v.node(0, nfB));
            const double eta = iEta() >= 0 ? v.scalar(iEta()) : 0.0;
            return gl[c] - v.left(1)[c] - eta * setup_.psi[c];
        };
        row.grad = [this, c, nfB](const BvpView& v, double* g) {
            const Mat3 J = glue_jacobian(v.node(0, nfB));
            for (int m = 0; m < 3; ++m) g[v.layout().ix_node(0, nfB, m)] += J[c][m];
            g[v.layout().ix_node(1, 0, c)] -= 1.0;
            if (iEta() >= 0) g[v.layout().ix_scalar(iEta())] -= setup_.psi[c];
        };
        prob_.rows.push_back(std::move(row));
    }
    {  // section row: u(0) on {x = 0}
        BorderRowDef row;
        row.r = [](const BvpView& v) { return v.left(1)[0]; };
        row.grad = [](const BvpView& v, double* g) { g[v.layout().ix_node(1, 0, 0)] += 1.0; };
        prob_.rows.push_back(std::move(row));
    }

    prob_.on_accept = [this](const std::vector<double>& x) {
        if (setup_.mode == LinMode::PeriodicGap) return;
        const std::vector<double> p(x.begin() + lay_.p_off, x.end());
        try {
            es_ref_ = stable_direction(p);
        } catch (const Error&) {
            // keep the previous reference if the spectrum degenerates
        }
    };
}

namespace {

std::unique_ptr<LinProblem> build_connection(const Params& ps, const SeedOptions& opts, int ntst,
                                             int ncol, LinMode mode, const Vec3& u_end,
                                             const Vec3& es_ref, const Vec3& pbase,
                                             const Vec3& efloquet, LinSeedInfo* info) {
    const OrbitSegment u = seed_backward_to_section(ps, u_end, opts.crossing_u, opts);
    const Vec3 u0 = u.x.front();

    // record crossings until escape or budget unless a specific one is asked for
    const int want = opts.crossing_uB > 0 ? opts.crossing_uB : 2000;
    const InfinitySeed inf = seed_infinity_segment(ps, opts, want);
    int pick = std::max(0, opts.crossing_uB);
    if (pick > static_cast<int>(inf.cross_x.size()))
        throw Error(Errc::NotEnoughCrossings,
                    "only " + std::to_string(inf.cross_x.size()) + " section crossings found, " +
                        std::to_string(pick) + " requested");
    if (pick <= 0) {
        double best = 0.0;
        for (size_t k = 0; k < inf.cross_x.size(); ++k) {
            const double d = norm(glue_point(inf.cross_x[k]) - u0);
            if (pick == 0 || d < best) {
                best = d;
                pick = static_cast<int>(k) + 1;
            }
        }
    }
    const OrbitSegment uB = truncate_infinity(inf, pick, ps);

    const Vec3 gap = u0 - glue_point(uB.x.back());
    const double eta0 = norm(gap);
    // a zero gap cannot be normalized; any section direction transverse to
    // the section tangents does, and the y axis always is
    const Vec3 psi = eta0 > 0.0 ? (1.0 / eta0) * gap : Vec3{0.0, 1.0, 0.0};

    LinSetup st;
    st.mode = mode;
    st.params = ps;
    st.ntst = ntst;
    st.ncol = ncol;
    // a winding of uB around the cylinder takes pi time units; resolve each
    // with at least 12 intervals
    st.ntstB = opts.ntstB > 0
                   ? opts.ntstB
                   : std::max(ntst, static_cast<int>(std::ceil(12.0 * uB.time_scale / M_PI)));
    st.delta0 = opts.delta0;
    st.deltaB = opts.deltaB;
    st.psi = psi;
    st.eta0 = eta0;
    st.es_ref = es_ref;
    st.pbase = pbase;
    st.efloquet = efloquet;

    const std::vector<Vec3> fineB = discretize(curve_of(uB), make_mesh(st.ntstB, ncol));
    const std::vector<Vec3> fine0 = discretize(curve_of(u), make_mesh(ntst, ncol));
    const double free5 = mode == LinMode::PeriodicGap ? opts.delta0 : ps.beta;
    std::vector<double> x =
        pack_lin(st.ntstB * ncol, ntst * ncol, fineB, fine0,
                 {u.time_scale, uB.time_scale, opts.theta0, -eta0, free5});

    if (info) {
        info->u = u;
        info->uB = uB;
        info->uB_crossings = inf.cross_x;
        info->crossing_used = pick;
        info->psi = psi;
        info->eta0 = eta0;
    }
    return std::make_unique<LinProblem>(st, std::move(x));
}

}  // namespace

std::unique_ptr<LinProblem> make_saddle_connection(const Params& ps, const SeedOptions& opts,
                                                   int ntst, int ncol, LinSeedInfo* info) {
    const SaddleData sd = saddle_at_origin(ps);
    const Vec3 u_end = opts.delta0 * sd.e_s;
    return build_connection(ps, opts, ntst, ncol, LinMode::GapInBeta, u_end, sd.e_s, Vec3{},
                            Vec3{}, info);
}

std::unique_ptr<LinProblem> make_het_problem(const LinProblem& solved) {
    const LinSetup s0 = solved.snapshot();
    if (s0.mode != LinMode::GapInBeta)
        throw Error(Errc::ConfigInvalid, "make_het_problem expects a gap problem");
    const double eta = solved.scalar(solved.iEta());
    if (std::fabs(eta) > 1e-6)
        throw Error(Errc::ConfigInvalid,
                    "make_het_problem: gap " + std::to_string(eta) + " has not been closed");
    LinSetup s = s0;
    s.mode = LinMode::HetInfinity;
    s.params.beta = solved.scalar(solved.iBeta());
    std::vector<double> x = solved.unknowns();
    const BvpLayout& lay = solved.layout();
    x[lay.ix_scalar(3)] = s.params.alpha;
    x[lay.ix_scalar(4)] = s.params.beta;
    auto het = std::make_unique<LinProblem>(s, std::move(x));
    het->set_mesh_times(solved.problem().segs[0].mesh.tm, solved.problem().segs[1].mesh.tm);
    return het;
}

std::unique_ptr<LinProblem> make_periodic_connection(const PeriodicOrbit& po, const FloquetData& fl,
                                                     const SeedOptions& opts, int ntst, int ncol,
                                                     double bundle_sign, LinSeedInfo* info) {
    if (fl.bundle.empty())
        throw Error(Errc::ConfigInvalid, "make_periodic_connection: Floquet bundle missing");
    const Vec3 base = po.x.front();
    Vec3 eF = fl.bundle.front();
    eF = (bundle_sign / norm(eF)) * eF;
    const Vec3 u_end = base + opts.delta0 * eF;
    return build_connection(po.params, opts, ntst, ncol, LinMode::PeriodicGap, u_end, Vec3{},
                            base, eF, info);
}

CloseGapResult close_gap(LinProblem& lp, double lo, double hi, const ContinuationOptions& base) {
    if (lp.iEta() < 0)
        throw Error(Errc::ConfigInvalid, "close_gap needs a mode with a gap scalar");
    CloseGapResult out;
    const std::vector<double> x_orig = lp.unknowns();
    const std::vector<double> tm_orig[2] = {lp.problem().segs[0].mesh.tm,
                                            lp.problem().segs[1].mesh.tm};
    const int prim = lp.primary();
    const int ie = lp.iEta();

    ContinuationOptions o = base;
    if (o.adapt_every == 0) o.adapt_every = 4;  // -1 keeps the meshes fixed
    o.monitors = {[ie](const BvpView& v) { return v.scalar(ie); }};
    o.stop_zero_monitor = 0;
    o.fold_scalar = prim;
    o.stop = [prim, lo, hi](const BvpView& v) {
        const double p = v.scalar(prim);
        return p < lo || p > hi;
    };

    for (const double dir : {1.0, -1.0}) {
        // x_orig lives on the seed meshes; put them back before each pass
        lp.set_mesh_times(tm_orig[0], tm_orig[1]);
        Branch br = continue_branch(lp.problem(), x_orig, prim, dir, o);
        out.branches.push_back(std::move(br));
        const Branch& b = out.branches.back();
        if (b.end == BranchEnd::ZeroTarget) {
            out.found = true;
            out.param_star = b.points.back().x[lp.layout().ix_scalar(prim)];
            lp.unknowns() = b.points.back().x;
            break;
        }
    }
    if (!out.found) {
        lp.set_mesh_times(tm_orig[0], tm_orig[1]);
        lp.unknowns() = x_orig;
    }
    return out;
}

Branch continue_het(LinProblem& het, double direction, double alpha_lo, double alpha_hi,
                    const ContinuationOptions& base) {
    if (het.iAlpha() < 0)
        throw Error(Errc::ConfigInvalid, "continue_het needs the two-parameter mode");
    const int ia = het.iAlpha(), ib = het.iBeta();
    ContinuationOptions o = base;
    if (o.adapt_every == 0) o.adapt_every = 4;  // -1 keeps the meshes fixed
    o.fold_scalar = ia;
    o.stop = [ia, ib, alpha_lo, alpha_hi](const BvpView& v) {
        const double a = v.scalar(ia), b = v.scalar(ib);
        return a < alpha_lo || a > alpha_hi || b < 0.2 || b > 5.0;
    };
    // het keeps its seed unknowns, so the meshes they live on must survive
    const std::vector<double> tm0 = het.problem().segs[0].mesh.tm;
    const std::vector<double> tm1 = het.problem().segs[1].mesh.tm;
    Branch br = continue_branch(het.problem(), het.unknowns(), ia, direction, o);
    het.set_mesh_times(tm0, tm1);
    return br;
}

}  // namespace hetinf
