#include "hetinf/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "hetinf/eig3.hpp"
#include "hetinf/eigenstructure.hpp"
#include "hetinf/fields.hpp"
#include "hetinf/ode.hpp"
#include "hetinf/orbit.hpp"

namespace hetinf {

namespace {

Vec3 eval_nodes(const std::vector<Vec3>& fine, int ntst, int ncol, double t, bool deriv) {
    const int j = std::clamp(static_cast<int>(std::floor(t * ntst)), 0, ntst - 1);
    const double sigma = t * ntst - j;
    std::vector<double> ref(ncol + 1);
    for (int i = 0; i <= ncol; ++i) ref[i] = static_cast<double>(i) / ncol;
    const auto coef = deriv ? lagrange_ders(ref, sigma) : lagrange_vals(ref, sigma);
    Vec3 out = {0, 0, 0};
    for (int i = 0; i <= ncol; ++i) out = out + coef[i] * fine[j * ncol + i];
    if (deriv) out = static_cast<double>(ntst) * out;
    return out;
}

// phase-condition workspace: derivative of the rolling reference orbit at
// every collocation point
struct PhaseRef {
    std::vector<Vec3> dref;  // ntst * ncol entries

    void rebuild(const Mesh& mesh, const std::vector<Vec3>& fine) {
        dref.assign(mesh.ntst * mesh.ncol, Vec3{0, 0, 0});
        for (int j = 0; j < mesh.ntst; ++j)
            for (int k = 0; k < mesh.ncol; ++k) {
                Vec3 d = {0, 0, 0};
                for (int i = 0; i <= mesh.ncol; ++i)
                    d = d + mesh.bder(k, i) * fine[j * mesh.ncol + i];
                dref[j * mesh.ncol + k] = d;  // reference-interval scale
            }
    }
};

std::vector<Vec3> fine_of_view(const BvpView& v, int nf) {
    std::vector<Vec3> out(nf + 1);
    for (int g = 0; g <= nf; ++g) out[g] = v.node(0, g);
    return out;
}

}  // namespace

Vec3 periodic_eval(const PeriodicOrbit& po, double t) {
    return eval_nodes(po.x, po.ntst, po.ncol, t, false);
}

Vec3 periodic_eval_deriv(const PeriodicOrbit& po, double t) {
    return eval_nodes(po.x, po.ntst, po.ncol, t, true);
}

namespace {

// Shared construction of the periodic BVP.  with_param: 'a'/'b' adds the
// system parameter as scalar 4; otherwise there are 4 scalars [T, xi].
struct PeriodicBvp {
    Params base;
    char free_param = 0;
    Mesh mesh;
    PhaseRef phase;
    BvpProblem prob;
    BvpLayout lay;

    Params params_at(const std::vector<double>& p) const {
        Params ps = base;
        if (free_param == 'a') ps.alpha = p[4];
        if (free_param == 'b') ps.beta = p[4];
        return ps;
    }

    void build() {
        SegmentSpec seg;
        seg.chart = ChartId::Original;
        seg.mesh = mesh;
        seg.dyn.t_scalar = 0;
        seg.dyn.f = [this](double, const Vec3& u, const std::vector<double>& p) {
            return rhs_original(u, params_at(p));
        };
        seg.dyn.dfdx = [this](double, const Vec3& u, const std::vector<double>& p) {
            return jac_original(u, params_at(p));
        };
        if (free_param)
            seg.dyn.dfdp = [this](int k, double, const Vec3& u, const std::vector<double>& p) {
                if (k != 4) return Vec3{0, 0, 0};
                return free_param == 'a' ? dalpha_of(ChartId::Original, u, params_at(p))
                                         : dbeta_of(ChartId::Original, u, params_at(p));
            };
        seg.anchor.side = AnchorSide::Left;
        seg.anchor.g = [](const Vec3& v, const std::vector<double>& p) {
            return Vec3{v[0] - p[1], v[1] - p[2], v[2] - p[3]};
        };
        seg.anchor.dg_dx = [](const Vec3&, const std::vector<double>&) {
            return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
        };
        seg.anchor.dg_dp = [](const Vec3&, const std::vector<double>&, Matrix& out) {
            for (int r = 0; r < 3; ++r) out(r, 1 + r) = -1.0;
        };
        prob.segs.push_back(std::move(seg));

        prob.n_scalars = free_param ? 5 : 4;
        prob.scalar_names = {"T", "xi_x", "xi_y", "xi_z"};
        if (free_param) prob.scalar_names.push_back(free_param == 'a' ? "alpha" : "beta");

        const int nf = mesh.nfine();
        for (int c = 0; c < 3; ++c) {
            BorderRowDef row;
            row.r = [c, nf](const BvpView& v) { return v.node(0, nf)[c] - v.scalar(1 + c); };
            row.grad = [c, nf](const BvpView& v, double* g) {
                g[v.layout().ix_node(0, nf, c)] += 1.0;
                g[v.layout().ix_scalar(1 + c)] -= 1.0;
            };
            prob.rows.push_back(std::move(row));
        }
        {
            BorderRowDef row;
            row.r = [this](const BvpView& v) {
                double s = 0.0;
                for (int j = 0; j < mesh.ntst; ++j)
                    for (int k = 0; k < mesh.ncol; ++k) {
                        Vec3 u = {0, 0, 0};
                        for (int i = 0; i <= mesh.ncol; ++i)
                            u = u + mesh.bval(k, i) * v.node(0, j * mesh.ncol + i);
                        s += mesh.wgauss[k] * dot(u, phase.dref[j * mesh.ncol + k]);
                    }
                return s;
            };
            row.grad = [this](const BvpView& v, double* g) {
                for (int j = 0; j < mesh.ntst; ++j)
                    for (int k = 0; k < mesh.ncol; ++k) {
                        const Vec3& d = phase.dref[j * mesh.ncol + k];
                        for (int i = 0; i <= mesh.ncol; ++i) {
                            const double w = mesh.wgauss[k] * mesh.bval(k, i);
                            for (int c = 0; c < 3; ++c)
                                g[v.layout().ix_node(0, j * mesh.ncol + i, c)] += w * d[c];
                        }
                    }
            };
            prob.rows.push_back(std::move(row));
        }
        lay = layout_of(prob);
    }

    std::vector<double> pack(const std::vector<Vec3>& fine, double T, double pval) const {
        std::vector<double> x(lay.n_total);
        const int nf = mesh.nfine();
        for (int g = 0; g <= nf; ++g)
            for (int c = 0; c < 3; ++c) x[lay.ix_node(0, g, c)] = fine[g][c];
        x[lay.ix_scalar(0)] = T;
        for (int c = 0; c < 3; ++c) x[lay.ix_scalar(1 + c)] = fine[0][c];
        if (free_param) x[lay.ix_scalar(4)] = pval;
        return x;
    }
};

}  // namespace

PeriodicOrbit correct_periodic(const Params& ps, const SampledCurve& guess, double period_guess,
                               int ntst, int ncol, const NewtonOptions& opt) {
    PeriodicBvp pb;
    pb.base = ps;
    pb.free_param = 0;
    pb.mesh = make_mesh(ntst, ncol);
    std::vector<Vec3> fine = discretize(guess, pb.mesh);
    pb.phase.rebuild(pb.mesh, fine);
    pb.build();

    std::vector<double> x = pb.pack(fine, period_guess, 0.0);
    const NewtonResult nr = bvp_newton(pb.prob, pb.lay, x, opt);
    if (!nr.converged)
        throw Error(Errc::MaxSteps, "correct_periodic: Newton stalled at residual " +
                                        std::to_string(nr.residual_history.back()));
    PeriodicOrbit po;
    po.params = ps;
    po.ntst = ntst;
    po.ncol = ncol;
    po.period = x[pb.lay.ix_scalar(0)];
    if (!(po.period > 0.0))
        throw Error(Errc::NegativePeriod,
                    "correct_periodic: period " + std::to_string(po.period));
    const int nf = pb.mesh.nfine();
    po.x.resize(nf + 1);
    for (int g = 0; g <= nf; ++g)
        for (int c = 0; c < 3; ++c) po.x[g][c] = x[pb.lay.ix_node(0, g, c)];
    return po;
}

Branch continue_periodic(PeriodicOrbit& po, char free_param, double direction, double lo,
                         double hi, const ContinuationOptions& opt) {
    if (free_param != 'a' && free_param != 'b')
        throw Error(Errc::ConfigInvalid, "continue_periodic: free_param must be 'a' or 'b'");
    PeriodicBvp pb;
    pb.base = po.params;
    pb.free_param = free_param;
    pb.mesh = make_mesh(po.ntst, po.ncol);
    pb.phase.rebuild(pb.mesh, po.x);
    pb.build();

    const int nf = pb.mesh.nfine();
    pb.prob.on_accept = [&pb, nf](const std::vector<double>& x) {
        BvpView v(&pb.lay, x.data());
        pb.phase.rebuild(pb.mesh, fine_of_view(v, nf));
    };

    ContinuationOptions o = opt;
    if (o.fold_scalar < 0) o.fold_scalar = 4;
    auto user_stop = o.stop;
    o.stop = [lo, hi, user_stop](const BvpView& v) {
        const double p = v.scalar(4), T = v.scalar(0);
        if (p < lo || p > hi || T > 1e4 || T <= 0.0) return true;
        return user_stop ? user_stop(v) : false;
    };

    const double p0 = free_param == 'a' ? po.params.alpha : po.params.beta;
    Branch br = continue_branch(pb.prob, pb.pack(po.x, po.period, p0), 4, direction, o);

    const BranchPoint& last = br.points.back();
    for (int g = 0; g <= nf; ++g)
        for (int c = 0; c < 3; ++c) po.x[g][c] = last.x[pb.lay.ix_node(0, g, c)];
    po.period = last.x[pb.lay.ix_scalar(0)];
    const double pf = last.x[pb.lay.ix_scalar(4)];
    if (free_param == 'a')
        po.params.alpha = pf;
    else
        po.params.beta = pf;
    return br;
}

FloquetData floquet(const PeriodicOrbit& po, bool refine_bundle) {
    const Mesh mesh = make_mesh(po.ntst, po.ncol);
    const int C = mesh.ncol, N = mesh.ntst;
    const double h = mesh.h(0), T = po.period;  // the orbit mesh is uniform

    FloquetData out;
    // per-interval fundamental solutions of v' = T J(u(t)) v on the
    // collocation mesh, composed right-to-left into the monodromy matrix
    std::vector<LuFactor> lus;
    lus.reserve(N);
    std::vector<std::vector<Mat3>> Js(N, std::vector<Mat3>(C));
    std::vector<Mat3> Mj(N);
    double trace_integral = 0.0;
    for (int j = 0; j < N; ++j) {
        Matrix A(3 * C, 3 * C);
        Matrix R(3 * C, 3);
        for (int k = 0; k < C; ++k) {
            Vec3 u = {0, 0, 0};
            for (int i = 0; i <= C; ++i) u = u + mesh.bval(k, i) * po.x[j * C + i];
            const Mat3 J = jac_original(u, po.params);
            Js[j][k] = J;
            trace_integral += h * mesh.wgauss[k] * trace(J);
            for (int i = 1; i <= C; ++i)
                for (int r = 0; r < 3; ++r) {
                    A(3 * k + r, 3 * (i - 1) + r) += mesh.bder(k, i);
                    for (int c = 0; c < 3; ++c)
                        A(3 * k + r, 3 * (i - 1) + c) -= h * T * mesh.bval(k, i) * J[r][c];
                }
            for (int m = 0; m < 3; ++m)
                for (int r = 0; r < 3; ++r) {
                    double v = 0.0;
                    if (r == m) v -= mesh.bder(k, 0);
                    v += h * T * mesh.bval(k, 0) * J[r][m];
                    R(3 * k + r, m) = v;
                }
        }
        lus.emplace_back(std::move(A));
        lus.back().solve_cols(R);
        for (int r = 0; r < 3; ++r)
            for (int m = 0; m < 3; ++m) Mj[j][r][m] = R(3 * (C - 1) + r, m);
    }
    Mat3 M = Mj[0];
    for (int j = 1; j < N; ++j) M = matmul(Mj[j], M);
    out.monodromy = M;

    const double tr = trace(M);
    const double m2 = M[0][0] * M[1][1] - M[0][1] * M[1][0] + M[0][0] * M[2][2] -
                      M[0][2] * M[2][0] + M[1][1] * M[2][2] - M[1][2] * M[2][1];
    const double dt = det3(M);
    out.multipliers = cubic_roots(-tr, m2, -dt);

    out.trivial_defect = 1e300;
    for (const auto& mu : out.multipliers)
        out.trivial_defect = std::min(out.trivial_defect, std::abs(mu - 1.0));

    std::complex<double> prod = 1.0;
    for (const auto& mu : out.multipliers) prod *= mu;
    const double li = std::exp(T * trace_integral);  // trace_integral already averages over [0,1]
    out.liouville_defect = std::abs(prod - li) / std::max(li, 1e-300);

    if (!refine_bundle) return out;

    // real multiplier strictly inside the unit circle, largest magnitude wins
    double mu_s = 0.0;
    bool have = false;
    for (const auto& mu : out.multipliers) {
        if (std::fabs(mu.imag()) > 1e-8 * (1.0 + std::abs(mu))) continue;
        const double re = mu.real();
        if (std::fabs(re) >= 1.0 - 1e-9) continue;
        if (!have || std::fabs(re) > std::fabs(mu_s)) {
            mu_s = re;
            have = true;
        }
    }
    if (!have)
        throw Error(Errc::NoRealStableMultiplier,
                    "floquet: no real multiplier inside the unit circle");

    const Vec3 v0 = eigvec3(M, mu_s);
    // seed the bundle by marching v0 through the stored interval solves
    std::vector<Vec3> vfine(static_cast<size_t>(N) * C + 1);
    vfine[0] = v0;
    for (int j = 0; j < N; ++j) {
        std::vector<double> rhs(3 * C);
        const Vec3 vj = vfine[j * C];
        for (int k = 0; k < C; ++k)
            for (int r = 0; r < 3; ++r) {
                double s = -mesh.bder(k, 0) * vj[r];
                for (int c = 0; c < 3; ++c)
                    s += h * T * mesh.bval(k, 0) * Js[j][k][r][c] * vj[c];
                rhs[3 * k + r] = s;
            }
        lus[j].solve_inplace(rhs);
        for (int i = 1; i <= C; ++i)
            for (int r = 0; r < 3; ++r) vfine[j * C + i][r] = rhs[3 * (i - 1) + r];
    }

    // bundle refinement BVP: scalars [mu, xi]; v(0) = xi anchored in the core,
    // v(1) = mu xi and |xi|^2 = 1 in the border
    BvpProblem bp;
    SegmentSpec seg;
    seg.chart = ChartId::Original;
    seg.mesh = mesh;
    seg.dyn.t_scalar = -1;
    const PeriodicOrbit* pop = &po;
    seg.dyn.f = [pop, T](double t, const Vec3& v, const std::vector<double>&) {
        return T * matvec(jac_original(periodic_eval(*pop, t), pop->params), v);
    };
    seg.dyn.dfdx = [pop, T](double t, const Vec3&, const std::vector<double>&) {
        Mat3 J = jac_original(periodic_eval(*pop, t), pop->params);
        for (auto& row : J)
            for (auto& e : row) e *= T;
        return J;
    };
    seg.anchor.side = AnchorSide::Left;
    seg.anchor.g = [](const Vec3& v, const std::vector<double>& p) {
        return Vec3{v[0] - p[1], v[1] - p[2], v[2] - p[3]};
    };
    seg.anchor.dg_dx = [](const Vec3&, const std::vector<double>&) {
        return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    };
    seg.anchor.dg_dp = [](const Vec3&, const std::vector<double>&, Matrix& o) {
        for (int r = 0; r < 3; ++r) o(r, 1 + r) = -1.0;
    };
    bp.segs.push_back(std::move(seg));
    bp.n_scalars = 4;
    bp.scalar_names = {"mu", "xi_x", "xi_y", "xi_z"};
    const int nf = mesh.nfine();
    for (int c = 0; c < 3; ++c) {
        BorderRowDef row;
        row.r = [c, nf](const BvpView& v) {
            return v.node(0, nf)[c] - v.scalar(0) * v.scalar(1 + c);
        };
        row.grad = [c, nf](const BvpView& v, double* g) {
            g[v.layout().ix_node(0, nf, c)] += 1.0;
            g[v.layout().ix_scalar(0)] -= v.scalar(1 + c);
            g[v.layout().ix_scalar(1 + c)] -= v.scalar(0);
        };
        bp.rows.push_back(std::move(row));
    }
    {
        BorderRowDef row;
        row.r = [](const BvpView& v) {
            double s = -1.0;
            for (int c = 0; c < 3; ++c) s += v.scalar(1 + c) * v.scalar(1 + c);
            return s;
        };
        row.grad = [](const BvpView& v, double* g) {
            for (int c = 0; c < 3; ++c) g[v.layout().ix_scalar(1 + c)] += 2.0 * v.scalar(1 + c);
        };
        bp.rows.push_back(std::move(row));
    }
    const BvpLayout lay = layout_of(bp);
    std::vector<double> x(lay.n_total);
    for (int g = 0; g <= nf; ++g)
        for (int c = 0; c < 3; ++c) x[lay.ix_node(0, g, c)] = vfine[g][c];
    x[lay.ix_scalar(0)] = mu_s;
    for (int c = 0; c < 3; ++c) x[lay.ix_scalar(1 + c)] = v0[c];

    const NewtonResult nr = bvp_newton(bp, lay, x);
    if (!nr.converged)
        throw Error(Errc::MaxSteps, "floquet: bundle refinement stalled");
    out.mu_stable = x[lay.ix_scalar(0)];
    out.bundle.resize(nf + 1);
    for (int g = 0; g <= nf; ++g)
        for (int c = 0; c < 3; ++c) out.bundle[g][c] = x[lay.ix_node(0, g, c)];
    return out;
}

SampledCurve shadow_loop_guess(const Params& ps, double offset, double* period_out) {
    const SaddleData sd = saddle_at_origin(ps);
    const Vec3 q0 = offset * sd.e_s;
    const OdeRhs f = [&ps](double, const Vec3& q) { return rhs_original(q, ps); };
    OdeOptions oo;
    oo.tol = 1e-10;
    const double R = 0.25;

    // three terminal backward legs: leave the R-ball, re-enter it, reach the
    // closest approach.  Terminal events keep the flight from running past
    // the return point into the escape regime.
    auto leg = [&](const Vec3& from, double t0, const EventFn& g, int dir,
                   const char* what) -> OdeResult {
        std::vector<EventSpec> ev(1);
        ev[0].g = g;
        ev[0].direction = dir;
        ev[0].terminal = true;
        OdeResult r;
        try {
            r = integrate(f, from, t0, t0 - 150.0, oo, ev);
        } catch (const Error& e) {
            if (e.code() == Errc::StepUnderflow || e.code() == Errc::MaxSteps)
                throw Error(Errc::NotEnoughCrossings,
                            std::string("shadow_loop_guess: escape before ") + what);
            throw;
        }
        if (!r.terminated_by_event)
            throw Error(Errc::NotEnoughCrossings,
                        std::string("shadow_loop_guess: no ") + what + " within the time budget");
        return r;
    };

    const EventFn ball = [R](double, const Vec3& q) { return dot(q, q) - R * R; };
    // backward time runs negative, so "minus to plus along the path" is dir +1
    OdeResult r1 = leg(q0, 0.0, ball, +1, "exit from the neighborhood");
    OdeResult r2 = leg(r1.y_end, r1.t_end, ball, -1, "return to the neighborhood");
    const EventFn radial = [&f](double t, const Vec3& q) { return dot(q, f(t, q)); };
    OdeResult r3 = leg(r2.y_end, r2.t_end, radial, 0, "closest approach");
    const double t_min = r3.t_end;

    OdeResult full;
    auto append = [&full](const OdeResult& r, bool skip_first) {
        for (size_t i = skip_first ? 1 : 0; i < r.t.size(); ++i) {
            full.t.push_back(r.t[i]);
            full.y.push_back(r.y[i]);
            full.dy.push_back(r.dy[i]);
        }
    };
    append(r1, false);
    append(r2, true);
    append(r3, true);
    if (period_out) *period_out = -t_min;
    return curve_of(orbit_from_ode(ChartId::Original, full, t_min, 0.0));
}

}  // namespace hetinf
