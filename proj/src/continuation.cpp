#include "hetinf/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetinf {

const char* branch_end_name(BranchEnd e) {
    switch (e) {
        case BranchEnd::MaxSteps: return "max_steps";
        case BranchEnd::StopPredicate: return "stop_predicate";
        case BranchEnd::StepUnderflow: return "step_underflow";
        case BranchEnd::ZeroTarget: return "zero_target";
    }
    return "?";
}

NewtonResult pinned_correct(BvpProblem& prob, const BvpLayout& lay, std::vector<double>& x,
                            int scalar, double value, const NewtonOptions& opt) {
    std::vector<BorderRowDef> extra(1);
    const int ix = lay.ix_scalar(scalar);
    extra[0].r = [ix, value](const BvpView& v) { return v.raw()[ix] - value; };
    extra[0].grad = [ix](const BvpView&, double* g) { g[ix] += 1.0; };
    return bvp_newton(prob, lay, x, opt, &extra);
}

namespace {

struct Metric {
    std::vector<double> w;

    explicit Metric(const BvpLayout& lay) : w(lay.n_total, 1.0) {
        const int nstate = lay.p_off;
        if (nstate > 0)
            for (int i = 0; i < nstate; ++i) w[i] = 1.0 / nstate;
    }
    double dot(const std::vector<double>& a, const std::vector<double>& b) const {
        double s = 0.0;
        for (size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
        return s;
    }
};

}  // namespace

Branch continue_branch(BvpProblem& prob, std::vector<double> x0, int primary, double direction,
                       const ContinuationOptions& opt) {
    const BvpLayout lay = layout_of(prob);
    if (primary < 0 || primary >= lay.n_scalars)
        throw Error(Errc::ConfigInvalid, "continue_branch: bad primary scalar index");
    const Metric metric(lay);

    Branch br;
    br.scalar_names = prob.scalar_names;

    auto monitors_at = [&](const std::vector<double>& x) {
        std::vector<double> m(opt.monitors.size());
        BvpView view(&lay, x.data());
        for (size_t i = 0; i < opt.monitors.size(); ++i) m[i] = opt.monitors[i](view);
        return m;
    };
    auto residual_ok = [&](const std::vector<double>& x) {
        std::vector<double> r;
        bvp_residual(prob, lay, x, r);
        double m = 0.0;
        for (double v : r) {
            if (!std::isfinite(v)) return false;
            m = std::max(m, std::fabs(v));
        }
        return m <= opt.residual_check;
    };

    // land exactly on the starting slice before doing anything else
    {
        const double p0 = x0[lay.ix_scalar(primary)];
        const NewtonResult nr = pinned_correct(prob, lay, x0, primary, p0, opt.newton);
        if (!nr.converged)
            throw Error(Errc::MaxSteps, "continue_branch: initial correction did not converge");
    }
    br.points.push_back({0.0, x0, monitors_at(x0)});
    if (prob.on_accept) prob.on_accept(x0);

    // bootstrap with a natural-parameter step to build the first secant
    double ds = std::min(opt.ds0, opt.ds_max);
    std::vector<double> x1;
    while (true) {
        x1 = x0;
        const double target = x0[lay.ix_scalar(primary)] + direction * ds;
        bool ok = false;
        try {
            ok = pinned_correct(prob, lay, x1, primary, target, opt.newton).converged &&
                 residual_ok(x1);
        } catch (const Error& e) {
            if (e.code() == Errc::ConfigInvalid || e.code() == Errc::IllPosedProblem) throw;
        }
        if (ok) break;
        ds *= 0.5;
        if (ds < opt.ds_min) {
            br.end = BranchEnd::StepUnderflow;
            return br;
        }
    }

    std::vector<double> tangent(lay.n_total);
    auto set_tangent = [&](const std::vector<double>& from, const std::vector<double>& to) {
        for (int i = 0; i < lay.n_total; ++i) tangent[i] = to[i] - from[i];
        const double n = std::sqrt(metric.dot(tangent, tangent));
        for (double& v : tangent) v /= n;
    };
    set_tangent(x0, x1);
    {
        std::vector<double> d(lay.n_total);
        for (int i = 0; i < lay.n_total; ++i) d[i] = x1[i] - x0[i];
        br.points.push_back({std::sqrt(metric.dot(d, d)), x1, monitors_at(x1)});
    }
    if (prob.on_accept) prob.on_accept(x1);

    // corrected point at distance dsz along the tangent from base; returns
    // convergence and fills xc
    auto correct_at = [&](const std::vector<double>& base, double dsz,
                          std::vector<double>& xc) -> bool {
        xc.resize(lay.n_total);
        for (int i = 0; i < lay.n_total; ++i) xc[i] = base[i] + dsz * tangent[i];
        std::vector<BorderRowDef> extra(1);
        extra[0].r = [&, dsz](const BvpView& v) {
            double s = -dsz;
            for (int i = 0; i < lay.n_total; ++i)
                s += metric.w[i] * tangent[i] * (v.raw()[i] - base[i]);
            return s;
        };
        extra[0].grad = [&](const BvpView&, double* g) {
            for (int i = 0; i < lay.n_total; ++i) g[i] += metric.w[i] * tangent[i];
        };
        try {
            if (!bvp_newton(prob, lay, xc, opt.newton, &extra).converged) return false;
        } catch (const Error& e) {
            // singular Jacobians and domain violations at the predictor are
            // step failures, not programming errors
            if (e.code() == Errc::ConfigInvalid || e.code() == Errc::IllPosedProblem) throw;
            return false;
        }
        return residual_ok(xc);
    };

    // redistribute the meshes to the newest point, resample the previous one
    // for the secant, and re-correct on the new breakpoints; a failure leaves
    // the old meshes in place
    auto try_adapt = [&]() {
        std::vector<std::vector<double>> save_tm;
        for (const SegmentSpec& s : prob.segs) save_tm.push_back(s.mesh.tm);
        BranchPoint& cur = br.points.back();
        BranchPoint& prv = br.points[br.points.size() - 2];
        std::vector<double> xc = cur.x, xp = prv.x;
        adapt_meshes(prob, lay, xc, &xp);
        bool ok = false;
        try {
            ok = pinned_correct(prob, lay, xc, primary, xc[lay.ix_scalar(primary)], opt.newton)
                     .converged &&
                 residual_ok(xc);
        } catch (const Error& e) {
            if (e.code() == Errc::ConfigInvalid || e.code() == Errc::IllPosedProblem) throw;
        }
        if (ok) {
            // keep the secant meaningful: the re-correction must not move the
            // newest point by a sizable fraction of the point spacing
            std::vector<double> d(lay.n_total);
            for (int i = 0; i < lay.n_total; ++i) d[i] = cur.x[i] - prv.x[i];
            const double spacing2 = metric.dot(d, d);
            for (int i = 0; i < lay.n_total; ++i) d[i] = xc[i] - cur.x[i];
            ok = metric.dot(d, d) <= 0.04 * spacing2;
        }
        if (!ok) {
            for (size_t s = 0; s < prob.segs.size(); ++s) prob.segs[s].mesh.tm = save_tm[s];
            return;
        }
        cur.x = std::move(xc);
        cur.mon = monitors_at(cur.x);
        prv.x = std::move(xp);
        set_tangent(prv.x, cur.x);
    };

    int streak = 0, since_adapt = 0;
    while (static_cast<int>(br.points.size()) < opt.max_steps) {
        if (opt.adapt_every > 0 && ++since_adapt >= opt.adapt_every) {
            since_adapt = 0;
            try_adapt();
        }
        const BranchPoint& last = br.points.back();
        std::vector<double> xn;
        if (!correct_at(last.x, ds, xn)) {
            ds *= 0.5;
            streak = 0;
            if (ds < opt.ds_min) {
                br.end = BranchEnd::StepUnderflow;
                return br;
            }
            continue;
        }

        std::vector<double> mon = monitors_at(xn);
        const double ds_used = ds;

        // locate monitor zeros crossed by this step
        bool terminated = false;
        for (size_t i = 0; i < mon.size() && !terminated; ++i) {
            const double ml = last.mon[i], mr = mon[i];
            if (!std::isfinite(ml) || !std::isfinite(mr) || ml == 0.0 || ml * mr >= 0.0) continue;
            double a = 0.0, fa = ml, b = ds_used, fb = mr;
            std::vector<double> xz = xn, xb;
            double fz = mr, sz = ds_used;
            for (int it = 0; it < 60 && std::fabs(fz) > opt.monitor_tol; ++it) {
                double c = b - fb * (b - a) / (fb - fa);  // secant within the bracket
                if (!(c > a && c < b)) c = 0.5 * (a + b);
                if (!correct_at(last.x, c, xb)) {
                    c = 0.5 * (a + b);
                    if (!correct_at(last.x, c, xb)) break;
                }
                const double fc = monitors_at(xb)[i];
                if (!std::isfinite(fc)) break;
                xz = xb;
                fz = fc;
                sz = c;
                if (fa * fc <= 0.0) {
                    b = c;
                    fb = fc;
                } else {
                    a = c;
                    fa = fc;
                }
            }
            BranchEvent ev;
            ev.kind = BranchEvent::Kind::Zero;
            ev.index = static_cast<int>(i);
            ev.s = last.s + sz;
            ev.point = {ev.s, xz, monitors_at(xz)};
            ev.refined_param = xz[lay.ix_scalar(primary)];
            br.events.push_back(ev);
            if (opt.stop_zero_monitor == static_cast<int>(i)) {
                br.points.push_back(ev.point);
                if (prob.on_accept) prob.on_accept(xz);
                br.end = BranchEnd::ZeroTarget;
                terminated = true;
            }
        }
        if (terminated) return br;

        // fold detection: sign change of the primary-family tangent component
        std::vector<double> tnew(lay.n_total);
        {
            for (int i = 0; i < lay.n_total; ++i) tnew[i] = xn[i] - last.x[i];
            const double n = std::sqrt(metric.dot(tnew, tnew));
            for (double& v : tnew) v /= n;
        }
        if (opt.fold_scalar >= 0 && br.points.size() >= 2) {
            const double tp = tangent[lay.ix_scalar(opt.fold_scalar)];
            const double tc = tnew[lay.ix_scalar(opt.fold_scalar)];
            if (tp * tc < 0.0) {
                const BranchPoint& pm = br.points[br.points.size() - 2];
                const double s0 = pm.s, s1 = last.s, s2 = last.s + ds_used;
                const double p0 = pm.x[lay.ix_scalar(opt.fold_scalar)];
                const double p1 = last.x[lay.ix_scalar(opt.fold_scalar)];
                const double p2 = xn[lay.ix_scalar(opt.fold_scalar)];
                const double d01 = (p1 - p0) / (s1 - s0);
                const double d12 = (p2 - p1) / (s2 - s1);
                const double c2 = (d12 - d01) / (s2 - s0);
                double refined = p1;
                if (c2 != 0.0) {
                    const double sv = 0.5 * (s0 + s1) - d01 / (2.0 * c2);
                    refined = p0 + d01 * (sv - s0) + c2 * (sv - s0) * (sv - s1);
                }
                BranchEvent ev;
                ev.kind = BranchEvent::Kind::Fold;
                ev.index = opt.fold_scalar;
                ev.s = last.s;
                ev.refined_param = refined;
                ev.point = last;
                br.events.push_back(ev);
            }
        }

        br.points.push_back({last.s + ds_used, xn, std::move(mon)});
        tangent = std::move(tnew);
        if (prob.on_accept) prob.on_accept(br.points.back().x);

        if (opt.stop) {
            BvpView view(&lay, br.points.back().x.data());
            if (opt.stop(view)) {
                br.end = BranchEnd::StopPredicate;
                return br;
            }
        }

        if (++streak >= opt.grow_every) {
            ds = std::min(ds * opt.grow_factor, opt.ds_max);
            streak = 0;
        }
    }
    br.end = BranchEnd::MaxSteps;
    return br;
}

}  // namespace hetinf
