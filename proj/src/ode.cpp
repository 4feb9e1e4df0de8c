#include "hetinf/ode.hpp"

#include <cmath>

#include "hetinf/error.hpp"

namespace hetinf {

Vec3 hermite(double t, double ta, const Vec3& ya, const Vec3& fa,
             double tb, const Vec3& yb, const Vec3& fb) {
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    Vec3 out;
    for (int i = 0; i < 3; ++i)
        out[i] = h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i];
    return out;
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0,
                 A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0,
                 A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0,
                 A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
// embedded 4th-order weights
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;
constexpr double C2 = 0.2, C3 = 0.3, C4 = 0.8, C5 = 8.0 / 9.0;

struct EventState {
    double g = 0.0;
    bool valid = false;
};

}  // namespace

OdeResult integrate(const OdeRhs& f, const Vec3& y0, double t0, double t1,
                    const OdeOptions& opt, const std::vector<EventSpec>& events) {
    OdeResult res;
    const double span = t1 - t0;
    if (span == 0.0) {
        res.t = {t0};
        res.y = {y0};
        res.dy = {f(t0, y0)};
        res.t_end = t0;
        res.y_end = y0;
        return res;
    }
    const double dir = span > 0.0 ? 1.0 : -1.0;
    const double hmax = opt.hmax > 0.0 ? opt.hmax : std::fabs(span);
    const double hmin = 1e-14 * std::fabs(span);

    double t = t0;
    Vec3 y = y0;
    Vec3 k1 = f(t, y);
    double h;
    if (opt.h0 > 0.0) {
        h = dir * std::min(opt.h0, hmax);
    } else {
        // pick the trial step from the state scale, not just the span:
        // a span-proportional guess overshoots badly on long integrations
        double hauto = std::min(1e-3 * std::fabs(span), hmax);
        const double fs = norm(k1);
        if (fs > 0.0) hauto = std::min(hauto, 0.05 * (norm(y) + 1.0) / fs);
        h = dir * std::max(hauto, hmin);
    }
    if (opt.store_path) {
        res.t.push_back(t);
        res.y.push_back(y);
        res.dy.push_back(k1);
    }

    std::vector<EventState> ev(events.size());
    for (size_t i = 0; i < events.size(); ++i) {
        ev[i].g = events[i].g(t, y);
        ev[i].valid = true;
    }

    long steps = 0;
    bool done = false;
    while (!done) {
        if (++steps > opt.max_steps)
            throw Error(Errc::MaxSteps, "integration exceeded step budget");
        if (std::fabs(h) < hmin)
            throw Error(Errc::StepUnderflow, "step size collapsed at t = " + std::to_string(t));
        // clamp the final step onto t1
        if ((t + h - t1) * dir > 0.0) {
            h = t1 - t;
            done = true;
        }

        Vec3 k2, k3, k4, k5, k6, k7, y5;
        {
            Vec3 tmp;
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * A21 * k1[i];
            k2 = f(t + C2 * h, tmp);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            k3 = f(t + C3 * h, tmp);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            k4 = f(t + C4 * h, tmp);
            for (int i = 0; i < 3; ++i)
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            k5 = f(t + C5 * h, tmp);
            for (int i = 0; i < 3; ++i)
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            k6 = f(t + h, tmp);
            for (int i = 0; i < 3; ++i)
                y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            k7 = f(t + h, y5);
        }

        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            const double sc = opt.tol + opt.tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / 3.0);

        if (!(err <= 1.0)) {  // written to also reject a non-finite estimate
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            done = false;
            continue;
        }

        // accepted
        const double tnew = done ? t1 : t + h;
        // event check on [t, tnew] against the cubic Hermite interpolant
        bool stop = false;
        for (size_t i = 0; i < events.size(); ++i) {
            const double g0 = ev[i].g;
            const double g1 = events[i].g(tnew, y5);
            const bool changed = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
            bool wanted = changed;
            if (events[i].direction > 0) wanted = changed && g0 < 0.0;
            if (events[i].direction < 0) wanted = changed && g0 > 0.0;
            if (wanted && g0 != 0.0) {
                // secant/bisection hybrid on the interpolant
                double sa = t, sb = tnew, ga = g0, gb = g1;
                double tm = sb;
                Vec3 ym = y5;
                for (int it = 0; it < 80; ++it) {
                    double cand = (std::fabs(gb - ga) > 1e-300)
                                      ? sb - gb * (sb - sa) / (gb - ga)
                                      : 0.5 * (sa + sb);
                    // keep the iterate inside the bracket
                    const double lo = std::min(sa, sb), hi = std::max(sa, sb);
                    if (!(cand > lo && cand < hi)) cand = 0.5 * (sa + sb);
                    const Vec3 yc = hermite(cand, t, y, k1, tnew, y5, k7);
                    const double gc = events[i].g(cand, yc);
                    tm = cand;
                    ym = yc;
                    if (std::fabs(gc) <= 1e-10 || std::fabs(sb - sa) < 1e-15 * std::fabs(span)) break;
                    if ((ga < 0.0) == (gc < 0.0)) { sa = cand; ga = gc; }
                    else { sb = cand; gb = gc; }
                }
                res.events.push_back({static_cast<int>(i), tm, ym});
                if (events[i].terminal) {
                    res.terminated_by_event = true;
                    res.t_end = tm;
                    res.y_end = ym;
                    if (opt.store_path) {
                        res.t.push_back(tm);
                        res.y.push_back(ym);
                        res.dy.push_back(f(tm, ym));
                    }
                    stop = true;
                    break;
                }
            }
            ev[i].g = g1;
        }
        if (stop) return res;

        t = tnew;
        y = y5;
        k1 = k7;  // FSAL
        if (opt.store_path) {
            res.t.push_back(t);
            res.y.push_back(y);
            res.dy.push_back(k1);
        }
        if (done) break;

        const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        h *= fac;
        if (std::fabs(h) > hmax) h = dir * hmax;
    }

    res.t_end = t;
    res.y_end = y;
    return res;
}

}  // namespace hetinf
