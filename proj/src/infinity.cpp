#include "hetinf/infinity.hpp"

#include <cmath>

#include "hetinf/error.hpp"
#include "hetinf/fields.hpp"
#include "hetinf/ode.hpp"
#include "hetinf/quadrature.hpp"

namespace hetinf {

double critical_radius() { return 2.0 / std::sqrt(3.0); }

double flux_through_cylinder(double r) {
    return 0.125 * M_PI * r * (4.0 - 3.0 * r * r);
}

double flux_numeric(double r, double wB, const Params& ps) {
    auto rdot = [&](double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        const Vec3 p{r * c, 2.0 * r * s - ps.alpha, wB};
        const Vec3 f = rhs_blownup(p, ps);
        // r^2 = xB^2 + (zB + alpha)^2 / 4
        return (p[0] * f[0] + 0.25 * (p[1] + ps.alpha) * f[1]) / r;
    };
    return gauss_integrate(0.0, 2.0 * M_PI, 8, 7, rdot);
}

CriticalCylinder critical_cylinder(const Params& ps) {
    double lo = 0.5, hi = 2.0;
    double flo = flux_through_cylinder(lo);
    if (!(flo > 0.0 && flux_through_cylinder(hi) < 0.0))
        throw Error(Errc::RootNotBracketed, "flux does not change sign on (0.5, 2.0)");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double fm = flux_through_cylinder(mid);
        if ((fm > 0.0) == (flo > 0.0)) { lo = mid; flo = fm; }
        else hi = mid;
    }
    return {0.5 * (lo + hi), {0.0, -ps.alpha, 0.0}};
}

Vec3 cylinder_point(double theta, double delta, const Params& ps) {
    const double r = critical_radius();
    return {r * std::cos(theta), 2.0 * r * std::sin(theta) - ps.alpha, delta};
}

const char* probe_outcome_name(ProbeOutcome o) {
    switch (o) {
        case ProbeOutcome::Converges: return "Converges";
        case ProbeOutcome::Diverges: return "Diverges";
        case ProbeOutcome::Undecided: return "Undecided";
    }
    return "?";
}

ProbeResult separatrix_probe(const Params& ps, double x0, double delta,
                             double max_time, double tol) {
    const double rstar = critical_radius();
    auto radius = [&](const Vec3& p) {
        const double zr = p[1] + ps.alpha;
        return std::sqrt(p[0] * p[0] + 0.25 * zr * zr);
    };
    auto rhs = [&](double, const Vec3& p) { return rhs_blownup(p, ps); };

    std::vector<EventSpec> events;
    events.push_back({[](double, const Vec3& p) { return p[2] - 0.2; }, +1, true});
    events.push_back({[](double, const Vec3& p) { return p[2] - 1e-2; }, -1, true});

    Vec3 y{x0, -ps.alpha, delta};
    if (delta <= 1e-2 && std::fabs(x0) <= rstar) return {ProbeOutcome::Converges, 0.0, y};
    double t = 0.0;
    OdeOptions opt;
    opt.tol = tol;
    opt.store_path = false;
    // wB oscillates within each turn, so a downward crossing of the funnel
    // height only decides the probe when the state is already inside the
    // critical cylinder; otherwise integration resumes from the crossing.
    while (t < max_time) {
        const double chunk = std::min(max_time - t, 2e4);
        OdeResult r = integrate(rhs, y, -t, -t - chunk, opt, events);
        if (r.terminated_by_event) {
            const OdeEvent& e = r.events.back();
            if (e.index == 0) return {ProbeOutcome::Diverges, -e.t, e.y};
            if (radius(e.y) <= rstar) return {ProbeOutcome::Converges, -e.t, e.y};
            y = e.y;
            // the localized crossing can land a hair above the funnel level,
            // which would re-fire the same event at the restart point
            if (y[2] >= 1e-2) y[2] = 1e-2 * (1.0 - 1e-12);
            t = -e.t;
            continue;
        }
        y = r.y_end;
        t = -r.t_end;
    }
    return {ProbeOutcome::Undecided, max_time, y};
}

double separatrix_bisection(const Params& ps, double lo, double hi,
                            double delta, double xtol, double max_time) {
    const ProbeOutcome olo = separatrix_probe(ps, lo, delta, max_time).outcome;
    const ProbeOutcome ohi = separatrix_probe(ps, hi, delta, max_time).outcome;
    if (olo != ProbeOutcome::Converges || ohi != ProbeOutcome::Diverges)
        throw Error(Errc::RootNotBracketed,
                    "probe endpoints must bracket the separatrix (Converges / Diverges)");
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        const ProbeOutcome om = separatrix_probe(ps, mid, delta, max_time).outcome;
        if (om == ProbeOutcome::Converges) lo = mid;
        else if (om == ProbeOutcome::Diverges) hi = mid;
        else break;  // undecided: do not refine past the method's resolution
    }
    return 0.5 * (lo + hi);
}

}  // namespace hetinf
