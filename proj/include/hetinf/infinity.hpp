#ifndef HETINF_INFINITY_HPP
#define HETINF_INFINITY_HPP

#include "hetinf/params.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// Geometry near the degenerate equilibrium at infinity.  In the blow-up
/// chart the plane wB = 0 is foliated by the ellipses
///   4 xB^2 + (zB + alpha)^2 = const,
/// parameterized by xB = r cos(theta), zB = 2 r sin(theta) - alpha.  The
/// theta-averaged radial drift through the cylinder of radius r carries the
/// sign of flux_through_cylinder below; its positive zero r* marks the
/// cylinder shadowing the center-stable separatrix surface.

/// r* = (2/3) sqrt(3)
double critical_radius();

/// (1/8) pi r (4 - 3 r^2): the wB^2 coefficient of the averaged radial flux.
double flux_through_cylinder(double r);

/// theta-integral of the instantaneous radial drift of the blown-up field on
/// the circle of radius r at height wB, by composite Gauss quadrature.
/// Matches wB^2 * flux_through_cylinder(r) to quadrature accuracy; the gamma
/// and beta contributions average to zero exactly.
double flux_numeric(double r, double wB, const Params& ps);

struct CriticalCylinder {
    double radius = 0.0;
    Vec3 axis_point{};  // (0, -alpha, 0)
};

/// Positive flux zero located by bisection on (0.5, 2.0).
CriticalCylinder critical_cylinder(const Params& ps);

/// Point on the critical cylinder at angle theta and height delta,
/// in BlownUp coordinates.
Vec3 cylinder_point(double theta, double delta, const Params& ps);

enum class ProbeOutcome { Converges, Diverges, Undecided };
const char* probe_outcome_name(ProbeOutcome o);

struct ProbeResult {
    ProbeOutcome outcome = ProbeOutcome::Undecided;
    double t_elapsed = 0.0;  // backward time spent
    Vec3 last_state{};
};

/// Backward-time probe from (x0, -alpha, delta) in the blow-up chart.
/// Diverges once wB exceeds 0.2.  Converges once the state is inside the
/// critical cylinder with wB at or below 1e-2; from there the averaged drift
/// contracts both wB and the radius monotonically toward (0, -alpha, 0), but
/// the final approach is algebraic (the equilibrium is not hyperbolic), so
/// the probe decides on funnel entry rather than on reaching a small ball.
ProbeResult separatrix_probe(const Params& ps, double x0, double delta,
                             double max_time = 2e5, double tol = 1e-6);

/// Bisect [lo, hi] on probe outcome at height delta; returns the empirical
/// critical x0.  Endpoints must produce Converges/Diverges respectively.
double separatrix_bisection(const Params& ps, double lo, double hi,
                            double delta, double xtol, double max_time = 2e5);

}  // namespace hetinf

#endif
