#ifndef HETINF_FIELDS_HPP
#define HETINF_FIELDS_HPP

#include "hetinf/chart.hpp"
#include "hetinf/params.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// The quadratic model field in ambient coordinates,
///
///     x' = alpha*y + gamma*z + y*z
///     y' = beta*x - y + x^2
///     z' = -4*x
///
/// together with its compactified and blown-up conjugates.  The rhs_*
/// functions are the raw right-hand sides used by the integrators and the
/// collocation engine; the eval_* wrappers additionally check the chart tag.

Vec3 rhs_original(const Vec3& p, const Params& ps);
Vec3 rhs_compactified(const Vec3& p, const Params& ps);
Vec3 rhs_blownup(const Vec3& p, const Params& ps);

/// Quasi-homogeneous leading-order part (yz, x^2, -4x); scales with type
/// (3, 4, 1) and order 3 under (x, y, z) -> (s^3 x, s^4 y, s z).
Vec3 eval_quasihom(const Vec3& p);

Vec3 eval_original(const ChartPoint& q, const Params& ps);
Vec3 eval_compactified(const ChartPoint& q, const Params& ps);
Vec3 eval_blownup(const ChartPoint& q, const Params& ps);

/// Restriction of the compactified field to the invariant plane wb = 0.
Vec2 eval_infinity_plane(const Vec2& p);

/// Infinity-plane dynamics in ellipsoidal polar coordinates
/// xb = r cos(theta), zb = 2 r sin(theta); returns (r', theta').
Vec2 infinity_plane_polar(double r, double theta);

/// d(rhs)/d(state) for the tagged chart.
Mat3 jac_original(const Vec3& p, const Params& ps);
Mat3 jac_compactified(const Vec3& p, const Params& ps);
Mat3 jac_blownup(const Vec3& p, const Params& ps);
Mat3 field_jacobian(const ChartPoint& q, const Params& ps);

/// d(rhs)/d(alpha) and d(rhs)/d(beta), needed when a system parameter is a
/// continuation unknown.  gamma never varies.
Vec3 dalpha_of(ChartId chart, const Vec3& p, const Params& ps);
Vec3 dbeta_of(ChartId chart, const Vec3& p, const Params& ps);

Vec3 rhs_of(ChartId chart, const Vec3& p, const Params& ps);
Mat3 jac_of(ChartId chart, const Vec3& p, const Params& ps);

}  // namespace hetinf

#endif
