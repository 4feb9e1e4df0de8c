#ifndef HETINF_CHARTS_HPP
#define HETINF_CHARTS_HPP

#include "hetinf/chart.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// Coordinate changes between the three charts.
///
/// The compactified chart covers y > 0:
///     wb = y^(-1/4),  xb = x * wb^3,  zb = z * wb
/// and its inverse
///     x = xb / wb^3,  y = 1 / wb^4,   z = zb / wb.
///
/// The blow-up of the degenerate point (xb, zb, wb) = (0, 0, 0):
///     xb = xB * wB,   zb = zB * wB,   wb = wB.

ChartPoint to_compactified(const ChartPoint& q);    // Original -> Compactified, requires y > 0
ChartPoint from_compactified(const ChartPoint& q);  // Compactified -> Original, requires wb > 0
ChartPoint blowup(const ChartPoint& q);             // Compactified -> BlownUp, requires wb > 0
ChartPoint blowdown(const ChartPoint& q);           // BlownUp -> Compactified (total)
ChartPoint blownup_to_original(const ChartPoint& q);  // glue map, requires wB > 0

/// Jacobian of blownup_to_original at a BlownUp-coordinate point, wB > 0.
Mat3 glue_jacobian(const Vec3& pB);

/// Global Poincare-type projection p -> p / (1 + |p|_2) of an Original point
/// into the open unit ball, used for plotting exports.
Vec3 project_sphere(const ChartPoint& q);

}  // namespace hetinf

#endif
