#ifndef HETINF_CHART_HPP
#define HETINF_CHART_HPP

#include "hetinf/error.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// The three coordinate systems the pipeline moves between.
///
///  Original:     (x, y, z), the ambient quadratic vector field.
///  Compactified: (xb, zb, wb), the y > 0 directional chart with
///                x = xb/wb^3, y = 1/wb^4, z = zb/wb.  wb = 0 is the plane
///                at infinity.  The y-weights (3, 4, 1) come from the
///                quasi-homogeneous type of the leading-order field, whose
///                order is 3; both are fixed properties of this chart.
///  BlownUp:      (xB, zB, wB), the directional blow-up of the degenerate
///                point at infinity: xb = xB*wB, zb = zB*wB, wb = wB.
enum class ChartId { Original, Compactified, BlownUp };

const char* chart_name(ChartId id);

/// A point tagged with the chart its coordinates live in.  All chart and
/// field evaluations check the tag and refuse mismatched input.
struct ChartPoint {
    ChartId chart = ChartId::Original;
    Vec3 p{0.0, 0.0, 0.0};
};

inline void require_chart(const ChartPoint& q, ChartId expect, const char* where) {
    if (q.chart != expect)
        throw Error(Errc::ChartMismatch,
                    std::string(where) + " expects a " + chart_name(expect) +
                        " point, got " + chart_name(q.chart));
}

}  // namespace hetinf

#endif
