#ifndef HETINF_ORBIT_HPP
#define HETINF_ORBIT_HPP

#include <vector>

#include "hetinf/bvp.hpp"
#include "hetinf/chart.hpp"
#include "hetinf/ode.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// A trajectory piece in one chart over normalized time [0, 1]; actual time is
/// t * time_scale with the stored orientation (time_scale > 0 always, the
/// normalization absorbs reversed integrations).
struct OrbitSegment {
    ChartId chart = ChartId::Original;
    std::vector<double> t;
    std::vector<Vec3> x;
    std::vector<Vec3> dx;  // derivatives with respect to normalized time
    double time_scale = 1.0;
};

/// Normalize an integrator path over physical times [t0, t1] (either order)
/// onto [0, 1], reordering so times ascend.
OrbitSegment orbit_from_ode(ChartId chart, const OdeResult& r, double t0, double t1);

SampledCurve curve_of(const OrbitSegment& seg);

}  // namespace hetinf

#endif
