#include "hetinf/orbit.hpp"

#include <algorithm>
#include <cmath>

namespace hetinf {

OrbitSegment orbit_from_ode(ChartId chart, const OdeResult& r, double t0, double t1) {
    if (r.t.empty() || t0 == t1)
        throw Error(Errc::ConfigInvalid, "orbit_from_ode: empty path or zero span");
    OrbitSegment seg;
    seg.chart = chart;
    const double span = t1 - t0;
    seg.time_scale = std::fabs(span);
    const size_t n = r.t.size();
    seg.t.resize(n);
    seg.x.resize(n);
    seg.dx.resize(n);
    for (size_t i = 0; i < n; ++i) {
        // dx/dtau = f * dt/dtau = f * span
        seg.t[i] = (r.t[i] - t0) / span;
        seg.x[i] = r.y[i];
        seg.dx[i] = span * r.dy[i];
    }
    if (n > 1 && seg.t.front() > seg.t.back()) {
        std::reverse(seg.t.begin(), seg.t.end());
        std::reverse(seg.x.begin(), seg.x.end());
        std::reverse(seg.dx.begin(), seg.dx.end());
    }
    // clamp the rounding fuzz at the ends so discretize accepts the span
    seg.t.front() = 0.0;
    seg.t.back() = 1.0;
    return seg;
}

SampledCurve curve_of(const OrbitSegment& seg) {
    return SampledCurve{seg.t, seg.x, seg.dx};
}

}  // namespace hetinf
