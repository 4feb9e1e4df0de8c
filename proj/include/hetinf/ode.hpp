#ifndef HETINF_ODE_HPP
#define HETINF_ODE_HPP

#include <functional>
#include <vector>

#include "hetinf/vec3.hpp"

namespace hetinf {

using OdeRhs = std::function<Vec3(double, const Vec3&)>;
using EventFn = std::function<double(double, const Vec3&)>;

struct EventSpec {
    EventFn g;
    int direction = 0;     // +1: - to +, -1: + to -, 0: any sign change
    bool terminal = false;
};

struct OdeEvent {
    int index = 0;  // which EventSpec fired
    double t = 0.0;
    Vec3 y{};
};

struct OdeOptions {
    double tol = 1e-8;          // used for both absolute and relative control
    double h0 = 0.0;            // 0: pick from the span
    double hmax = 0.0;          // 0: |t1 - t0|
    long max_steps = 4000000;
    bool store_path = true;     // record every accepted step
};

struct OdeResult {
    std::vector<double> t;      // accepted step times (includes t0)
    std::vector<Vec3> y;
    std::vector<Vec3> dy;       // rhs at the accepted points
    std::vector<OdeEvent> events;
    bool terminated_by_event = false;
    double t_end = 0.0;
    Vec3 y_end{};
};

/// Dormand-Prince 5(4) with step rejection on the embedded error estimate and
/// event localization on cubic Hermite dense output.  Backward integration is
/// requested with t1 < t0.  Throws StepUnderflow when the controller pushes
/// |h| below 1e-14 * |t1 - t0| and MaxSteps past the step budget.
OdeResult integrate(const OdeRhs& f, const Vec3& y0, double t0, double t1,
                    const OdeOptions& opt = {},
                    const std::vector<EventSpec>& events = {});

/// Cubic Hermite interpolant on [ta, tb] from endpoint values/derivatives.
Vec3 hermite(double t, double ta, const Vec3& ya, const Vec3& fa,
             double tb, const Vec3& yb, const Vec3& fb);

}  // namespace hetinf

#endif
