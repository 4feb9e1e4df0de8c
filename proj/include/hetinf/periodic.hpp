#ifndef HETINF_PERIODIC_HPP
#define HETINF_PERIODIC_HPP

#include <array>
#include <complex>
#include <vector>

#include "hetinf/bvp.hpp"
#include "hetinf/continuation.hpp"
#include "hetinf/params.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// A periodic orbit of the ambient field, stored as the fine-node states of
/// its collocation solution over one period (first and last node coincide).
struct PeriodicOrbit {
    Params params;
    int ntst = 0, ncol = 0;
    double period = 0.0;
    std::vector<Vec3> x;
};

/// Collocation interpolant of the stored orbit at normalized time in [0, 1].
Vec3 periodic_eval(const PeriodicOrbit& po, double t);
Vec3 periodic_eval_deriv(const PeriodicOrbit& po, double t);

/// Newton-close a loop guess into a periodic orbit: unknowns are the fine
/// states, the period and the base point; conditions are collocation, the
/// closure u(1) = u(0) and an integral phase condition against the guess.
/// Throws MaxSteps when Newton stalls and NegativePeriod if the period left
/// the positive axis.
PeriodicOrbit correct_periodic(const Params& ps, const SampledCurve& guess, double period_guess,
                               int ntst, int ncol, const NewtonOptions& opt = {});

/// Continue the orbit family in alpha ('a') or beta ('b') until the parameter
/// leaves [lo, hi]; the phase reference rolls with the branch and po is
/// rewritten to the final accepted point.  Folds in the free parameter are
/// recorded on the returned branch.
Branch continue_periodic(PeriodicOrbit& po, char free_param, double direction, double lo,
                         double hi, const ContinuationOptions& opt);

struct FloquetData {
    std::array<std::complex<double>, 3> multipliers{};
    double trivial_defect = 0.0;    // min |mu - 1|
    double liouville_defect = 0.0;  // relative defect of prod(mu) = exp(T * mean trace)
    Mat3 monodromy{};
    double mu_stable = 0.0;
    std::vector<Vec3> bundle;  // fine-node stable bundle, v(0) unit length
};

/// Floquet data from per-interval fundamental solutions of the variational
/// equation composed into the monodromy matrix.  With refine_bundle set, the
/// real multiplier inside the unit circle seeds a bundle boundary value
/// problem (unknowns: bundle states, the multiplier, the unit base vector);
/// throws NoRealStableMultiplier when no such multiplier exists.
FloquetData floquet(const PeriodicOrbit& po, bool refine_bundle = true);

/// Near-saddle loop guess: fly backward from offset * e_s until the
/// trajectory re-enters a neighborhood of the origin and reaches its closest
/// approach, then reverse to forward orientation.  Period estimate lands in
/// period_out.  Throws NotEnoughCrossings when the trajectory never returns.
SampledCurve shadow_loop_guess(const Params& ps, double offset, double* period_out);

}  // namespace hetinf

#endif
