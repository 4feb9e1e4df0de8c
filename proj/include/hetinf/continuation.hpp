#ifndef HETINF_CONTINUATION_HPP
#define HETINF_CONTINUATION_HPP

#include <functional>
#include <string>
#include <vector>

#include "hetinf/bvp.hpp"

namespace hetinf {

/// Pseudo-arclength continuation of a BvpProblem whose declared rows leave a
/// one-dimensional solution family (one fewer equation than unknowns).  The
/// arclength metric weights every fine-state entry by 1/(total state count)
/// and every scalar by 1, so parameter moves and state deformation are
/// commensurable.
struct ContinuationOptions {
    double ds0 = 0.02;
    double ds_min = 1e-8;
    double ds_max = 0.2;
    int max_steps = 500;
    NewtonOptions newton;
    int grow_every = 4;        // accepted steps between growth
    double grow_factor = 1.3;
    double residual_check = 1e-9;  // re-verification bound on accepted points
    double monitor_tol = 1e-9;     // located zeros are polished to this
    int adapt_every = 0;           // accepted points between mesh redistributions;
                                   // 0 keeps the meshes fixed
    int fold_scalar = -1;          // watch this scalar for turning points
    std::vector<std::function<double(const BvpView&)>> monitors;
    int stop_zero_monitor = -1;    // end the branch at a located zero of this monitor
    std::function<bool(const BvpView&)> stop;  // checked on accepted points
};

struct BranchPoint {
    double s = 0.0;               // chordal arclength from the start
    std::vector<double> x;        // full unknown vector
    std::vector<double> mon;      // monitor values
};

enum class BranchEnd { MaxSteps, StopPredicate, StepUnderflow, ZeroTarget };

struct BranchEvent {
    enum class Kind { Zero, Fold };
    Kind kind = Kind::Zero;
    int index = 0;                // monitor index, or the fold scalar
    double s = 0.0;
    double refined_param = 0.0;   // Zero: primary scalar there; Fold: parabolic extremum
    BranchPoint point;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;
    BranchEnd end = BranchEnd::MaxSteps;
    std::vector<std::string> scalar_names;
};

const char* branch_end_name(BranchEnd e);

/// Newton correction with one scalar pinned to a target value; the standard
/// way to land exactly on a parameter slice.
NewtonResult pinned_correct(BvpProblem& prob, const BvpLayout& lay, std::vector<double>& x,
                            int scalar, double value, const NewtonOptions& opt = {});

/// Trace the family from x0 (corrected in place first, primary scalar held).
/// direction = +-1 chooses the initial sense of the primary scalar.
Branch continue_branch(BvpProblem& prob, std::vector<double> x0, int primary, double direction,
                       const ContinuationOptions& opt);

}  // namespace hetinf

#endif
