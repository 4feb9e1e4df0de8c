#ifndef HETINF_EIGENSTRUCTURE_HPP
#define HETINF_EIGENSTRUCTURE_HPP

#include "hetinf/params.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// Eigen-data of the saddle at the origin.  The linearization there is
///   [ 0      alpha  gamma ]
///   [ beta   -1     0     ]
///   [ -4     0      0     ]
/// with characteristic polynomial
///   lambda^3 + lambda^2 - (alpha beta - 4 gamma) lambda + 4 gamma = 0.
/// In the saddle regime the spectrum is lambda_s < 0 < lambda_u < lambda_uu.
struct SaddleData {
    Params params;
    double lambda_s = 0.0, lambda_u = 0.0, lambda_uu = 0.0;
    Vec3 e_s{}, e_u{}, e_uu{};  // unit, largest-magnitude component positive
};

/// Throws NotSaddle unless the spectrum is real with signature (-, +, +).
SaddleData saddle_at_origin(const Params& ps);

/// Distance from the resonance that separates the relevant saddle cases:
/// (-lambda_s) - lambda_uu.  Positive throughout the regime of interest.
double case_c_margin(const SaddleData& sd);

/// Recompute the saddle data at nearby parameters, keeping each eigenvector
/// on the same smooth branch as prev (sign flipped to maximize the inner
/// product).  Throws EigenvalueCollision if the ordering becomes ambiguous.
SaddleData track_eigvec(const SaddleData& prev, const Params& next);

}  // namespace hetinf

#endif
