#include "hetinf/eigenstructure.hpp"

#include <cmath>

#include "hetinf/eig3.hpp"
#include "hetinf/error.hpp"
#include "hetinf/fields.hpp"

namespace hetinf {

SaddleData saddle_at_origin(const Params& ps) {
    const Mat3 J = jac_original({0.0, 0.0, 0.0}, ps);
    Eig3 e;
    try {
        e = eig3(J);
    } catch (const Error& err) {
        if (err.code() == Errc::ComplexEigenvalues)
            throw Error(Errc::NotSaddle, "origin spectrum is not real at these parameters");
        throw;
    }
    if (!(e.values[0] < 0.0 && e.values[1] > 0.0))
        throw Error(Errc::NotSaddle, "origin spectrum is not (-, +, +)");
    SaddleData sd;
    sd.params = ps;
    sd.lambda_s = e.values[0];
    sd.lambda_u = e.values[1];
    sd.lambda_uu = e.values[2];
    sd.e_s = e.vectors[0];
    sd.e_u = e.vectors[1];
    sd.e_uu = e.vectors[2];
    return sd;
}

double case_c_margin(const SaddleData& sd) { return -sd.lambda_s - sd.lambda_uu; }

SaddleData track_eigvec(const SaddleData& prev, const Params& next) {
    SaddleData sd = saddle_at_origin(next);
    const double scale = std::max({std::fabs(sd.lambda_s), std::fabs(sd.lambda_uu), 1.0});
    if (sd.lambda_uu - sd.lambda_u < 1e-9 * scale)
        throw Error(Errc::EigenvalueCollision, "unstable eigenvalues have merged");
    const Vec3* pv[3] = {&prev.e_s, &prev.e_u, &prev.e_uu};
    Vec3* nv[3] = {&sd.e_s, &sd.e_u, &sd.e_uu};
    for (int i = 0; i < 3; ++i) {
        const double d = dot(*pv[i], *nv[i]);
        if (d < 0.0) *nv[i] = -*nv[i];
        // a rotation past 60 degrees in one step means the branches can no
        // longer be identified reliably
        if (d * d < 0.25)
            throw Error(Errc::EigenvalueCollision, "eigenvector branch lost between parameter steps");
    }
    return sd;
}

}  // namespace hetinf
