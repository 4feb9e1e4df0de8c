#ifndef HETINF_EIG3_HPP
#define HETINF_EIG3_HPP

#include <array>
#include <complex>

#include "hetinf/vec3.hpp"

namespace hetinf {

/// Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0, complex pairs allowed.
std::array<std::complex<double>, 3> cubic_roots(double c2, double c1, double c0);

/// Real eigen-decomposition of a 3x3 matrix via the characteristic cubic
/// (trigonometric closed form, Newton-polished) plus inverse iteration for
/// the vectors.  Values are sorted ascending; each vector is unit length with
/// its largest-magnitude component positive.  Throws ComplexEigenvalues when
/// the spectrum is not real.
struct Eig3 {
    std::array<double, 3> values;
    std::array<Vec3, 3> vectors;
};
Eig3 eig3(const Mat3& A);

/// Unit null-ish vector of (A - lambda I): cross-product rule with an inverse
/// iteration polish.  Shared by eig3 and the Floquet seeding.
Vec3 eigvec3(const Mat3& A, double lambda);

}  // namespace hetinf

#endif
