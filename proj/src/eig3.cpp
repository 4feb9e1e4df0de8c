#include "hetinf/eig3.hpp"

#include <algorithm>
#include <cmath>

#include "hetinf/error.hpp"
#include "hetinf/linalg.hpp"

namespace hetinf {

std::array<std::complex<double>, 3> cubic_roots(double c2, double c1, double c0) {
    // depressed form t^3 + p t + q with lambda = t - c2/3
    const double p = c1 - c2 * c2 / 3.0;
    const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    const double shift = -c2 / 3.0;
    const double disc = 0.25 * q * q + p * p * p / 27.0;
    const double scale = std::fabs(p * p * p / 27.0) + 0.25 * q * q + 1e-300;

    std::array<std::complex<double>, 3> out;
    if (disc > 1e-13 * scale) {
        // one real root, complex pair
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(-0.5 * q + sq);
        const double v = std::cbrt(-0.5 * q - sq);
        const double t0 = u + v;
        out[0] = {shift + t0, 0.0};
        const double re = -0.5 * t0;
        const double im = 0.5 * std::sqrt(3.0) * std::fabs(u - v);
        out[1] = {shift + re, im};
        out[2] = {shift + re, -im};
        return out;
    }
    if (std::fabs(p) < 1e-300) {
        const double t = std::cbrt(-q);
        out.fill({shift + t, 0.0});
        return out;
    }
    // three real roots, trigonometric form
    const double m = 2.0 * std::sqrt(std::max(-p, 0.0) / 3.0);
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
        double t = m * std::cos(phi - 2.0 * M_PI * k / 3.0);
        // polish on the original cubic; the closed form can lose a few digits
        for (int it = 0; it < 2; ++it) {
            const double lam = shift + t;
            const double f = ((lam + c2) * lam + c1) * lam + c0;
            const double df = (3.0 * lam + 2.0 * c2) * lam + c1;
            if (std::fabs(df) > 1e-300) t -= f / df;
        }
        out[k] = {shift + t, 0.0};
    }
    return out;
}

Vec3 eigvec3(const Mat3& A, double lambda) {
    Mat3 M = A;
    for (int i = 0; i < 3; ++i) M[i][i] -= lambda;
    // null direction from the largest cross product of row pairs
    const Vec3 cands[3] = {cross(M[0], M[1]), cross(M[1], M[2]), cross(M[0], M[2])};
    Vec3 v{1.0, 0.0, 0.0};
    double best = 0.0;
    for (const Vec3& c : cands) {
        const double n = norm(c);
        if (n > best) { best = n; v = (1.0 / n) * c; }
    }
    // polish by shifted inverse iteration
    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) scale = std::max(scale, std::fabs(A[i][j]));
    const double shift = 1e-12 * std::max(scale, 1.0);
    for (int it = 0; it < 2; ++it) {
        Matrix S(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) S(i, j) = M[i][j] + (i == j ? shift : 0.0);
        try {
            std::vector<double> b{v[0], v[1], v[2]};
            LuFactor(std::move(S)).solve_inplace(b);
            Vec3 w{b[0], b[1], b[2]};
            const double n = norm(w);
            if (n > 1e-300) v = (1.0 / n) * w;
        } catch (const Error&) {
            break;  // exactly singular after shift; cross-product vector stands
        }
    }
    // sign convention: largest-magnitude component positive
    int imax = 0;
    for (int i = 1; i < 3; ++i)
        if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
    return v;
}

Eig3 eig3(const Mat3& A) {
    const double c2 = -trace(A);
    const double c1 = A[0][0] * A[1][1] - A[0][1] * A[1][0]
                    + A[0][0] * A[2][2] - A[0][2] * A[2][0]
                    + A[1][1] * A[2][2] - A[1][2] * A[2][1];
    const double c0 = -det3(A);
    const auto roots = cubic_roots(c2, c1, c0);
    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) scale = std::max(scale, std::fabs(A[i][j]));
    for (const auto& r : roots)
        if (std::fabs(r.imag()) > 1e-10 * std::max(scale, 1.0))
            throw Error(Errc::ComplexEigenvalues, "matrix has a complex eigenvalue pair");

    Eig3 out;
    for (int i = 0; i < 3; ++i) out.values[i] = roots[i].real();
    std::sort(out.values.begin(), out.values.end());
    for (int i = 0; i < 3; ++i) out.vectors[i] = eigvec3(A, out.values[i]);
    return out;
}

}  // namespace hetinf
