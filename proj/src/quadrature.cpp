#include "hetinf/quadrature.hpp"

#include <cmath>

#include "hetinf/error.hpp"

namespace hetinf {

// Legendre P_m and P_m' on [-1, 1] by the three-term recurrence.
static void legendre(int m, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    p = (m == 0) ? 1.0 : (m == 1 ? x : p1);
    dp = (m == 0) ? 0.0 : m * (x * p - p0) / (x * x - 1.0);
    if (m == 1) dp = 1.0;
}

GaussRule gauss_nodes(int m) {
    if (m < 2 || m > 7)
        throw Error(Errc::ConfigInvalid, "gauss_nodes supports 2..7 points, got " + std::to_string(m));
    GaussRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        // Chebyshev-type initial guess, Newton to machine precision
        double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double p, dp;
        for (int it = 0; it < 64; ++it) {
            legendre(m, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        legendre(m, x, p, dp);
        // map [-1, 1] -> [0, 1]; reverse order so nodes ascend
        rule.nodes[m - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[m - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

double gauss_integrate(double a, double b, int panels, int m,
                       const std::function<double(double)>& f) {
    const GaussRule rule = gauss_nodes(m);
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double left = a + p * h;
        for (int k = 0; k < m; ++k)
            sum += rule.weights[k] * f(left + rule.nodes[k] * h);
    }
    return sum * h;
}

}  // namespace hetinf
