#ifndef HETINF_QUADRATURE_HPP
#define HETINF_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace hetinf {

struct GaussRule {
    std::vector<double> nodes;    // ascending, inside (0, 1)
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre nodes and weights on [0, 1] for the collocation engine;
/// m restricted to the supported collocation degrees.
GaussRule gauss_nodes(int m);  // 2 <= m <= 7

/// Composite Gauss-Legendre integration of f over [a, b] with `panels`
/// panels of m points each (m follows the gauss_nodes contract).
double gauss_integrate(double a, double b, int panels, int m,
                       const std::function<double(double)>& f);

}  // namespace hetinf

#endif
