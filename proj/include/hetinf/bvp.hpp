#ifndef HETINF_BVP_HPP
#define HETINF_BVP_HPP

#include <functional>
#include <string>
#include <vector>

#include "hetinf/chart.hpp"
#include "hetinf/linalg.hpp"
#include "hetinf/quadrature.hpp"
#include "hetinf/vec3.hpp"

namespace hetinf {

/// Orthogonal collocation over a mesh of [0, 1]: ntst intervals, degree-ncol
/// polynomial per interval represented by its values on the ncol+1 equispaced
/// nodes of the interval, collocated at the Gauss points.  make_mesh starts
/// uniform; adapt_meshes may redistribute the breakpoints while the interval
/// count, and with it the unknown layout, stays fixed.
struct Mesh {
    int ntst = 0, ncol = 0;
    std::vector<double> tm;      // ntst+1 breakpoints, tm[0] = 0, tm[ntst] = 1
    std::vector<double> zeta;    // ncol Gauss nodes in (0, 1)
    std::vector<double> wgauss;  // weights, sum 1
    Matrix bval;                 // ncol x (ncol+1): L_i(zeta_k)
    Matrix bder;                 // ncol x (ncol+1): L_i'(zeta_k), reference scale

    int nfine() const { return ntst * ncol; }
    double h(int j) const { return tm[j + 1] - tm[j]; }
    double tfine(int g) const {
        const int j = g / ncol;
        if (j >= ntst) return 1.0;
        return tm[j] + h(j) * (g - j * ncol) / ncol;
    }
    int interval_of(double t) const;
};

Mesh make_mesh(int ntst, int ncol);

/// Values / derivatives of the Lagrange basis over arbitrary nodes.
std::vector<double> lagrange_vals(const std::vector<double>& nodes, double s);
std::vector<double> lagrange_ders(const std::vector<double>& nodes, double s);

/// Dynamics of one segment: du/dt = T * f(t, u, p) on t in [0, 1], where the
/// time scale T is either a designated scalar unknown or the constant 1.
struct SegmentDyn {
    std::function<Vec3(double, const Vec3&, const std::vector<double>&)> f;
    std::function<Mat3(double, const Vec3&, const std::vector<double>&)> dfdx;
    // d f / d p_k excluding the time-scale factor; empty means identically 0
    std::function<Vec3(int, double, const Vec3&, const std::vector<double>&)> dfdp;
    int t_scalar = -1;
};

enum class AnchorSide { Left, Right };

/// The three boundary rows tied to one endpoint of a segment.  They are kept
/// inside the banded core, so they may involve only that endpoint plus the
/// scalar unknowns.
struct AnchorDef {
    AnchorSide side = AnchorSide::Left;
    std::function<Vec3(const Vec3&, const std::vector<double>&)> g;
    // optional analytic derivatives; forward differences fill the gaps
    std::function<Mat3(const Vec3&, const std::vector<double>&)> dg_dx;
    std::function<void(const Vec3&, const std::vector<double>&, Matrix&)> dg_dp;  // 3 x P
};

struct SegmentSpec {
    ChartId chart = ChartId::Original;
    Mesh mesh;
    SegmentDyn dyn;
    AnchorDef anchor;
};

struct BvpLayout {
    std::vector<int> seg_off;    // offset of each segment's fine states
    std::vector<int> seg_nfine;  // fine interval count per segment
    int p_off = 0;               // offset of the scalars
    int n_scalars = 0;
    int n_total = 0;
    int n_core_eq = 0;           // sum over segments of 3*nfine + 3

    int ix_node(int s, int g, int c) const { return seg_off[s] + 3 * g + c; }
    int ix_scalar(int k) const { return p_off + k; }
};

/// Read-only window onto an unknown vector, handed to border rows, monitors
/// and stop predicates.
class BvpView {
  public:
    BvpView(const BvpLayout* lay, const double* x) : lay_(lay), x_(x) {}

    double scalar(int k) const { return x_[lay_->ix_scalar(k)]; }
    Vec3 node(int s, int g) const {
        const int o = lay_->ix_node(s, g, 0);
        return {x_[o], x_[o + 1], x_[o + 2]};
    }
    Vec3 left(int s) const { return node(s, 0); }
    Vec3 right(int s) const { return node(s, lay_->seg_nfine[s]); }
    const double* raw() const { return x_; }
    const BvpLayout& layout() const { return *lay_; }

  private:
    const BvpLayout* lay_;
    const double* x_;
};

/// A scalar condition coupling anything to anything; lives in the border of
/// the linear solves.  grad must accumulate the full-length gradient.
struct BorderRowDef {
    std::function<double(const BvpView&)> r;
    std::function<void(const BvpView&, double* grad)> grad;
};

struct BvpProblem {
    std::vector<SegmentSpec> segs;
    int n_scalars = 0;
    std::vector<std::string> scalar_names;
    std::vector<BorderRowDef> rows;
    // invoked by the continuation driver after each accepted point
    std::function<void(const std::vector<double>&)> on_accept;
};

BvpLayout layout_of(const BvpProblem& prob);

/// Residual of the discretized system.  Equation ordering: per segment
/// [left anchor?; collocation; right anchor?], then declared rows, then
/// extras.  Collocation rows are scaled by the interval width h, so entries
/// measure state increments per interval.
void bvp_residual(const BvpProblem& prob, const BvpLayout& lay,
                  const std::vector<double>& x, std::vector<double>& out,
                  const std::vector<BorderRowDef>* extra = nullptr);

/// Damped Newton on the full system; the linear algebra runs banded cores
/// (one per segment) bordered by the scalar columns and the non-anchor rows.
/// Requires a square system including extras; throws IllPosedProblem else and
/// SingularJacobian when a core or Schur factorization breaks down.
NewtonResult bvp_newton(const BvpProblem& prob, const BvpLayout& lay,
                        std::vector<double>& x, const NewtonOptions& opt = {},
                        const std::vector<BorderRowDef>* extra = nullptr);

/// Collocation polynomial of one segment at normalized time t, from the fine
/// node states inside x; and its d/dt.
Vec3 bvp_eval(const BvpProblem& prob, const BvpLayout& lay,
              const std::vector<double>& x, int seg, double t);
Vec3 bvp_eval_deriv(const BvpProblem& prob, const BvpLayout& lay,
                    const std::vector<double>& x, int seg, double t);

/// Sampled trajectory data over normalized time [0, 1], ascending, with
/// normalized-time derivatives; the raw material for discretize and for
/// orbit export.
struct SampledCurve {
    std::vector<double> t;
    std::vector<Vec3> x;
    std::vector<Vec3> dx;
};

/// Fine node states from sampled data: cubic Hermite onto the fine grid,
/// endpoints preserved exactly.  Throws MeshTooCoarse when the degree-ncol
/// interval polynomials cannot reproduce the samples to 1% of the data
/// amplitude.
std::vector<Vec3> discretize(const SampledCurve& data, const Mesh& mesh);

/// Redistribute every segment's breakpoints so the estimated interpolation
/// error density is equidistributed (the classic piecewise-polynomial rule:
/// the highest derivative of the collocation polynomial, differenced across
/// neighboring intervals, to the power 1/(ncol+1)), then resample the fine
/// states of x, and of x2 when given, onto the new meshes.  Layout and
/// interval counts are unchanged; x is no longer a collocation solution
/// afterwards and wants a fresh Newton correction.
void adapt_meshes(BvpProblem& prob, const BvpLayout& lay, std::vector<double>& x,
                  std::vector<double>* x2 = nullptr);

}  // namespace hetinf

#endif
