#ifndef HETINF_LINS_HPP
#define HETINF_LINS_HPP

#include <memory>
#include <vector>

#include "hetinf/bvp.hpp"
#include "hetinf/continuation.hpp"
#include "hetinf/eigenstructure.hpp"
#include "hetinf/orbit.hpp"
#include "hetinf/params.hpp"
#include "hetinf/periodic.hpp"

namespace hetinf {

/// Two-segment boundary value problems for connecting orbits that leave the
/// neighborhood of the equilibrium at infinity and end near a finite
/// invariant set, split at the section {x = 0} with normal n = (1, 0, 0).
///
/// Segment uB lives in the blow-up chart, anchored on the critical cylinder:
///   uB(0) = cylinder_point(theta_B, delta_B).
/// Segment u lives in the ambient chart, anchored near the finite target:
///   u(1) = delta_0 * e_s           (saddle modes)
///   u(1) = base + delta_0 * e_F    (periodic mode)
/// and u(0) lies in the section.  The segments meet through the glue map up
/// to a gap along the frozen Lin direction Psi:
///   glue(uB(1)) - u(0) - eta * Psi = 0,
/// so eta is the single signed measure of non-connection; eta = 0 is a
/// connecting orbit.  In the HetInfinity mode eta is identically zero and
/// both system parameters are free instead.
enum class LinMode { GapInBeta, HetInfinity, PeriodicGap };
const char* lin_mode_name(LinMode m);

struct SeedOptions {
    double delta0 = -1e-4;  // signed offset along the stable object; the
                            // negative sign picks the branch of W^s(0) that
                            // runs backward into y > 0 for the reference
                            // orientation of e_s
    double deltaB = 0.1;    // cylinder height
    double theta0 = 0.0;    // initial cylinder angle
    int crossing_u = 3;     // backward section crossing ending segment u
    int crossing_uB = 0;    // forward crossing ending segment uB; 0 = nearest gap
    int ntstB = 0;          // uB mesh intervals; 0 sizes them from the flight time
    double max_time = 700.0;  // enough for the slow climb away from the cylinder
    double ode_tol = 1e-10;
};

/// Everything needed to rebuild a LinProblem besides the unknown vector.
struct LinSetup {
    LinMode mode = LinMode::GapInBeta;
    Params params;  // base values; free ones are shadowed by scalars
    int ntst = 200, ncol = 4;
    int ntstB = 0;  // mesh intervals of segment uB; <= 0 means same as ntst.
                    // uB winds around the cylinder once per pi time units, so
                    // the factories size this from the seeded flight time.
    double delta0 = -1e-4;
    double deltaB = 0.1;
    Vec3 psi{};
    double eta0 = 0.0;
    Vec3 es_ref{};     // sign reference for the saddle eigenvector
    Vec3 pbase{};      // PeriodicGap: base point on the orbit
    Vec3 efloquet{};   // PeriodicGap: unit stable-bundle direction there
};

struct LinSeedInfo {
    OrbitSegment u, uB;
    std::vector<Vec3> uB_crossings;  // blow-up-chart section states seen forward
    int crossing_used = 0;           // 1-based index of the chosen one
    Vec3 psi{};
    double eta0 = 0.0;
};

/// Owner of the two-segment BVP.  Not copyable: the problem's callbacks
/// capture this object.
class LinProblem {
  public:
    LinProblem(const LinSetup& setup, std::vector<double> x);
    LinProblem(const LinProblem&) = delete;
    LinProblem& operator=(const LinProblem&) = delete;

    BvpProblem& problem() { return prob_; }
    const BvpProblem& problem() const { return prob_; }
    const BvpLayout& layout() const { return lay_; }
    std::vector<double>& unknowns() { return x_; }
    const std::vector<double>& unknowns() const { return x_; }

    /// Install segment breakpoints (uB, then u), e.g. recorded from an
    /// adapted run; sizes must match the interval counts.
    void set_mesh_times(const std::vector<double>& tmB, const std::vector<double>& tm0);

    /// setup with the sign reference as currently tracked
    LinSetup snapshot() const;

    // scalar indices; -1 when the quantity is fixed in this mode
    int iT0() const { return 0; }
    int iTB() const { return 1; }
    int iTheta() const { return 2; }
    int iEta() const { return setup_.mode == LinMode::HetInfinity ? -1 : 3; }
    int iAlpha() const { return setup_.mode == LinMode::HetInfinity ? 3 : -1; }
    int iBeta() const { return setup_.mode == LinMode::PeriodicGap ? -1 : 4; }
    int iDelta0() const { return setup_.mode == LinMode::PeriodicGap ? 4 : -1; }
    /// the natural continuation scalar of the mode
    int primary() const;

    double scalar(int k) const { return x_[lay_.ix_scalar(k)]; }
    Params params_at(const std::vector<double>& p) const;
    Params current_params() const;

    /// Newton at the current point with the primary scalar pinned.
    NewtonResult correct(const NewtonOptions& opt = {});

    /// fine-node trajectory of a segment: 0 = uB (blow-up chart), 1 = u
    OrbitSegment segment(int which) const;

    /// saddle eigenvector at p, sign-aligned with the tracked reference
    Vec3 stable_direction(const std::vector<double>& p) const;

  private:
    void build();
    LinSetup setup_;
    Mesh meshB_, mesh0_;
    BvpProblem prob_;
    BvpLayout lay_;
    std::vector<double> x_;
    Vec3 es_ref_{};
};

/// Seed a GapInBeta problem at fixed parameters: fly segment u backward from
/// delta0 * e_s to its crossing_u-th section crossing, fly segment uB forward
/// from the critical cylinder, pair the section states through the glue map,
/// freeze Psi from the initial gap.
std::unique_ptr<LinProblem> make_saddle_connection(const Params& ps, const SeedOptions& opts,
                                                   int ntst, int ncol,
                                                   LinSeedInfo* info = nullptr);

/// Rewire a solved GapInBeta problem (eta already driven to zero) into the
/// two-parameter HetInfinity problem.
std::unique_ptr<LinProblem> make_het_problem(const LinProblem& solved);

/// Seed a PeriodicGap problem against a periodic orbit with its Floquet
/// bundle; bundle_sign picks the side of the orbit.
std::unique_ptr<LinProblem> make_periodic_connection(const PeriodicOrbit& po,
                                                     const FloquetData& fl,
                                                     const SeedOptions& opts, int ntst, int ncol,
                                                     double bundle_sign,
                                                     LinSeedInfo* info = nullptr);

struct CloseGapResult {
    bool found = false;
    double param_star = 0.0;          // primary scalar where eta vanishes
    std::vector<Branch> branches;     // one per attempted direction
};

/// Continue the problem in its primary scalar within [lo, hi], both
/// directions if needed, until eta crosses zero; on success the problem is
/// left parked on the located zero.
CloseGapResult close_gap(LinProblem& lp, double lo, double hi, const ContinuationOptions& base);

/// Trace the two-parameter connection curve of a HetInfinity problem in one
/// direction until alpha leaves [alpha_lo, alpha_hi]; alpha-folds are
/// recorded on the branch.
Branch continue_het(LinProblem& het, double direction, double alpha_lo, double alpha_hi,
                    const ContinuationOptions& base);

// seeding pieces, exposed for the unit tests and the command line
OrbitSegment seed_backward_to_section(const Params& ps, const Vec3& u_end, int crossing_index,
                                      const SeedOptions& opts);
struct InfinitySeed {
    OrbitSegment orbit;              // up to the last recorded crossing
    std::vector<double> cross_t;     // physical crossing times
    std::vector<Vec3> cross_x;
};
InfinitySeed seed_infinity_segment(const Params& ps, const SeedOptions& opts, int max_crossings);

}  // namespace hetinf

#endif
