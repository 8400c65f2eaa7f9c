#pragma once

#include "libra/config.hpp"
#include "libra/linsys.hpp"
#include "libra/orbits.hpp"
#include "libra/sympmat.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace libra {

/// Orthonormal configuration frame at a point of an orbit. Frame coordinates are
/// q = qa + O (q0, q*), p = O (p0, p*); the section {q0 = r} on the zero level is
/// the graph p0 = -kappa(r, x*) over x* = (q*, p*).
struct SectionFrame {
  System sys;
  Vec anchor;
  double anchor_time = 0.0;
  Vec qa;
  Mat O;  ///< n x n, first column e0 = qdot / |qdot|

  int n() const { return sys.n(); }
  int d() const { return sys.n() - 1; }
  Vec e0() const { return O.col(0); }
  Mat transverse_frame() const { return O.rightCols(d()); }

  /// (q0, q*, p0, p*) of a phase point and back.
  Vec to_frame(const Vec& x) const;
  Vec from_frame(const Vec& y) const;
  double r(const Vec& x) const { return to_frame(x)(0); }
  Vec xstar(const Vec& x) const;
  /// Solves H + u = 0 for p0 by Newton seeded at the anchor; returns kappa = -p0.
  /// Throws SectionError if Newton fails or the graph condition breaks.
  double kappa(double r, const Vec& xs, const Tolerances& tol = {}) const;
  Vec lift(double r, const Vec& xs, const Tolerances& tol = {}) const;

  /// Gradient and Hessian of H + u in frame coordinates.
  Vec frame_gradient(const Vec& x) const;
  Mat frame_hessian(const Vec& x) const;
  /// Hessian of kappa in x* times dq0/dt at x, i.e. the matrix S with L = J S.
  Mat projected_hessian(const Vec& x) const;
  /// dt/dr = 1 / (d(H + u)/dp0) at x.
  double tau_prime(const Vec& x) const;
};

/// Frame at orbit time t: e0 along qdot, the transverse columns by Householder
/// completion. Throws SectionError when |qdot| is below velocity_floor.
SectionFrame build_section(const PeriodicOrbit& orbit, double t, const Tolerances& tol = {});
SectionFrame build_section(const System& sys, const Vec& anchor, const Tolerances& tol = {});

struct TransitionMap {
  double from_r = 0.0, to_r = 0.0;
  double t_from = 0.0, t_to = 0.0;
  Mat matrix;  ///< 2d x 2d in x* coordinates
  std::vector<double> r_samples;
  std::vector<HamiltonianBlocks> blocks;  ///< blocks of L_r at the samples
  std::vector<double> tau_prime;
  std::vector<Mat> hpp_star;  ///< d2H/dp*dp* at the samples, frame coordinates
  double min_B_eigenvalue = 0.0;
  double symplectic_residual = 0.0;
};

/// Largest time interval around the anchor on which q0 is strictly monotone.
std::pair<double, double> monotone_branch(const SectionFrame& frame, const PeriodicOrbit& orbit,
                                          const Tolerances& tol = {});
/// Orbit time on the anchor's monotone branch where q0 = r.
/// Throws ReparametrizationError when r is not reached on the branch. A precomputed
/// branch may be passed to skip the search.
double section_time(const SectionFrame& frame, const PeriodicOrbit& orbit, double r,
                    const Tolerances& tol = {},
                    const std::pair<double, double>* branch = nullptr);

/// Integrates dPsi/dt = J S(theta(t)) Psi between the crossings of q0 = from_r and
/// q0 = to_r, which is the reduced equation dPsi/dr = tau' L_r Psi in the time variable.
TransitionMap transition_map(const SectionFrame& frame, const PeriodicOrbit& orbit, double from_r,
                             double to_r, const Tolerances& tol = {}, int samples = 41);

/// Linearized flow of the orbit from time s to time t (any real times).
Mat orbit_flow(const PeriodicOrbit& orbit, double s, double t);

/// Section-to-section map from the full variational flow: lift x* at the section of
/// frame a at time s, push by the flow, slide along the vector field onto the
/// section of frame b at time t and read x*.
Mat section_flow(const SectionFrame& a, double s, const SectionFrame& b, double t,
                 const PeriodicOrbit& orbit);

struct ReturnMap {
  Mat matrix;
  double anchor_time = 0.0;
  double symplectic_residual = 0.0;
};

/// Restricted linearized return map at the section through orbit time anchor_time.
/// Throws DecompositionError if no section can be built there.
ReturnMap reduced_return_map(const PeriodicOrbit& orbit, double anchor_time,
                             const Tolerances& tol = {});
/// Anchored at the time of maximal speed.
ReturnMap reduced_return_map(const PeriodicOrbit& orbit, const Tolerances& tol = {});

/// Symplectic basis (2n x 2d) of the Euclidean complement of {grad(H + u), X_H}
/// inside the tangent space, built by symplectic Gram-Schmidt.
Mat reduced_basis(const System& sys, const Vec& x);
/// Coordinates in a reduced basis of a vector of ker d(H + u), modulo X_H.
Mat reduced_coordinates(const Mat& basis, const Mat& v);
/// Reduced linearized flow between two orbit times, frame-free.
Mat reduced_flow(const PeriodicOrbit& orbit, double s, double t);

struct SymmetryDifferential {
  Mat dS;
  Vec image;
  double scale = 1.0;
  Vec dscale;  ///< gradient of the scale; zero on the critical graph
  bool on_gamma = false;
};
/// d(symmetry) by implicit differentiation of H(q, p~) = H(q, p) and
/// dH/dp(q, p~) = -s dH/dp(q, p); the Gamma formula within gamma_tol.
SymmetryDifferential symmetry_differential(const System& sys, const Vec& x,
                                           const Tolerances& tol = {});

/// Reduced symmetry from the reduced space at x to the one at its image.
Mat reduced_symmetry_at(const System& sys, const Vec& x, const Tolerances& tol = {});

/// Reduced symmetry in section coordinates from the blocks of both branches,
/// [[I, 0], [(t~' B~)^{-1} (t' C^T - t~' C~^T), (t' / t~') B~^{-1} B]].
/// Throws NotTwoWayError if the companion point does not cross the section.
Mat reduced_symmetry(const SectionFrame& frame, const PeriodicOrbit& orbit, double r,
                     const Tolerances& tol = {});
/// The same map as the x*-derivative of x* -> x*(symmetry(lift(r, x*))), with the
/// symmetry differentiated by finite differences.
Mat reduced_symmetry_fd(const SectionFrame& frame, const PeriodicOrbit& orbit, double r,
                        const Tolerances& tol = {});

struct PointVerdict {
  double t = 0.0;
  std::array<double, 3> residual{0, 0, 0};  ///< d s . X_H, conformal defect, cocycle derivative
  std::array<bool, 3> pass{false, false, false};
  double tol = 0.0;
  double scale = 1.0;
  bool all() const { return pass[0] && pass[1] && pass[2]; }
};

/// The three reversible-point conditions at theta(t). Throws NotTwoWayError on the
/// critical graph.
PointVerdict check_reversible_point(const PeriodicOrbit& orbit, double t, const Tolerances& tol = {});

struct OrbitVerdict {
  double nu0 = 0.0, nu1 = 0.0;
  double half_period_gap = 0.0;  ///< |nu1 - nu0 - T/2|
  double identity_residual = 0.0;
  std::array<double, 2> antisymplectic_residual{0, 0};
  std::array<double, 2> antisymplectic_limit{0, 0};  ///< Richardson limit along the orbit
  double cocycle_residual = 0.0;  ///< max |L_s^r - L_s^t L_t^r| on the grid
  double cocycle_identity = 0.0;  ///< max |L_s^t - I| on the grid
  double tol = 0.0;
  bool reversible = false;
  bool inconclusive = false;
  std::vector<std::string> diagnostics;
};

/// Reversibility of a round-trip orbit. Throws ClassificationError if the orbit is
/// not certified RoundTrip.
OrbitVerdict check_reversible_orbit(const PeriodicOrbit& orbit, const Tolerances& tol = {},
                                    int cocycle_grid = 4);

struct SectionDerivative {
  std::vector<double> s;
  std::vector<Vec> y_ode, y_fd;        ///< original branch
  std::vector<Vec> ytilde_ode, ytilde_fd;  ///< companion branch
  double discrepancy = 0.0;            ///< max over both branches and the grid
  double fd_error_estimate = 0.0;
  std::string warning;
};

/// Derivative in u of the section trace x*(s) along v, by the forced linear
/// equations y' = tau' (L y + b) with b = (0, -d v / dq*) and by central
/// differences of perturbed flows. Both branches start at the frame anchor.
SectionDerivative potential_derivative_in_section(const SectionFrame& frame,
                                                  const PeriodicOrbit& orbit,
                                                  std::shared_ptr<const Potential> v,
                                                  double s_max, int points = 11,
                                                  const Tolerances& tol = {});

}  // namespace libra
