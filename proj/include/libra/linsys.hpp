#pragma once

#include "libra/config.hpp"
#include "libra/jet.hpp"
#include "libra/ode.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace libra {

/// Two Hamiltonian curves L, Lt of size 2d with non-vanishing scalar curves a, at:
/// x' = a L x + a b and y' = at Lt y + at b.
struct LinearSystemPair {
  Curve L, Lt, a, at;

  int d() const { return L.rows() / 2; }
  double T() const { return L.T(); }
  /// Checks shapes, the Hamiltonian structure, the invertibility of the B block of Lt
  /// and the sign of a and at on a grid. Throws InputError or InvertibilityError.
  void validate(int nodes = 101, double floor = 1e-8) const;
};

enum class Branch { Original, Companion };

/// b(t) = (0, amp * dir * bump((t - center) / width)), supported in (center - width, center + width).
struct ForcingCurve {
  Vec dir;
  double center = 0.5, width = 0.1, amp = 1.0;

  double lo() const { return center - width; }
  double hi() const { return center + width; }
  Vec operator()(double t) const;
};

/// Random bumps with supports strictly inside (0, T) and unit directions.
std::vector<ForcingCurve> random_bump_ensemble(int d, double T, int count, std::uint64_t seed);

/// Solution of the selected system from x0 under the sum of the forcings.
DenseSolution solve_forced(const LinearSystemPair& pair, Branch which,
                           const std::vector<ForcingCurve>& b, const Vec& x0,
                           const OdeOptions& opt = {});

/// Same with an arbitrary forcing b(t) in R^{2d}; `stops` marks its kinks.
DenseSolution solve_forced(const LinearSystemPair& pair, Branch which,
                           const std::function<Vec(double)>& b, const Vec& x0,
                           const OdeOptions& opt = {}, const std::vector<double>& stops = {});

/// Resolvent Psi_s^t of the homogeneous system.
Mat resolvent(const LinearSystemPair& pair, Branch which, double s, double t,
              const OdeOptions& opt = {});

/// [[I, 0], [(at Bt)^{-1} (a C^T - at Ct^T), (a / at) Bt^{-1} B]] as a jet in t.
/// Throws InvertibilityError when Bt is singular.
Jet candidate_conjugacy_jet(const LinearSystemPair& pair, double t, int order);
Mat candidate_conjugacy(const LinearSystemPair& pair, double t);
/// The candidate as a curve, with one derivative less than the pair provides.
Curve candidate_conjugacy_curve(const LinearSystemPair& pair);

struct ConjugacyResidual {
  double ode = 0.0;        ///< max over nodes of |R' + a R L - at Lt R|
  double resolvent = 0.0;  ///< max over (s, r) pairs of |R_r Psi_s^r - Psit_s^r R_s|
};
ConjugacyResidual conjugacy_ode_residual(const LinearSystemPair& pair, const Curve& R,
                                         int nodes = 101, int pairs = 8);

/// M_1 = I, M_{n+1} = M_n' + a M_n L evaluated at the given times; entry [n - 2][k]
/// holds M_n(times[k]) for n = 2..n_max. Throws CapabilityError if the curves lack
/// derivatives of order n_max - 1.
std::vector<std::vector<Mat>> m_sequence(const Curve& L, const Curve& a, int n_max,
                                         const std::vector<double>& times);

/// Upper-right d x d block.
Mat upper_right(const Mat& M);

struct ThreeConditions {
  double residual[3] = {0, 0, 0};
  bool pass[3] = {false, false, false};
  double tol = 0.0;
  bool all() const { return pass[0] && pass[1] && pass[2]; }
};

/// 1: total variation of at / a; 2: max over nodes of |lower-right block of R - (at/a) I|
/// plus the asymmetry of the lower-left block; 3: conjugacy residual of the candidate.
ThreeConditions check_three_conditions(const LinearSystemPair& pair, const Tolerances& tol = {},
                                       int nodes = 101);

/// max over the ensemble and a time grid of |pi(x) - pi(y)|, both solutions from 0.
double projection_agreement(const LinearSystemPair& pair, const std::vector<ForcingCurve>& b,
                            const OdeOptions& opt = {}, int samples = 200);

/// Pair conjugated by R_t = [[I, 0], [s_t, alpha I]] with at = alpha a and
/// Lt = (R' R^{-1} + a R L R^{-1}) / at. s_t solves the Riccati equation
/// s' = -a (s C^T + C s - s B s / alpha) from s0, which keeps the A block.
/// Throws ConstructionError if s_t loses symmetry or blows up.
LinearSystemPair build_conjugate_pair(const Curve& L, const Curve& a, double alpha, const Mat& s0,
                                      const Tolerances& tol = {});

/// Hand-built violations of one condition each: a time-scale ratio that drifts in t,
/// a momentum block of Lt scaled by (1 + strength), or a position block of Lt
/// shifted by -strength I.
enum class Violation { ScaleRatio, MomentumBlock, PositionBlock };
std::string to_string(Violation v);
LinearSystemPair violate(const LinearSystemPair& pair, Violation which, double strength);

/// Smooth random Hamiltonian curve on [0, T] with analytic derivatives and a
/// positive definite B block.
Curve random_hamiltonian_curve(int d, double T, std::mt19937_64& rng);
/// 1 + c sin(w t + phi) with |c| < 1.
Curve random_positive_scalar(double T, std::mt19937_64& rng);

}  // namespace libra
