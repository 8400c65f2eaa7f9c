#pragma once

#include "libra/config.hpp"
#include "libra/hamsys.hpp"
#include "libra/projected_curve.hpp"
#include "libra/symmetry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace libra {

struct PeriodicOrbit {
  System sys;
  Vec base_point;
  double period = 0.0;
  OrbitSegment segment;  ///< variational run over one period from base_point
  double closure_residual = 0.0;
  bool minimal = true;  ///< false if some T/k also closed within minimality_tol
  std::string note;
};

/// Gauss-Newton on (x, T) for phi(T, x) = x, a phase condition orthogonal to
/// the seed velocity and H + u = energy_target.
/// Throws PeriodCollapseError at or near a fixed point and NewtonError on divergence.
PeriodicOrbit find_periodic_orbit(const System& sys, const Vec& seed, double T_guess,
                                  const Tolerances& tol = {}, double energy_target = 0.0);

/// Re-integrates the base point of an orbit with variational data.
PeriodicOrbit make_periodic_orbit(const System& sys, const Vec& x, double T,
                                  const Tolerances& tol = {});

/// Projection t -> q(theta(t)) of a periodic orbit.
class OrbitProjection : public ProjectedCurve {
 public:
  explicit OrbitProjection(const PeriodicOrbit& orbit) : o_(orbit) {}
  double period() const override { return o_.period; }
  int dim() const override { return o_.sys.n(); }
  Vec Q(double t) const override;
  Vec Qdot(double t) const override;
  Vec Qddot(double t) const override;
  Vec state(double t) const;

 private:
  const PeriodicOrbit& o_;
};

/// Points of Gamma_0 = Gamma intersected with {H + u = 0}, found on the lines of
/// a box grid in configuration space.
struct Gamma0Grid {
  Vec lo, hi;
  int per_dim = 16;
};

/// Fiber-minimum points of the zero level on the grid lines.
std::vector<GammaPoint> sample_gamma0(const System& sys, const Gamma0Grid& grid,
                                      const Tolerances& tol = {});

struct Chord {
  GammaPoint start;
  double duration = 0.0;
  GammaPoint end;
  bool minimal = false;
  bool verified = false;  ///< residuals re-checked at 10x tighter integrator tolerance
  double transversality_sigma_min = 0.0;
  double start_residual = 0.0;  ///< |H + u| at the start
  double end_residual = 0.0;    ///< |dH/dp| at the end
  std::string note;
};

/// Newton on (t, xi) where xi parametrizes Gamma_0 near q_guess, solving
/// dH/dp(phi(t, x(xi))) = 0. Throws NewtonError on failure and
/// PeriodCollapseError if the start is a fixed point.
Chord refine_chord(const System& sys, const Vec& q_guess, double t_guess,
                   const Tolerances& tol = {});

/// Integrates from each sampled Gamma_0 point up to t_max, refines every local
/// minimum of |dH/dp|^2 along the trajectory and keeps the converged chords.
/// Duplicates (same start and duration) are merged. Seeds run on `jobs` threads.
std::vector<Chord> find_chords(const System& sys, double t_max, const Gamma0Grid& grid,
                               const Tolerances& tol = {}, int jobs = 1);

/// Smallest singular value of (dt, dxi) -> d(dH/dp) at the chord end and the
/// verdict sigma_min >= transv_tol.
std::pair<bool, double> chord_transversality(const System& sys, const Chord& chord,
                                             const Tolerances& tol = {});

/// Interior Gamma-return times along phi(s, x), s in (0, duration): local minima
/// of |dH/dp|^2 below gamma_event_tol.
std::vector<double> gamma_returns(const System& sys, const Vec& x, double duration,
                                  const Tolerances& tol = {});

enum class OrbitKind { Neat, RoundTrip, Inconclusive };
std::string to_string(OrbitKind k);

struct OrbitClassification {
  OrbitKind kind = OrbitKind::Inconclusive;
  std::vector<double> degenerate_times;
  std::vector<std::pair<double, double>> sigma_samples;
  std::vector<double> self_intersection_times;
  double neat_begin = 0.0, neat_end = 0.0;
  double revisited_fraction = 0.0;
  std::vector<std::string> diagnostics;
};

OrbitClassification classify_orbit(const PeriodicOrbit& orbit, const Tolerances& tol = {},
                                   const CurveSamplingOptions& opt = {});

/// sigma(t) on R/TZ with sigma' = -1/s(theta(t)) and sigma(nu0) = nu0, where s is the
/// scale of the fiber symmetry. Equivalently sigma'(t) = -s(theta(sigma(t))).
class TimeSymmetry {
 public:
  double operator()(double t) const;
  double derivative(double t) const;
  double nu0 = 0.0, nu1 = 0.0, period = 0.0;
  /// Certificate values.
  double max_projection_residual = 0.0;  ///< max |Q(sigma(t)) - Q(t)| on the check grid
  double fixed_point_residual = 0.0;     ///< |sigma(nu1) - nu1| on the circle
  double derivative_residual = 0.0;      ///< max |sigma'(nu_i) + 1| by finite differences
  int fixed_point_count = 0;

 private:
  friend TimeSymmetry time_symmetry_sigma(const PeriodicOrbit&, double, double, const Tolerances&);
  std::shared_ptr<const DenseSolution> sol_;
  std::function<double(double)> rate_;
};

/// Integrates sigma for a round-trip orbit with turning times nu0, nu1 and verifies
/// it. Throws ClassificationError if the round-trip certificate fails.
TimeSymmetry time_symmetry_sigma(const PeriodicOrbit& orbit, double nu0, double nu1,
                                 const Tolerances& tol = {});

MultipleIntersections count_multiple_intersections(const PeriodicOrbit& orbit,
                                                   const CurveSamplingOptions& opt = {});

}  // namespace libra
