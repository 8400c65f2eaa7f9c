#pragma once

#include "libra/types.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace libra {

/// A closed curve t -> Q(t) in configuration space, periodic with the given period.
class ProjectedCurve {
 public:
  virtual ~ProjectedCurve() = default;
  virtual double period() const = 0;
  virtual int dim() const = 0;
  virtual Vec Q(double t) const = 0;
  virtual Vec Qdot(double t) const = 0;
  virtual Vec Qddot(double t) const = 0;
};

/// Curve given by closures, used for synthetic test curves.
class FunctionCurve : public ProjectedCurve {
 public:
  using Fn = std::function<Vec(double)>;
  FunctionCurve(double period, int dim, Fn q, Fn qdot, Fn qddot)
      : T_(period), dim_(dim), q_(std::move(q)), qd_(std::move(qdot)), qdd_(std::move(qddot)) {}
  double period() const override { return T_; }
  int dim() const override { return dim_; }
  Vec Q(double t) const override { return q_(t); }
  Vec Qdot(double t) const override { return qd_(t); }
  Vec Qddot(double t) const override { return qdd_(t); }

 private:
  double T_;
  int dim_;
  Fn q_, qd_, qdd_;
};

struct CurveSamplingOptions {
  int samples = 4000;             ///< samples per period
  double degenerate_tol = 1e-6;   ///< |Qdot| at a degenerate time, relative to max speed
  double near_degenerate = 1e-2;  ///< polished minima between the two thresholds are ambiguous
  double cluster_factor = 2.0;    ///< resolution eps = factor * longest sample segment
  int min_neat_run = 5;           ///< consecutive clear samples needed to certify a neat interval
};

/// Isolated crossing Q(s) = Q(sigma), s < sigma.
struct SelfIntersection {
  double s = 0.0, sigma = 0.0;
  Vec point;
  double angle = 0.0;  ///< angle between the two tangent vectors
  double residual = 0.0;
};

struct CurveAnalysis {
  double eps = 0.0;  ///< spatial resolution used for branch detection
  double max_speed = 0.0;
  std::vector<double> sample_times;
  std::vector<int> branch_count;  ///< number of curve branches within eps of each sample
  std::vector<double> degenerate_times;
  std::vector<double> ambiguous_minima;  ///< speed minima too small to ignore, too large to certify
  std::vector<SelfIntersection> crossings;
  double revisited_fraction = 0.0;  ///< share of non-degenerate samples near another branch
  bool neat_certified = false;
  double neat_begin = 0.0, neat_end = 0.0;
  std::vector<std::string> diagnostics;
};

/// Samples the curve, locates degenerate times by polishing speed minima,
/// detects self-intersections through a spatial hash of the sampled polyline
/// with pairwise Newton refinement, and looks for a neat interval.
CurveAnalysis analyze_curve(const ProjectedCurve& curve, const CurveSamplingOptions& opt = {});

/// Solves Q(sigma) = Q(t) for sigma near the guess by Gauss-Newton.
/// Returns the refined sigma and the residual |Q(sigma) - Q(t)|.
std::pair<double, double> match_time(const ProjectedCurve& curve, double t, double guess);

struct MultipleIntersections {
  int count = 0;          ///< configuration points with at least three preimages
  int double_points = 0;  ///< isolated transverse crossings
  bool inconclusive = false;
  std::vector<Vec> points;
  std::string message;
};

/// Counts configuration points visited at three or more distinct times.
/// Candidates from the branch count are confirmed by least squares on the
/// preimage times; unconfirmed candidates make the result inconclusive and
/// count only the confirmed ones as a lower bound.
MultipleIntersections count_multiple_intersections(const ProjectedCurve& curve,
                                                   const CurveSamplingOptions& opt = {});

/// t reduced to [0, T).
double wrap_time(double t, double T);
/// Signed distance a - b on the circle of length T, in [-T/2, T/2).
double circle_diff(double a, double b, double T);

}  // namespace libra
