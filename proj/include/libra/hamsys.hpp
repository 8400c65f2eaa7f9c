#pragma once

#include "libra/config.hpp"
#include "libra/ode.hpp"
#include "libra/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace libra {

/// H(q, p) on a flat phase space of dimension 2n with analytic derivatives.
/// Implementations must be reentrant.
class HamiltonianOracle {
 public:
  virtual ~HamiltonianOracle() = default;
  virtual int n() const = 0;
  virtual double value(const Vec& q, const Vec& p) const = 0;
  virtual Vec grad_q(const Vec& q, const Vec& p) const = 0;
  virtual Vec grad_p(const Vec& q, const Vec& p) const = 0;
  virtual Mat hess_qq(const Vec& q, const Vec& p) const = 0;
  /// Entry (i, j) is d2H / dp_i dq_j.
  virtual Mat hess_pq(const Vec& q, const Vec& p) const = 0;
  virtual Mat hess_pp(const Vec& q, const Vec& p) const = 0;
  virtual std::string name() const { return "hamiltonian"; }
};

/// Additive potential u(q), lifted to phase space by composition with the projection.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual double value(const Vec& q) const = 0;
  virtual Vec grad(const Vec& q) const = 0;
  virtual Mat hess(const Vec& q) const = 0;
};

class ZeroPotential : public Potential {
 public:
  explicit ZeroPotential(int n) : n_(n) {}
  double value(const Vec&) const override { return 0.0; }
  Vec grad(const Vec&) const override { return Vec::Zero(n_); }
  Mat hess(const Vec&) const override { return Mat::Zero(n_, n_); }

 private:
  int n_;
};

/// c1 * u1 + c2 * u2.
class CombinedPotential : public Potential {
 public:
  CombinedPotential(std::shared_ptr<const Potential> u1, double c1,
                    std::shared_ptr<const Potential> u2, double c2)
      : u1_(std::move(u1)), u2_(std::move(u2)), c1_(c1), c2_(c2) {}
  double value(const Vec& q) const override { return c1_ * u1_->value(q) + c2_ * u2_->value(q); }
  Vec grad(const Vec& q) const override { return c1_ * u1_->grad(q) + c2_ * u2_->grad(q); }
  Mat hess(const Vec& q) const override { return c1_ * u1_->hess(q) + c2_ * u2_->hess(q); }

 private:
  std::shared_ptr<const Potential> u1_, u2_;
  double c1_, c2_;
};

/// Radial C-infinity bump amp * exp(1 - 1/(1 - |q-c|^2/w^2)), zero outside the ball.
class BumpPotential : public Potential {
 public:
  BumpPotential(Vec center, double width, double amp)
      : c_(std::move(center)), w_(width), amp_(amp) {}
  double value(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  Mat hess(const Vec& q) const override;

 private:
  Vec c_;
  double w_, amp_;
};

/// amp * (dir . (q - c)) * bump(|q - c| / w): a bump that also forces transversally.
class TiltedBumpPotential : public Potential {
 public:
  TiltedBumpPotential(Vec center, double width, double amp, Vec dir)
      : c_(std::move(center)), dir_(std::move(dir)), w_(width), amp_(amp) {}
  double value(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  Mat hess(const Vec& q) const override;

 private:
  Vec c_, dir_;
  double w_, amp_;
};

/// amp * q[j] * b((q[i] - c) / w) with b a one-dimensional bump. Vanishes with its
/// gradient wherever q[i] is outside (c - w, c + w).
class AxisForcingPotential : public Potential {
 public:
  AxisForcingPotential(int n, int i, int j, double c, double w, double amp)
      : n_(n), i_(i), j_(j), c_(c), w_(w), amp_(amp) {}
  double value(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  Mat hess(const Vec& q) const override;

 private:
  int n_, i_, j_;
  double c_, w_, amp_;
};

/// A Hamiltonian plus potential with optional q-periodic coordinates.
/// The phase point layout is x = (q, p).
class System {
 public:
  System(std::shared_ptr<const HamiltonianOracle> H, std::shared_ptr<const Potential> u = nullptr);

  int n() const { return H_->n(); }
  const HamiltonianOracle& H() const { return *H_; }
  const Potential& u() const { return *u_; }
  std::shared_ptr<const HamiltonianOracle> H_ptr() const { return H_; }
  std::shared_ptr<const Potential> u_ptr() const { return u_; }

  /// Same Hamiltonian with potential u + eps * v.
  System perturbed(std::shared_ptr<const Potential> v, double eps) const;

  void set_periodic(int coord, double period);
  /// Phase-space difference b - a with periodic coordinates reduced to the symmetric range.
  Vec difference(const Vec& a, const Vec& b) const;

  Vec q(const Vec& x) const { return x.head(n()); }
  Vec p(const Vec& x) const { return x.tail(n()); }
  Vec join(const Vec& q, const Vec& p) const;

  double energy(const Vec& x) const;
  /// (dH/dp, -dH/dq - grad u).
  Vec vector_field(const Vec& x) const;
  /// Full gradient of H + u, q-part first.
  Vec gradient(const Vec& x) const;
  /// Full Hessian of H + u in (q, p) ordering.
  Mat hessian(const Vec& x) const;
  /// Derivative of the vector field: J * hessian.
  Mat field_jacobian(const Vec& x) const;

  /// Throws ConvexityError when d2H/dp2 is not positive definite at x.
  void check_convex(const Vec& q, const Vec& p) const;
  bool guard_convexity = true;

 private:
  std::shared_ptr<const HamiltonianOracle> H_;
  std::shared_ptr<const Potential> u_;
  std::vector<double> periods_;  // 0 for non-periodic coordinates
};

/// Dense trajectory of the flow, optionally with the fundamental matrix.
class OrbitSegment {
 public:
  OrbitSegment(DenseSolution sol, int n, bool variational, double energy, double drift);

  double t_begin() const { return sol_.t_begin(); }
  double t_end() const { return sol_.t_end(); }
  int n() const { return n_; }
  bool has_variational() const { return variational_; }
  double energy() const { return energy_; }
  double max_energy_drift() const { return drift_; }

  Vec state(double t) const;
  /// d phi(t - t_begin, x0) / dx0; requires a variational run.
  Mat fundamental(double t) const;
  Vec initial_state() const { return state(t_begin()); }
  Vec final_state() const;
  Mat final_fundamental() const;

  const std::vector<double>& node_times() const { return sol_.node_times(); }
  std::vector<Vec> node_states() const;
  const DenseSolution& dense() const { return sol_; }

 private:
  DenseSolution sol_;
  int n_;
  bool variational_;
  double energy_, drift_;
};

/// Integrates the flow from x0 over time t (either sign).
/// Throws BlowUpError on step collapse and AccuracyError if the energy drift
/// exceeds tol.energy_drift_tol * max(1, |energy|).
OrbitSegment flow(const System& sys, const Vec& x0, double t, const Tolerances& tol = {},
                  const std::vector<double>& stops = {});

/// Flow together with the fundamental matrix, integrated in one pass.
OrbitSegment variational_flow(const System& sys, const Vec& x0, double t,
                              const Tolerances& tol = {},
                              const std::vector<double>& stops = {});

/// Endpoint of the flow only.
Vec flow_map(const System& sys, const Vec& x0, double t, const Tolerances& tol = {});

struct DirectionalDerivative {
  Vec value;
  double error_estimate = 0.0;
  bool converged = true;
  std::string warning;
};

/// Derivative of phi(t, x0, u + eps v) at eps = 0 by central differences over
/// the decreasing eps_list, Richardson-extrapolated.
DirectionalDerivative directional_derivative_in_u(const System& sys,
                                                  std::shared_ptr<const Potential> v,
                                                  const Vec& x0, double t,
                                                  const std::vector<double>& eps_list,
                                                  const Tolerances& tol = {});

/// Any Newton-type solver: maps a system and a seed to a solution vector.
using ParametricSolver = std::function<Vec(const System& sys, const Vec& seed)>;

struct ContinuityReport {
  std::vector<double> eps;
  std::vector<double> displacement;
  double fitted_C = 0.0;  ///< max displacement / eps over the grid
  double slope = 0.0;     ///< log-log slope, 1 for Lipschitz dependence
  bool ok = false;
  std::string message;
};

/// Re-solves under u + eps v for each eps and compares with the eps = 0 solution.
/// A solver failure or growth beyond max_C * eps + floor is reported, not thrown.
ContinuityReport check_parameter_continuity(const System& sys, std::shared_ptr<const Potential> v,
                                            const Vec& x0, const ParametricSolver& solver,
                                            const std::vector<double>& eps_grid,
                                            double max_C = 1e3, double floor = 1e-9);

}  // namespace libra
