#pragma once

#include "libra/hamsys.hpp"

#include <map>
#include <string>
#include <vector>

namespace libra {

/// 1/2 sum omega_i^2 q_i^2.
class QuadraticPotential : public Potential {
 public:
  explicit QuadraticPotential(Vec omega) : w_(std::move(omega)) {}
  double value(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  Mat hess(const Vec& q) const override;

 private:
  Vec w_;
};

/// (q1^2 - 1)^2 + 1/2 omega^2 q2^2 + eps q1^2 q2^2 (n = 2), or (q^2 - 1)^2 (n = 1).
class DoubleWellPotential : public Potential {
 public:
  DoubleWellPotential(int n, double omega, double eps) : n_(n), w_(omega), e_(eps) {}
  double value(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  Mat hess(const Vec& q) const override;

 private:
  int n_;
  double w_, e_;
};

/// -k cos(q), n = 1.
class PendulumPotential : public Potential {
 public:
  explicit PendulumPotential(double k) : k_(k) {}
  double value(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  Mat hess(const Vec& q) const override;

 private:
  double k_;
};

/// 1/2 |p|^2 + V(q) - E.
class MechanicalHamiltonian : public HamiltonianOracle {
 public:
  MechanicalHamiltonian(int n, std::shared_ptr<const Potential> V, double energy_shift = 0.0,
                        std::string name = "mechanical")
      : n_(n), V_(std::move(V)), E_(energy_shift), name_(std::move(name)) {}
  int n() const override { return n_; }
  double value(const Vec& q, const Vec& p) const override;
  Vec grad_q(const Vec& q, const Vec& p) const override;
  Vec grad_p(const Vec& q, const Vec& p) const override;
  Mat hess_qq(const Vec& q, const Vec& p) const override;
  Mat hess_pq(const Vec& q, const Vec& p) const override;
  Mat hess_pp(const Vec& q, const Vec& p) const override;
  std::string name() const override { return name_; }

 private:
  int n_;
  std::shared_ptr<const Potential> V_;
  double E_;
  std::string name_;
};

/// 1/2 |p - A(q)|^2 + 1/2 omega0^2 |q|^2 - E with A(q) = beta (-q2, q1), n = 2.
class MagneticHamiltonian : public HamiltonianOracle {
 public:
  MagneticHamiltonian(double beta, double omega0, double energy_shift = 0.0)
      : beta_(beta), w0_(omega0), E_(energy_shift) {}
  int n() const override { return 2; }
  double value(const Vec& q, const Vec& p) const override;
  Vec grad_q(const Vec& q, const Vec& p) const override;
  Vec grad_p(const Vec& q, const Vec& p) const override;
  Mat hess_qq(const Vec& q, const Vec& p) const override;
  Mat hess_pq(const Vec& q, const Vec& p) const override;
  Mat hess_pp(const Vec& q, const Vec& p) const override;
  std::string name() const override { return "magnetic"; }

  Vec vector_potential(const Vec& q) const;
  Mat vector_potential_jacobian() const;
  double beta() const { return beta_; }
  double omega0() const { return w0_; }

 private:
  double beta_, w0_, E_;
};

/// cosh(p) + alpha p + 1/2 omega^2 q^2 - E, n = 1.
class CoshHamiltonian : public HamiltonianOracle {
 public:
  CoshHamiltonian(double alpha, double omega, double energy_shift = 0.0)
      : a_(alpha), w_(omega), E_(energy_shift) {}
  int n() const override { return 1; }
  double value(const Vec& q, const Vec& p) const override;
  Vec grad_q(const Vec& q, const Vec& p) const override;
  Vec grad_p(const Vec& q, const Vec& p) const override;
  Mat hess_qq(const Vec& q, const Vec& p) const override;
  Mat hess_pq(const Vec& q, const Vec& p) const override;
  Mat hess_pp(const Vec& q, const Vec& p) const override;
  std::string name() const override { return "cosh"; }

 private:
  double a_, w_, E_;
};

/// 1/2 |p|^2 + gamma (exp(p1) - 1 - p1) + V(q) - E. Convex but not even in p,
/// so the fiber symmetry has a non-constant scale.
class AsymmetricKineticHamiltonian : public HamiltonianOracle {
 public:
  AsymmetricKineticHamiltonian(int n, double gamma, std::shared_ptr<const Potential> V,
                               double energy_shift = 0.0)
      : n_(n), g_(gamma), V_(std::move(V)), E_(energy_shift) {}
  int n() const override { return n_; }
  double value(const Vec& q, const Vec& p) const override;
  Vec grad_q(const Vec& q, const Vec& p) const override;
  Vec grad_p(const Vec& q, const Vec& p) const override;
  Mat hess_qq(const Vec& q, const Vec& p) const override;
  Mat hess_pq(const Vec& q, const Vec& p) const override;
  Mat hess_pp(const Vec& q, const Vec& p) const override;
  std::string name() const override { return "asymmetric_kinetic"; }

 private:
  int n_;
  double g_;
  std::shared_ptr<const Potential> V_;
  double E_;
};

struct ParameterSpec {
  std::string name;
  double default_value;
  std::string description;
};

struct BuiltinInfo {
  std::string name;
  std::string description;
  bool reversible;
  std::vector<ParameterSpec> parameters;
  std::string recommended_seed;  ///< human-readable seed recipe
};

std::vector<BuiltinInfo> list_builtin_systems();

/// Builds a built-in system. Unknown names or parameters raise ConfigError.
System make_builtin(const std::string& name, const std::map<std::string, double>& params = {});

/// Seed (phase point, period guess) recommended for the named system and parameters.
std::pair<Vec, double> recommended_seed(const std::string& name,
                                        const std::map<std::string, double>& params = {});

/// Turning points q1 of the double well along the q1 axis at energy E in (0, 1):
/// inner sqrt(1 - sqrt(E)) and outer sqrt(1 + sqrt(E)).
std::pair<double, double> double_well_turning_points(double E);

/// Radius and angular velocity of the circular orbit of the magnetic system at energy E.
struct CircularOrbit {
  double radius, omega, period;
  Vec x0;
};
CircularOrbit magnetic_circular_orbit(double beta, double omega0, double E);

}  // namespace libra
