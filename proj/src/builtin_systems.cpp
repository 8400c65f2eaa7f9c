#include "libra/builtin_systems.hpp"

#include <cmath>
#include <numbers>

namespace libra {

double QuadraticPotential::value(const Vec& q) const {
  return 0.5 * (w_.array().square() * q.array().square()).sum();
}
Vec QuadraticPotential::grad(const Vec& q) const {
  return (w_.array().square() * q.array()).matrix();
}
Mat QuadraticPotential::hess(const Vec&) const {
  return w_.array().square().matrix().asDiagonal();
}

double DoubleWellPotential::value(const Vec& q) const {
  double a = q(0) * q(0) - 1.0;
  double v = a * a;
  if (n_ > 1) v += 0.5 * w_ * w_ * q(1) * q(1) + e_ * q(0) * q(0) * q(1) * q(1);
  return v;
}

Vec DoubleWellPotential::grad(const Vec& q) const {
  Vec g = Vec::Zero(n_);
  g(0) = 4.0 * q(0) * (q(0) * q(0) - 1.0);
  if (n_ > 1) {
    g(0) += 2.0 * e_ * q(0) * q(1) * q(1);
    g(1) = w_ * w_ * q(1) + 2.0 * e_ * q(0) * q(0) * q(1);
  }
  return g;
}

Mat DoubleWellPotential::hess(const Vec& q) const {
  Mat h = Mat::Zero(n_, n_);
  h(0, 0) = 12.0 * q(0) * q(0) - 4.0;
  if (n_ > 1) {
    h(0, 0) += 2.0 * e_ * q(1) * q(1);
    h(0, 1) = h(1, 0) = 4.0 * e_ * q(0) * q(1);
    h(1, 1) = w_ * w_ + 2.0 * e_ * q(0) * q(0);
  }
  return h;
}

double PendulumPotential::value(const Vec& q) const { return -k_ * std::cos(q(0)); }
Vec PendulumPotential::grad(const Vec& q) const { return Vec::Constant(1, k_ * std::sin(q(0))); }
Mat PendulumPotential::hess(const Vec& q) const { return Mat::Constant(1, 1, k_ * std::cos(q(0))); }

double MechanicalHamiltonian::value(const Vec& q, const Vec& p) const {
  return 0.5 * p.squaredNorm() + V_->value(q) - E_;
}
Vec MechanicalHamiltonian::grad_q(const Vec& q, const Vec&) const { return V_->grad(q); }
Vec MechanicalHamiltonian::grad_p(const Vec&, const Vec& p) const { return p; }
Mat MechanicalHamiltonian::hess_qq(const Vec& q, const Vec&) const { return V_->hess(q); }
Mat MechanicalHamiltonian::hess_pq(const Vec&, const Vec&) const { return Mat::Zero(n_, n_); }
Mat MechanicalHamiltonian::hess_pp(const Vec&, const Vec&) const { return Mat::Identity(n_, n_); }

Vec MagneticHamiltonian::vector_potential(const Vec& q) const {
  Vec a(2);
  a << -beta_ * q(1), beta_ * q(0);
  return a;
}

Mat MagneticHamiltonian::vector_potential_jacobian() const {
  Mat dA(2, 2);
  dA << 0.0, -beta_, beta_, 0.0;
  return dA;
}

double MagneticHamiltonian::value(const Vec& q, const Vec& p) const {
  return 0.5 * (p - vector_potential(q)).squaredNorm() + 0.5 * w0_ * w0_ * q.squaredNorm() - E_;
}
Vec MagneticHamiltonian::grad_q(const Vec& q, const Vec& p) const {
  return -vector_potential_jacobian().transpose() * (p - vector_potential(q)) + w0_ * w0_ * q;
}
Vec MagneticHamiltonian::grad_p(const Vec& q, const Vec& p) const {
  return p - vector_potential(q);
}
Mat MagneticHamiltonian::hess_qq(const Vec&, const Vec&) const {
  Mat dA = vector_potential_jacobian();
  return dA.transpose() * dA + w0_ * w0_ * Mat::Identity(2, 2);
}
Mat MagneticHamiltonian::hess_pq(const Vec&, const Vec&) const { return -vector_potential_jacobian(); }
Mat MagneticHamiltonian::hess_pp(const Vec&, const Vec&) const { return Mat::Identity(2, 2); }

double CoshHamiltonian::value(const Vec& q, const Vec& p) const {
  return std::cosh(p(0)) + a_ * p(0) + 0.5 * w_ * w_ * q(0) * q(0) - E_;
}
Vec CoshHamiltonian::grad_q(const Vec& q, const Vec&) const { return Vec::Constant(1, w_ * w_ * q(0)); }
Vec CoshHamiltonian::grad_p(const Vec&, const Vec& p) const {
  return Vec::Constant(1, std::sinh(p(0)) + a_);
}
Mat CoshHamiltonian::hess_qq(const Vec&, const Vec&) const { return Mat::Constant(1, 1, w_ * w_); }
Mat CoshHamiltonian::hess_pq(const Vec&, const Vec&) const { return Mat::Zero(1, 1); }
Mat CoshHamiltonian::hess_pp(const Vec&, const Vec& p) const {
  return Mat::Constant(1, 1, std::cosh(p(0)));
}

double AsymmetricKineticHamiltonian::value(const Vec& q, const Vec& p) const {
  return 0.5 * p.squaredNorm() + g_ * (std::exp(p(0)) - 1.0 - p(0)) + V_->value(q) - E_;
}
Vec AsymmetricKineticHamiltonian::grad_q(const Vec& q, const Vec&) const { return V_->grad(q); }
Vec AsymmetricKineticHamiltonian::grad_p(const Vec&, const Vec& p) const {
  Vec g = p;
  g(0) += g_ * (std::exp(p(0)) - 1.0);
  return g;
}
Mat AsymmetricKineticHamiltonian::hess_qq(const Vec& q, const Vec&) const { return V_->hess(q); }
Mat AsymmetricKineticHamiltonian::hess_pq(const Vec&, const Vec&) const { return Mat::Zero(n_, n_); }
Mat AsymmetricKineticHamiltonian::hess_pp(const Vec&, const Vec& p) const {
  Mat h = Mat::Identity(n_, n_);
  h(0, 0) += g_ * std::exp(p(0));
  return h;
}

std::vector<BuiltinInfo> list_builtin_systems() {
  return {
      {"double_well",
       "1/2|p|^2 + (q1^2-1)^2 + 1/2 omega^2 q2^2 + eps q1^2 q2^2 - energy",
       true,
       {{"omega", 1.5, "transverse frequency"},
        {"eps", 0.0, "coupling q1^2 q2^2"},
        {"energy", 0.5, "energy shift; the working level is H = 0"}},
       "q = (sqrt(1 + sqrt(energy)), 0), p = 0: libration along the q1 axis"},
      {"harmonic",
       "1/2|p|^2 + 1/2(omega1^2 q1^2 + omega2^2 q2^2) - energy",
       true,
       {{"omega1", 1.0, "frequency along q1"},
        {"omega2", 1.0, "frequency along q2 (0 gives a degenerate direction)"},
        {"energy", 0.5, "energy shift"}},
       "q = (sqrt(2 energy)/omega1, 0), p = 0: libration along the q1 axis, T = 2 pi/omega1"},
      {"magnetic",
       "1/2|p - A(q)|^2 + 1/2 omega0^2 |q|^2 - energy, A(q) = beta(-q2, q1)",
       false,
       {{"beta", 0.3, "magnetic field strength"},
        {"omega0", 1.0, "confining frequency"},
        {"energy", 0.5, "energy shift"}},
       "circular orbit q = (r, 0), p = (0, r(Omega + beta)), Omega^2 + 2 beta Omega = omega0^2"},
      {"pendulum",
       "1/2 p^2 - k cos(q) - energy, q periodic with period 2 pi",
       true,
       {{"k", 1.0, "gravity constant"}, {"energy", -0.5, "energy shift, in (-k, k) for librations"}},
       "q = arccos(-energy/k), p = 0"},
      {"cosh",
       "cosh(p) + alpha p + 1/2 omega^2 q^2 - energy (n = 1)",
       false,
       {{"alpha", 0.3, "linear momentum term"},
        {"omega", 1.0, "confining frequency"},
        {"energy", 2.0, "energy shift"}},
       "q on the critical graph p = arcsinh(-alpha) at zero energy"},
      {"asymmetric",
       "1/2|p|^2 + gamma(exp(p1) - 1 - p1) + 1/2(omega1^2 q1^2 + omega2^2 q2^2) - energy",
       false,
       {{"gamma", 0.5, "asymmetry of the kinetic term"},
        {"omega1", 1.0, "frequency along q1"},
        {"omega2", 1.5, "frequency along q2"},
        {"energy", 0.5, "energy shift"}},
       "q = (sqrt(2 energy)/omega1, 0), p = 0: brake orbit in the q1 plane"},
  };
}

namespace {

std::map<std::string, double> resolve(const std::string& name,
                                      const std::map<std::string, double>& params) {
  for (const auto& info : list_builtin_systems()) {
    if (info.name != name) continue;
    std::map<std::string, double> out;
    for (const auto& ps : info.parameters) out[ps.name] = ps.default_value;
    for (const auto& [k, v] : params) {
      if (!out.count(k)) throw ConfigError("system '" + name + "' has no parameter '" + k + "'");
      out[k] = v;
    }
    return out;
  }
  throw ConfigError("unknown system '" + name + "'");
}

}  // namespace

System make_builtin(const std::string& name, const std::map<std::string, double>& params) {
  auto p = resolve(name, params);
  if (name == "double_well") {
    auto V = std::make_shared<DoubleWellPotential>(2, p["omega"], p["eps"]);
    return System(std::make_shared<MechanicalHamiltonian>(2, V, p["energy"], "double_well"));
  }
  if (name == "harmonic") {
    Vec w(2);
    w << p["omega1"], p["omega2"];
    auto V = std::make_shared<QuadraticPotential>(w);
    return System(std::make_shared<MechanicalHamiltonian>(2, V, p["energy"], "harmonic"));
  }
  if (name == "magnetic")
    return System(std::make_shared<MagneticHamiltonian>(p["beta"], p["omega0"], p["energy"]));
  if (name == "pendulum") {
    auto V = std::make_shared<PendulumPotential>(p["k"]);
    System s(std::make_shared<MechanicalHamiltonian>(1, V, p["energy"], "pendulum"));
    s.set_periodic(0, 2.0 * std::numbers::pi);
    return s;
  }
  if (name == "cosh")
    return System(std::make_shared<CoshHamiltonian>(p["alpha"], p["omega"], p["energy"]));
  Vec w(2);
  w << p["omega1"], p["omega2"];
  auto V = std::make_shared<QuadraticPotential>(w);
  return System(std::make_shared<AsymmetricKineticHamiltonian>(2, p["gamma"], V, p["energy"]));
}

std::pair<double, double> double_well_turning_points(double E) {
  if (!(E > 0.0 && E < 1.0)) throw InputError("double-well libration needs energy in (0, 1)");
  return {std::sqrt(1.0 - std::sqrt(E)), std::sqrt(1.0 + std::sqrt(E))};
}

CircularOrbit magnetic_circular_orbit(double beta, double omega0, double E) {
  CircularOrbit c;
  c.omega = -beta + std::sqrt(beta * beta + omega0 * omega0);
  c.radius = std::sqrt(2.0 * E / (c.omega * c.omega + omega0 * omega0));
  c.period = 2.0 * std::numbers::pi / c.omega;
  c.x0 = Vec(4);
  c.x0 << c.radius, 0.0, 0.0, c.radius * (c.omega + beta);
  return c;
}

std::pair<Vec, double> recommended_seed(const std::string& name,
                                        const std::map<std::string, double>& params) {
  auto p = resolve(name, params);
  const double pi = std::numbers::pi;
  if (name == "double_well") {
    auto [a, b] = double_well_turning_points(p["energy"]);
    // T = 2 int_a^b dq / sqrt(2 (b-q)(q-a)(b+q)(q+a)), Gauss-Chebyshev quadrature
    const int N = 64;
    double sum = 0.0;
    for (int k = 1; k <= N; ++k) {
      double q = 0.5 * (a + b) + 0.5 * (b - a) * std::cos((2.0 * k - 1.0) * pi / (2.0 * N));
      sum += 1.0 / std::sqrt(2.0 * (b + q) * (q + a));
    }
    Vec x = Vec::Zero(4);
    x(0) = b;
    return {x, 2.0 * pi / N * sum};
  }
  if (name == "harmonic") {
    Vec x = Vec::Zero(4);
    x(0) = std::sqrt(2.0 * p["energy"]) / p["omega1"];
    return {x, 2.0 * pi / p["omega1"]};
  }
  if (name == "magnetic") {
    auto c = magnetic_circular_orbit(p["beta"], p["omega0"], p["energy"]);
    return {c.x0, c.period};
  }
  if (name == "pendulum") {
    double th = std::acos(-p["energy"] / p["k"]);
    Vec x = Vec::Zero(2);
    x(0) = th;
    return {x, 4.0 * std::comp_ellint_1(std::sin(th / 2.0)) / std::sqrt(p["k"])};
  }
  if (name == "cosh") {
    double a = p["alpha"], w = p["omega"];
    double ps = std::asinh(-a);
    double hmin = std::cosh(ps) + a * ps;
    Vec x(2);
    x << std::sqrt(2.0 * (p["energy"] - hmin)) / w, ps;
    return {x, 2.0 * pi / (w * std::pow(1.0 + a * a, 0.25))};
  }
  Vec x = Vec::Zero(4);
  x(0) = std::sqrt(2.0 * p["energy"]) / p["omega1"];
  return {x, 2.0 * pi / (p["omega1"] * std::sqrt(1.0 + p["gamma"]))};
}

}  // namespace libra
