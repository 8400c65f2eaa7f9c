#pragma once

#include "libra/hamsys.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace libra::testing {

/// Central-difference Jacobian of f at x.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// u(q) = c . q
class LinearPotential : public Potential {
 public:
  explicit LinearPotential(Vec c) : c_(std::move(c)) {}
  double value(const Vec& q) const override { return c_.dot(q); }
  Vec grad(const Vec&) const override { return c_; }
  Mat hess(const Vec&) const override { return Mat::Zero(c_.size(), c_.size()); }

 private:
  Vec c_;
};

}  // namespace libra::testing

namespace libra::testing {

/// A convex Hamiltonian with q-dependent fiber metric, a magnetic-like linear
/// term and an odd exponential part, so that the fiber symmetry has a
/// non-constant scale and a non-trivial critical graph.
class GenericConvexH : public HamiltonianOracle {
 public:
  int n() const override { return 2; }
  double value(const Vec& q, const Vec& p) const override {
    return 0.5 * (1 + 0.3 * q(0) * q(0)) * p(0) * p(0) + 0.5 * p(1) * p(1) +
           0.4 * std::sin(q(1)) * p(0) + 0.2 * p(0) * p(1) + 0.3 * std::exp(0.5 * p(1)) +
           0.5 * q.squaredNorm() - 1.0;
  }
  Vec grad_q(const Vec& q, const Vec& p) const override {
    Vec g(2);
    g << 0.3 * q(0) * p(0) * p(0) + q(0), 0.4 * std::cos(q(1)) * p(0) + q(1);
    return g;
  }
  Vec grad_p(const Vec& q, const Vec& p) const override {
    Vec g(2);
    g << (1 + 0.3 * q(0) * q(0)) * p(0) + 0.4 * std::sin(q(1)) + 0.2 * p(1),
        p(1) + 0.2 * p(0) + 0.15 * std::exp(0.5 * p(1));
    return g;
  }
  Mat hess_qq(const Vec& q, const Vec& p) const override {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 0.3 * p(0) * p(0) + 1.0;
    h(1, 1) = -0.4 * std::sin(q(1)) * p(0) + 1.0;
    return h;
  }
  Mat hess_pq(const Vec& q, const Vec& p) const override {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 0.6 * q(0) * p(0);
    h(0, 1) = 0.4 * std::cos(q(1));
    return h;
  }
  Mat hess_pp(const Vec& q, const Vec& p) const override {
    Mat h(2, 2);
    h << 1 + 0.3 * q(0) * q(0), 0.2, 0.2, 1 + 0.075 * std::exp(0.5 * p(1));
    return h;
  }
  std::string name() const override { return "generic_convex"; }
};

}  // namespace libra::testing
