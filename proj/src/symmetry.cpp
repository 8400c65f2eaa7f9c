#include "libra/symmetry.hpp"
#include "libra/linalg.hpp"
#include "libra/roots.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace libra {

Vec GammaPoint::x() const {
  Vec out(q.size() + p_star.size());
  out << q, p_star;
  return out;
}

namespace {

// Minimizes p -> H(q, p) - v.p; its stationary point solves dH/dp(q, p) = v.
Vec fiber_newton(const HamiltonianOracle& H, const Vec& q, const Vec& v, Vec p,
                 double newton_tol, double* residual) {
  auto phi = [&](const Vec& pp) { return H.value(q, pp) - v.dot(pp); };
  const double scale = std::max(1.0, v.norm());
  double gnorm = 0.0;
  for (int it = 0; it < 100; ++it) {
    Vec g = H.grad_p(q, p) - v;
    gnorm = g.norm();
    if (!std::isfinite(gnorm)) break;
    Eigen::LLT<Mat> llt(H.hess_pp(q, p));
    if (llt.info() != Eigen::Success)
      throw ConvexityError("fiber Hessian d2H/dp2 is not positive definite");
    Vec step = -llt.solve(g);
    // a small gradient alone is not enough: fibers like exp(p) flatten out without a minimum
    if (gnorm <= newton_tol * scale && step.norm() <= 1e-6 * std::max(1.0, p.norm())) {
      if (residual) *residual = gnorm;
      return p;
    }
    double f0 = phi(p), slope = g.dot(step), alpha = 1.0;
    while (true) {
      Vec trial = p + alpha * step;
      double f1 = phi(trial);
      // near the minimum the decrease of phi drowns in rounding; the gradient test takes over
      if (std::isfinite(f1) &&
          (f1 <= f0 + 1e-4 * alpha * slope || (H.grad_p(q, trial) - v).norm() <= 0.5 * gnorm))
        break;
      alpha *= 0.5;
      if (alpha < 1e-12) {
        alpha = 0.0;
        break;
      }
    }
    if (alpha == 0.0) break;
    p += alpha * step;
  }
  if (std::isfinite(gnorm) && gnorm <= 1e3 * newton_tol * scale) {
    Eigen::LLT<Mat> llt(H.hess_pp(q, p));
    if (llt.info() == Eigen::Success &&
        llt.solve(H.grad_p(q, p) - v).norm() <= 1e-6 * std::max(1.0, p.norm())) {
      if (residual) *residual = gnorm;
      return p;
    }
  }
  throw NoMinimumError("fiber Newton did not converge (|dH/dp - v| = " + std::to_string(gnorm) + ")");
}

}  // namespace

GammaPoint fiber_minimum(const System& sys, const Vec& q, const Tolerances& tol,
                         std::optional<Vec> seed) {
  GammaPoint g;
  g.q = q;
  Vec p0 = seed ? *seed : Vec::Zero(sys.n());
  g.p_star = fiber_newton(sys.H(), q, Vec::Zero(sys.n()), p0, tol.newton_tol, &g.residual);
  return g;
}

Mat dgamma_section(const System& sys, const Vec& q, const Tolerances& tol) {
  GammaPoint g = fiber_minimum(sys, q, tol);
  Eigen::LLT<Mat> llt(sys.H().hess_pp(q, g.p_star));
  if (llt.info() != Eigen::Success) throw ConvexityError("singular fiber Hessian at the minimum");
  return -llt.solve(sys.H().hess_pq(q, g.p_star));
}

Vec legendre_h(const System& sys, const Vec& x) {
  Vec q = sys.q(x);
  return sys.join(q, sys.H().grad_p(q, sys.p(x)));
}

Vec legendre_g(const System& sys, const Vec& q, const Vec& v, const Tolerances& tol,
               std::optional<Vec> seed) {
  Vec p0 = seed ? *seed : Vec::Zero(sys.n());
  return fiber_newton(sys.H(), q, v, p0, tol.newton_tol, nullptr);
}

namespace {

// Newton on (pt, s): dH/dp(q, pt) + s dH/dp(q, p) = 0, H(q, pt) = H(q, p).
bool symmetry_newton(const HamiltonianOracle& H, const Vec& q, const Vec& v, double energy,
                     Vec& pt, double& s, double ftol) {
  const int n = static_cast<int>(q.size());
  for (int it = 0; it < 60; ++it) {
    Vec F(n + 1);
    Vec gt = H.grad_p(q, pt);
    F.head(n) = gt + s * v;
    F(n) = H.value(q, pt) - energy;
    if (!F.allFinite()) return false;
    if (F.norm() <= ftol) return s > 0;
    Mat D = Mat::Zero(n + 1, n + 1);
    D.topLeftCorner(n, n) = H.hess_pp(q, pt);
    D.topRightCorner(n, 1) = v;
    D.bottomLeftCorner(1, n) = gt.transpose();
    Vec step = D.fullPivLu().solve(-F);
    if (!step.allFinite()) return false;
    pt += step.head(n);
    s += step(n);
  }
  return false;
}

}  // namespace

SymmetryResult apply_symmetry(const System& sys, const Vec& x, const Tolerances& tol) {
  const HamiltonianOracle& H = sys.H();
  Vec q = sys.q(x), p = sys.p(x);
  Vec v = H.grad_p(q, p);
  SymmetryResult r;
  if (v.norm() <= tol.gamma_tol) {
    // scale 1 extension; reflecting in velocity coordinates keeps the map C1 across the graph
    r.image = v.norm() == 0.0 ? x : sys.join(q, legendre_g(sys, q, -v, tol, p));
    r.scale = 1.0;
    r.on_gamma = true;
    r.residual_energy = std::abs(H.value(q, sys.p(r.image)) - H.value(q, p));
    return r;
  }
  sys.check_convex(q, p);
  const double energy = H.value(q, p);
  const double ftol = tol.newton_tol * std::max({1.0, std::abs(energy), v.norm()});
  GammaPoint g = fiber_minimum(sys, q, tol);
  Vec pt = 2.0 * g.p_star - p;
  double s = 1.0;
  bool ok = symmetry_newton(H, q, v, energy, pt, s, ftol);
  if (!ok) {
    // the companion lies on the ray -s v in velocity coordinates
    r.used_fallback = true;
    Vec seed = g.p_star;
    auto f = [&](double sig) {
      seed = legendre_g(sys, q, -sig * v, tol, seed);
      return H.value(q, seed) - energy;
    };
    try {
      s = expanding_root(f, 0.0, 1.0, 1e8, 1e-15);
      pt = legendre_g(sys, q, -s * v, tol, g.p_star);
    } catch (const NewtonError& e) {
      throw SymmetryError(std::string("fiber symmetry unsolvable: ") + e.what());
    }
    symmetry_newton(H, q, v, energy, pt, s, ftol);
  }
  r.image = sys.join(q, pt);
  r.scale = s;
  r.residual_proportional = (H.grad_p(q, pt) + s * v).norm();
  r.residual_energy = std::abs(H.value(q, pt) - energy);
  if (!(s > 0) || r.residual_proportional > 1e3 * ftol || r.residual_energy > 1e3 * ftol)
    throw SymmetryError("fiber symmetry unsolvable: residuals " +
                        std::to_string(r.residual_proportional) + ", " +
                        std::to_string(r.residual_energy));
  return r;
}

Mat symmetry_jacobian(const System& sys, const Vec& x, const Tolerances& tol, double h) {
  const int m = static_cast<int>(x.size());
  auto central = [&](double hh) {
    Mat D(m, m);
    for (int j = 0; j < m; ++j) {
      Vec xp = x, xm = x;
      xp(j) += hh;
      xm(j) -= hh;
      D.col(j) = (apply_symmetry(sys, xp, tol).image - apply_symmetry(sys, xm, tol).image) / (2.0 * hh);
    }
    return D;
  };
  Mat D1 = central(h), D2 = central(0.5 * h);
  return (4.0 * D2 - D1) / 3.0;
}

Mat symmetry_jacobian_on_gamma(const System& sys, const Vec& q, const Tolerances& tol) {
  const int n = sys.n();
  Mat D = Mat::Zero(2 * n, 2 * n);
  D.topLeftCorner(n, n).setIdentity();
  D.bottomLeftCorner(n, n) = 2.0 * dgamma_section(sys, q, tol);
  D.bottomRightCorner(n, n) = -Mat::Identity(n, n);
  return D;
}

ModelInvolution model_involution(const ModelFunction& f, const Vec& y, const Vec& x,
                                 double s_limit) {
  ModelInvolution out;
  out.x_tilde = -x;
  if (x.norm() == 0.0) return out;
  const double target = f(y, x);
  auto g = [&](double s) { return f(y, Vec(-s * x)) - target; };
  if (!(g(0.0) < 0.0)) return out;  // below resolution, the extension value applies
  try {
    out.s = expanding_root(g, 0.0, 1.0, s_limit, 1e-15);
  } catch (const NewtonError& e) {
    throw NewtonError(std::string("model involution: ") + e.what());
  }
  out.x_tilde = -out.s * x;
  return out;
}

}  // namespace libra
