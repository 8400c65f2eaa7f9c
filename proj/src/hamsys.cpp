#include "libra/hamsys.hpp"
#include "libra/linalg.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace libra {

namespace {

// g(s) = exp(1 - 1/(1-s)) for s < 1, and its first two derivatives.
struct BumpProfile {
  double g = 0, g1 = 0, g2 = 0;
};

BumpProfile bump_profile(double s) {
  BumpProfile b;
  if (s >= 1.0) return b;
  double r = 1.0 / (1.0 - s);
  b.g = std::exp(1.0 - r);
  b.g1 = -b.g * r * r;
  b.g2 = b.g * (r * r * r * r - 2.0 * r * r * r);
  return b;
}

}  // namespace

double BumpPotential::value(const Vec& q) const {
  return amp_ * bump_profile((q - c_).squaredNorm() / (w_ * w_)).g;
}

Vec BumpPotential::grad(const Vec& q) const {
  Vec dq = q - c_;
  auto b = bump_profile(dq.squaredNorm() / (w_ * w_));
  return amp_ * b.g1 * 2.0 * dq / (w_ * w_);
}

Mat BumpPotential::hess(const Vec& q) const {
  Vec dq = q - c_;
  auto b = bump_profile(dq.squaredNorm() / (w_ * w_));
  Vec ds = 2.0 * dq / (w_ * w_);
  Mat I = Mat::Identity(q.size(), q.size());
  return amp_ * (b.g2 * ds * ds.transpose() + b.g1 * 2.0 / (w_ * w_) * I);
}

double TiltedBumpPotential::value(const Vec& q) const {
  Vec dq = q - c_;
  return amp_ * dir_.dot(dq) * bump_profile(dq.squaredNorm() / (w_ * w_)).g;
}

Vec TiltedBumpPotential::grad(const Vec& q) const {
  Vec dq = q - c_;
  auto b = bump_profile(dq.squaredNorm() / (w_ * w_));
  Vec ds = 2.0 * dq / (w_ * w_);
  return amp_ * (dir_ * b.g + dir_.dot(dq) * b.g1 * ds);
}

Mat TiltedBumpPotential::hess(const Vec& q) const {
  Vec dq = q - c_;
  auto b = bump_profile(dq.squaredNorm() / (w_ * w_));
  Vec ds = 2.0 * dq / (w_ * w_);
  Mat I = Mat::Identity(q.size(), q.size());
  Mat gb = b.g2 * ds * ds.transpose() + b.g1 * 2.0 / (w_ * w_) * I;
  Mat cross = b.g1 * (dir_ * ds.transpose() + ds * dir_.transpose());
  return amp_ * (cross + dir_.dot(dq) * gb);
}

double AxisForcingPotential::value(const Vec& q) const {
  double x = (q(i_) - c_) / w_;
  return amp_ * q(j_) * bump_profile(x * x).g;
}

Vec AxisForcingPotential::grad(const Vec& q) const {
  double x = (q(i_) - c_) / w_;
  auto b = bump_profile(x * x);
  double db = b.g1 * 2.0 * x / w_;
  Vec g = Vec::Zero(n_);
  g(j_) += amp_ * b.g;
  g(i_) += amp_ * q(j_) * db;
  return g;
}

Mat AxisForcingPotential::hess(const Vec& q) const {
  double x = (q(i_) - c_) / w_;
  auto b = bump_profile(x * x);
  double db = b.g1 * 2.0 * x / w_;
  double ddb = b.g2 * (2.0 * x / w_) * (2.0 * x / w_) + b.g1 * 2.0 / (w_ * w_);
  Mat h = Mat::Zero(n_, n_);
  h(i_, j_) += amp_ * db;
  h(j_, i_) += amp_ * db;
  h(i_, i_) += amp_ * q(j_) * ddb;
  return h;
}

System::System(std::shared_ptr<const HamiltonianOracle> H, std::shared_ptr<const Potential> u)
    : H_(std::move(H)), u_(std::move(u)) {
  if (!H_) throw InputError("System requires a Hamiltonian");
  if (!u_) u_ = std::make_shared<ZeroPotential>(H_->n());
  periods_.assign(H_->n(), 0.0);
}

System System::perturbed(std::shared_ptr<const Potential> v, double eps) const {
  System s = *this;
  if (eps != 0.0 && v) s.u_ = std::make_shared<CombinedPotential>(u_, 1.0, std::move(v), eps);
  return s;
}

void System::set_periodic(int coord, double period) {
  if (coord < 0 || coord >= n() || !(period > 0))
    throw InputError("set_periodic: invalid coordinate or period");
  periods_[coord] = period;
}

Vec System::difference(const Vec& a, const Vec& b) const {
  Vec d = b - a;
  for (int i = 0; i < n(); ++i)
    if (periods_[i] > 0) d(i) -= periods_[i] * std::round(d(i) / periods_[i]);
  return d;
}

Vec System::join(const Vec& q, const Vec& p) const {
  Vec x(2 * n());
  x << q, p;
  return x;
}

double System::energy(const Vec& x) const {
  Vec q = x.head(n()), p = x.tail(n());
  return H_->value(q, p) + u_->value(q);
}

void System::check_convex(const Vec& q, const Vec& p) const {
  Mat Hpp = H_->hess_pp(q, p);
  if (!Hpp.allFinite()) throw EvaluationError("non-finite fiber Hessian");
  Eigen::LLT<Mat> llt(Hpp);
  if (llt.info() != Eigen::Success)
    throw ConvexityError("fiber Hessian d2H/dp2 is not positive definite");
}

Vec System::vector_field(const Vec& x) const {
  const int k = n();
  Vec q = x.head(k), p = x.tail(k);
  if (guard_convexity) check_convex(q, p);
  Vec f(2 * k);
  f.head(k) = H_->grad_p(q, p);
  f.tail(k) = -H_->grad_q(q, p) - u_->grad(q);
  if (!f.allFinite()) throw EvaluationError("non-finite vector field");
  return f;
}

Vec System::gradient(const Vec& x) const {
  const int k = n();
  Vec q = x.head(k), p = x.tail(k);
  Vec g(2 * k);
  g.head(k) = H_->grad_q(q, p) + u_->grad(q);
  g.tail(k) = H_->grad_p(q, p);
  return g;
}

Mat System::hessian(const Vec& x) const {
  const int k = n();
  Vec q = x.head(k), p = x.tail(k);
  Mat hpq = H_->hess_pq(q, p);
  Mat h(2 * k, 2 * k);
  h.topLeftCorner(k, k) = H_->hess_qq(q, p) + u_->hess(q);
  h.topRightCorner(k, k) = hpq.transpose();
  h.bottomLeftCorner(k, k) = hpq;
  h.bottomRightCorner(k, k) = H_->hess_pp(q, p);
  return h;
}

Mat System::field_jacobian(const Vec& x) const {
  return symplectic_J(n()) * hessian(x);
}

OrbitSegment::OrbitSegment(DenseSolution sol, int n, bool variational, double energy, double drift)
    : sol_(std::move(sol)), n_(n), variational_(variational), energy_(energy), drift_(drift) {}

Vec OrbitSegment::state(double t) const { return sol_(t).head(2 * n_); }

Mat OrbitSegment::fundamental(double t) const {
  if (!variational_) throw InputError("orbit segment carries no fundamental matrix");
  Vec y = sol_(t);
  return Eigen::Map<const Mat>(y.data() + 2 * n_, 2 * n_, 2 * n_);
}

Vec OrbitSegment::final_state() const { return sol_.final_state().head(2 * n_); }

Mat OrbitSegment::final_fundamental() const {
  if (!variational_) throw InputError("orbit segment carries no fundamental matrix");
  const Vec& y = sol_.final_state();
  return Eigen::Map<const Mat>(y.data() + 2 * n_, 2 * n_, 2 * n_);
}

std::vector<Vec> OrbitSegment::node_states() const {
  std::vector<Vec> out;
  for (const auto& y : sol_.node_states()) out.push_back(y.head(2 * n_));
  return out;
}

namespace {

OrbitSegment run(const System& sys, const Vec& x0, double t, const Tolerances& tol,
                 const std::vector<double>& stops, bool variational) {
  const int n = sys.n();
  if (x0.size() != 2 * n) throw DimensionError("phase point has wrong dimension");
  if (!x0.allFinite()) throw InputError("phase point has non-finite entries");
  const int m = 2 * n;
  OdeRhs rhs;
  Vec y0;
  if (variational) {
    y0.resize(m + m * m);
    y0.head(m) = x0;
    Eigen::Map<Mat>(y0.data() + m, m, m).setIdentity();
    rhs = [&sys, m](double, const Vec& y, Vec& dy) {
      Vec x = y.head(m);
      dy.head(m) = sys.vector_field(x);
      Eigen::Map<const Mat> Phi(y.data() + m, m, m);
      Eigen::Map<Mat>(dy.data() + m, m, m) = sys.field_jacobian(x) * Phi;
    };
  } else {
    y0 = x0;
    rhs = [&sys](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); };
  }
  DenseSolution sol = integrate(rhs, 0.0, y0, t, tol.ode(), stops);
  double e0 = sys.energy(x0);
  double drift = 0.0;
  for (const auto& y : sol.node_states()) drift = std::max(drift, std::abs(sys.energy(y.head(m)) - e0));
  if (drift > tol.energy_drift_tol * std::max(1.0, std::abs(e0)))
    throw AccuracyError("energy drift " + std::to_string(drift) + " exceeds tolerance");
  return OrbitSegment(std::move(sol), n, variational, e0, drift);
}

}  // namespace

OrbitSegment flow(const System& sys, const Vec& x0, double t, const Tolerances& tol,
                  const std::vector<double>& stops) {
  return run(sys, x0, t, tol, stops, false);
}

OrbitSegment variational_flow(const System& sys, const Vec& x0, double t, const Tolerances& tol,
                              const std::vector<double>& stops) {
  return run(sys, x0, t, tol, stops, true);
}

Vec flow_map(const System& sys, const Vec& x0, double t, const Tolerances& tol) {
  return flow(sys, x0, t, tol).final_state();
}

DirectionalDerivative directional_derivative_in_u(const System& sys,
                                                  std::shared_ptr<const Potential> v,
                                                  const Vec& x0, double t,
                                                  const std::vector<double>& eps_list,
                                                  const Tolerances& tol) {
  DirectionalDerivative out;
  out.value = Vec::Zero(x0.size());
  if (t == 0.0 || !v) return out;
  if (eps_list.empty()) throw InputError("directional_derivative_in_u: empty eps list");
  std::vector<Vec> D;
  for (double e : eps_list) {
    Vec plus = flow_map(sys.perturbed(v, e), x0, t, tol);
    Vec minus = flow_map(sys.perturbed(v, -e), x0, t, tol);
    D.push_back((plus - minus) / (2.0 * e));
  }
  if (D.size() == 1) {
    out.value = D[0];
    out.converged = false;
    out.warning = "single step size, no extrapolation";
    return out;
  }
  // central differences have an even error expansion, so eliminate the eps^2 term
  std::vector<Vec> R;
  for (std::size_t i = 0; i + 1 < D.size(); ++i) {
    double r = eps_list[i] / eps_list[i + 1];
    R.push_back((r * r * D[i + 1] - D[i]) / (r * r - 1.0));
  }
  out.value = R.back();
  if (R.size() >= 2) {
    double last = (R[R.size() - 1] - R[R.size() - 2]).norm();
    out.error_estimate = last;
    if (R.size() >= 3) {
      double prev = (R[R.size() - 2] - R[R.size() - 3]).norm();
      double scale = std::max(1.0, out.value.norm());
      if (last > prev && last > 1e-9 * scale) {
        out.converged = false;
        out.warning = "Richardson differences are not decreasing";
      }
    }
  } else {
    out.error_estimate = (R.back() - D.back()).norm();
  }
  return out;
}

ContinuityReport check_parameter_continuity(const System& sys, std::shared_ptr<const Potential> v,
                                            const Vec& x0, const ParametricSolver& solver,
                                            const std::vector<double>& eps_grid, double max_C,
                                            double floor) {
  ContinuityReport rep;
  Vec base;
  try {
    base = solver(sys, x0);
  } catch (const Error& e) {
    rep.message = std::string("unperturbed solve failed: ") + e.what();
    return rep;
  }
  rep.ok = true;
  std::vector<double> lx, ly;
  for (double e : eps_grid) {
    rep.eps.push_back(e);
    double disp;
    try {
      disp = (solver(sys.perturbed(v, e), base) - base).norm();
    } catch (const Error& err) {
      rep.displacement.push_back(std::nan(""));
      rep.ok = false;
      rep.message = "solve failed at eps = " + std::to_string(e) + ": " + err.what();
      continue;
    }
    rep.displacement.push_back(disp);
    if (e > 0) rep.fitted_C = std::max(rep.fitted_C, disp / e);
    if (disp > max_C * e + floor) {
      rep.ok = false;
      rep.message = "displacement grows faster than linearly at eps = " + std::to_string(e);
    }
    if (e > 0 && disp > floor) {
      lx.push_back(std::log(e));
      ly.push_back(std::log(disp));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  return rep;
}

}  // namespace libra
