#include "libra/reduced.hpp"

#include "libra/linalg.hpp"
#include "libra/roots.hpp"
#include "libra/symmetry.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace libra {

namespace {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

Mat block_frame(const Mat& O) {
  const int n = static_cast<int>(O.rows());
  Mat B = Mat::Zero(2 * n, 2 * n);
  B.topLeftCorner(n, n) = O;
  B.bottomRightCorner(n, n) = O;
  return B;
}

// Positions of (q*, p*) inside (q0, q*, p0, p*).
std::vector<int> star_index(int n) {
  std::vector<int> idx;
  for (int i = 1; i < n; ++i) idx.push_back(i);
  for (int i = 1; i < n; ++i) idx.push_back(n + i);
  return idx;
}

Vec orbit_state(const PeriodicOrbit& o, double t) { return o.segment.state(wrap_time(t, o.period)); }

Mat fundamental_at(const PeriodicOrbit& o, double t) {
  double k = std::floor(t / o.period);
  double tau = t - k * o.period;
  if (tau >= o.period) tau = o.period;
  Mat P = o.segment.fundamental(tau);
  if (k == 0) return P;
  Mat M = o.segment.final_fundamental();
  Mat step = k > 0 ? M : Mat(M.partialPivLu().inverse());
  for (int i = 0; i < std::abs(static_cast<int>(k)); ++i) P = P * step;
  return P;
}

// Lift of x* directions at x into frame coordinates on ker d(H + u) with dq0 = 0.
Mat section_lift(const SectionFrame& f, const Vec& x) {
  const int n = f.n(), d = f.d();
  Vec G = f.frame_gradient(x);
  if (std::abs(G(n)) < 1e-14) throw SectionError("section lift: graph condition fails");
  auto idx = star_index(n);
  Mat Lf = Mat::Zero(2 * n, 2 * d);
  for (int j = 0; j < 2 * d; ++j) {
    Lf(idx[j], j) = 1.0;
    Lf(n, j) = -G(idx[j]) / G(n);
  }
  return Lf;
}

Mat select_star(const Mat& Y, int n) {
  auto idx = star_index(n);
  Mat out(idx.size(), Y.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = Y.row(idx[i]);
  return out;
}

double symmetric_min_eig(const Mat& B) {
  if (B.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.transpose()));
  return es.eigenvalues()(0);
}

}  // namespace

Vec SectionFrame::to_frame(const Vec& x) const {
  const int m = n();
  Vec y(2 * m);
  y.head(m) = O.transpose() * (x.head(m) - qa);
  y.tail(m) = O.transpose() * x.tail(m);
  return y;
}

Vec SectionFrame::from_frame(const Vec& y) const {
  const int m = n();
  Vec x(2 * m);
  x.head(m) = qa + O * y.head(m);
  x.tail(m) = O * y.tail(m);
  return x;
}

Vec SectionFrame::xstar(const Vec& x) const {
  Vec y = to_frame(x);
  auto idx = star_index(n());
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = y(idx[i]);
  return out;
}

double SectionFrame::kappa(double r, const Vec& xs, const Tolerances& tol) const {
  const int m = n(), dd = d();
  Vec y(2 * m);
  y(0) = r;
  y.segment(1, dd) = xs.head(dd);
  y(m) = to_frame(anchor)(m);
  y.tail(dd) = xs.tail(dd);
  auto F = [&](double p0) {
    Vec z = y;
    z(m) = p0;
    return sys.energy(from_frame(z));
  };
  double p0 = y(m);
  double f = F(p0);
  for (int it = 0; it < 60; ++it) {
    if (std::abs(f) <= tol.newton_tol) return -p0;
    Vec z = y;
    z(m) = p0;
    double g = frame_gradient(from_frame(z))(m);
    if (std::abs(g) < tol.velocity_floor)
      throw SectionError("kappa: graph condition fails (d(H + u)/dp0 vanishes)");
    double step = -f / g, lam = 1.0;
    double fn = F(p0 + step);
    while (std::abs(fn) > std::abs(f) && lam > 1e-6) {
      lam *= 0.5;
      fn = F(p0 + lam * step);
    }
    p0 += lam * step;
    f = fn;
  }
  if (std::abs(f) <= 10 * tol.newton_tol) return -p0;
  throw SectionError("kappa: Newton did not converge at r = " + std::to_string(r));
}

Vec SectionFrame::lift(double r, const Vec& xs, const Tolerances& tol) const {
  const int m = n(), dd = d();
  Vec y(2 * m);
  y(0) = r;
  y.segment(1, dd) = xs.head(dd);
  y(m) = -kappa(r, xs, tol);
  y.tail(dd) = xs.tail(dd);
  return from_frame(y);
}

Vec SectionFrame::frame_gradient(const Vec& x) const {
  return block_frame(O).transpose() * sys.gradient(x);
}

Mat SectionFrame::frame_hessian(const Vec& x) const {
  Mat B = block_frame(O);
  return B.transpose() * sys.hessian(x) * B;
}

Mat SectionFrame::projected_hessian(const Vec& x) const {
  const int m = n();
  Vec G = frame_gradient(x);
  Mat Hs = frame_hessian(x);
  auto idx = star_index(m);
  const int k = static_cast<int>(idx.size());
  Vec g(k), hxp(k);
  Mat hxx(k, k);
  for (int i = 0; i < k; ++i) {
    g(i) = -G(idx[i]) / G(m);
    hxp(i) = Hs(idx[i], m);
    for (int j = 0; j < k; ++j) hxx(i, j) = Hs(idx[i], idx[j]);
  }
  Mat S = hxx + hxp * g.transpose() + g * hxp.transpose() + Hs(m, m) * g * g.transpose();
  return 0.5 * (S + S.transpose());
}

double SectionFrame::tau_prime(const Vec& x) const { return 1.0 / frame_gradient(x)(n()); }

SectionFrame build_section(const System& sys, const Vec& anchor, const Tolerances& tol) {
  const int n = sys.n();
  if (n < 2) throw SectionError("section: needs at least two degrees of freedom");
  Vec qdot = sys.vector_field(anchor).head(n);
  if (qdot.norm() < tol.velocity_floor)
    throw SectionError("section: anchor velocity " + std::to_string(qdot.norm()) +
                       " is below the floor (anchor on the critical graph)");
  Vec e0 = qdot.normalized();
  Mat E0 = e0;
  Eigen::HouseholderQR<Mat> qr(E0);
  Mat O = qr.householderQ() * Mat::Identity(n, n);
  if (O.col(0).dot(e0) < 0) O.col(0) *= -1.0;
  SectionFrame f{sys, anchor, 0.0, anchor.head(n), O};
  return f;
}

SectionFrame build_section(const PeriodicOrbit& orbit, double t, const Tolerances& tol) {
  SectionFrame f = build_section(orbit.sys, orbit_state(orbit, t), tol);
  f.anchor_time = t;
  return f;
}

std::pair<double, double> monotone_branch(const SectionFrame& frame, const PeriodicOrbit& orbit,
                                          const Tolerances&) {
  const double T = orbit.period, ta = frame.anchor_time;
  const int N = 2000;
  const double dt = T / N;
  const int n = frame.n();
  auto speed = [&](double t) { return frame.e0().dot(orbit.sys.vector_field(orbit_state(orbit, t)).head(n)); };
  auto edge = [&](double dir) {
    double prev = ta;
    for (int k = 1; k <= N / 2; ++k) {
      double t = ta + dir * k * dt;
      if (speed(t) <= 0.0) return bracket_root(speed, std::min(prev, t), std::max(prev, t), 1e-15);
      prev = t;
    }
    return ta + dir * T / 2;
  };
  return {edge(-1.0), edge(1.0)};
}

double section_time(const SectionFrame& frame, const PeriodicOrbit& orbit, double r,
                    const Tolerances& tol, const std::pair<double, double>* branch) {
  auto [lo, hi] = branch ? *branch : monotone_branch(frame, orbit, tol);
  auto f = [&](double t) { return frame.r(orbit_state(orbit, t)) - r; };
  double flo = f(lo), fhi = f(hi);
  if (flo > 0 || fhi < 0)
    throw ReparametrizationError("section parameter r = " + std::to_string(r) +
                                 " is outside the monotone branch [" + std::to_string(flo + r) +
                                 ", " + std::to_string(fhi + r) + "]");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  return bracket_root(f, lo, hi, 1e-15);
}

TransitionMap transition_map(const SectionFrame& frame, const PeriodicOrbit& orbit, double from_r,
                             double to_r, const Tolerances& tol, int samples) {
  const int d = frame.d();
  TransitionMap tm;
  tm.from_r = from_r;
  tm.to_r = to_r;
  const auto branch = monotone_branch(frame, orbit, tol);
  tm.t_from = section_time(frame, orbit, from_r, tol, &branch);
  tm.t_to = section_time(frame, orbit, to_r, tol, &branch);
  const Mat Jd = symplectic_J(d);
  if (from_r == to_r) {
    tm.matrix = Mat::Identity(2 * d, 2 * d);
  } else {
    Mat I = Mat::Identity(2 * d, 2 * d);
    Vec y0 = Eigen::Map<const Vec>(I.data(), I.size());
    const int m = 2 * d;
    auto rhs = [&](double t, const Vec& y, Vec& dy) {
      Eigen::Map<const Mat> P(y.data(), m, m);
      Mat D = Jd * frame.projected_hessian(orbit_state(orbit, t)) * P;
      dy = Eigen::Map<const Vec>(D.data(), D.size());
    };
    DenseSolution sol = integrate(rhs, tm.t_from, y0, tm.t_to, tol.ode());
    tm.matrix = Eigen::Map<const Mat>(sol.final_state().data(), m, m);
  }
  tm.symplectic_residual = symplectic_residual(tm.matrix);
  tm.min_B_eigenvalue = std::numeric_limits<double>::infinity();
  const int K = std::max(samples, 2);
  for (int k = 0; k < K; ++k) {
    double r = from_r + (to_r - from_r) * k / (K - 1);
    double t = section_time(frame, orbit, r, tol, &branch);
    Vec x = orbit_state(orbit, t);
    Mat L = Jd * frame.projected_hessian(x);
    tm.r_samples.push_back(r);
    tm.blocks.push_back(HamiltonianBlocks::split(L));
    tm.tau_prime.push_back(frame.tau_prime(x));
    const int n = frame.n();
    tm.hpp_star.push_back(frame.frame_hessian(x).block(n + 1, n + 1, d, d));
    tm.min_B_eigenvalue = std::min(tm.min_B_eigenvalue, symmetric_min_eig(tm.blocks.back().B));
  }
  return tm;
}

Mat orbit_flow(const PeriodicOrbit& orbit, double s, double t) {
  return fundamental_at(orbit, t) * fundamental_at(orbit, s).partialPivLu().inverse();
}

Mat section_flow(const SectionFrame& a, double s, const SectionFrame& b, double t,
                 const PeriodicOrbit& orbit) {
  const int n = a.n();
  Vec xs = orbit_state(orbit, s), xt = orbit_state(orbit, t);
  Mat lift = block_frame(a.O) * section_lift(a, xs);
  Mat Y = block_frame(b.O).transpose() * (orbit_flow(orbit, s, t) * lift);
  Vec X = block_frame(b.O).transpose() * orbit.sys.vector_field(xt);
  if (std::abs(X(0)) < 1e-14) throw SectionError("section flow: flow is tangent to the target section");
  for (int j = 0; j < Y.cols(); ++j) Y.col(j) -= (Y(0, j) / X(0)) * X;
  return select_star(Y, n);
}

ReturnMap reduced_return_map(const PeriodicOrbit& orbit, double anchor_time, const Tolerances& tol) {
  ReturnMap rm;
  rm.anchor_time = anchor_time;
  try {
    SectionFrame f = build_section(orbit, anchor_time, tol);
    rm.matrix = section_flow(f, anchor_time, f, anchor_time + orbit.period, orbit);
  } catch (const SectionError& e) {
    throw DecompositionError("return map: no section at t = " + std::to_string(anchor_time) + ": " +
                             e.what());
  }
  rm.symplectic_residual = symplectic_residual(rm.matrix);
  return rm;
}

ReturnMap reduced_return_map(const PeriodicOrbit& orbit, const Tolerances& tol) {
  const int N = 2000, n = orbit.sys.n();
  double best = -1.0, tb = 0.0;
  for (int k = 0; k < N; ++k) {
    double t = orbit.period * k / N;
    double v = orbit.sys.vector_field(orbit_state(orbit, t)).head(n).norm();
    if (v > best) {
      best = v;
      tb = t;
    }
  }
  return reduced_return_map(orbit, tb, tol);
}

Mat reduced_basis(const System& sys, const Vec& x) {
  const int n2 = 2 * sys.n(), d = sys.n() - 1;
  Vec G = sys.gradient(x);
  const double g2 = G.squaredNorm();
  if (g2 < 1e-28) throw SectionError("reduced basis: critical point of the energy");
  const Mat J = symplectic_J(sys.n());
  Vec X = J * G;
  Mat P = Mat::Identity(n2, n2) - (G * G.transpose() + X * X.transpose()) / g2;
  std::vector<Vec> cand;
  for (int i = 0; i < n2; ++i) cand.push_back(P.col(i));
  auto omega = [&J](const Vec& a, const Vec& b) { return a.dot(J * b); };
  Mat B(n2, 2 * d);
  for (int k = 0; k < d; ++k) {
    int iu = 0;
    for (int i = 1; i < n2; ++i)
      if (cand[i].norm() > cand[iu].norm()) iu = i;
    Vec u = cand[iu].normalized();
    int iw = -1;
    double best = 0.0;
    for (int i = 0; i < n2; ++i) {
      double w = std::abs(omega(u, cand[i]));
      if (w > best) {
        best = w;
        iw = i;
      }
    }
    if (iw < 0 || best < 1e-12) throw SectionError("reduced basis: degenerate symplectic complement");
    Vec w = cand[iw] / omega(u, cand[iw]);
    for (auto& c : cand) c = (c + omega(w, c) * u - omega(u, c) * w).eval();
    B.col(k) = u;
    B.col(d + k) = w;
  }
  return B;
}

Mat reduced_coordinates(const Mat& basis, const Mat& v) {
  const int d = static_cast<int>(basis.cols()) / 2;
  const int n = static_cast<int>(basis.rows()) / 2;
  return -symplectic_J(d) * basis.transpose() * symplectic_J(n) * v;
}

Mat reduced_flow(const PeriodicOrbit& orbit, double s, double t) {
  Mat Bs = reduced_basis(orbit.sys, orbit_state(orbit, s));
  Mat Bt = reduced_basis(orbit.sys, orbit_state(orbit, t));
  return reduced_coordinates(Bt, orbit_flow(orbit, s, t) * Bs);
}

SymmetryDifferential symmetry_differential(const System& sys, const Vec& x, const Tolerances& tol) {
  const int n = sys.n();
  SymmetryDifferential out;
  SymmetryResult res = apply_symmetry(sys, x, tol);
  out.image = res.image;
  out.scale = res.scale;
  out.dscale = Vec::Zero(2 * n);
  if (res.on_gamma) {
    out.on_gamma = true;
    out.dS = symmetry_jacobian_on_gamma(sys, sys.q(x), tol);
    return out;
  }
  const auto& H = sys.H();
  Vec q = sys.q(x), p = sys.p(x), pt = sys.p(res.image);
  const double s = res.scale;
  Vec vp = H.grad_p(q, p), vt = H.grad_p(q, pt);
  Mat A = Mat::Zero(n + 1, n + 1);
  A.block(0, 0, 1, n) = vt.transpose();
  A.block(1, 0, n, n) = H.hess_pp(q, pt);
  A.block(1, n, n, 1) = vp;
  Mat Bq(n + 1, n), Bp(n + 1, n);
  Bq.row(0) = (H.grad_q(q, pt) - H.grad_q(q, p)).transpose();
  Bq.bottomRows(n) = H.hess_pq(q, pt) + s * H.hess_pq(q, p);
  Bp.row(0) = -vp.transpose();
  Bp.bottomRows(n) = s * H.hess_pp(q, p);
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) throw SymmetryError("symmetry differential: singular implicit system");
  Mat dzq = -lu.solve(Bq), dzp = -lu.solve(Bp);
  out.dS = Mat::Zero(2 * n, 2 * n);
  out.dS.topLeftCorner(n, n).setIdentity();
  out.dS.block(n, 0, n, n) = dzq.topRows(n);
  out.dS.block(n, n, n, n) = dzp.topRows(n);
  out.dscale.head(n) = dzq.row(n).transpose();
  out.dscale.tail(n) = dzp.row(n).transpose();
  return out;
}

Mat reduced_symmetry_at(const System& sys, const Vec& x, const Tolerances& tol) {
  SymmetryDifferential sd = symmetry_differential(sys, x, tol);
  Mat Bx = reduced_basis(sys, x);
  Mat By = reduced_basis(sys, sd.image);
  return reduced_coordinates(By, sd.dS * Bx);
}

Mat reduced_symmetry(const SectionFrame& frame, const PeriodicOrbit& orbit, double r,
                     const Tolerances& tol) {
  const int d = frame.d();
  Vec x = orbit_state(orbit, section_time(frame, orbit, r, tol));
  SymmetryResult sr = apply_symmetry(orbit.sys, x, tol);
  Vec xt = sr.image;
  double gt = frame.frame_gradient(xt)(frame.n());
  if (std::abs(gt) < tol.velocity_floor)
    throw NotTwoWayError("reduced symmetry: companion point does not cross the section at r = " +
                         std::to_string(r));
  const Mat Jd = symplectic_J(d);
  auto L = HamiltonianBlocks::split(Jd * frame.projected_hessian(x));
  auto Lt = HamiltonianBlocks::split(Jd * frame.projected_hessian(xt));
  const double a = frame.tau_prime(x), at = 1.0 / gt;
  Mat Bt_inv = guarded_inverse(Lt.B);
  Mat R = Mat::Zero(2 * d, 2 * d);
  R.topLeftCorner(d, d).setIdentity();
  R.bottomLeftCorner(d, d) = (1.0 / at) * Bt_inv * (a * L.C.transpose() - at * Lt.C.transpose());
  R.bottomRightCorner(d, d) = (a / at) * Bt_inv * L.B;
  return R;
}

Mat reduced_symmetry_fd(const SectionFrame& frame, const PeriodicOrbit& orbit, double r,
                        const Tolerances& tol) {
  Vec x = orbit_state(orbit, section_time(frame, orbit, r, tol));
  Mat dS = symmetry_jacobian(orbit.sys, x, tol);
  Mat Bf = block_frame(frame.O);
  Mat Y = Bf.transpose() * dS * Bf * section_lift(frame, x);
  return select_star(Y, frame.n());
}

PointVerdict check_reversible_point(const PeriodicOrbit& orbit, double t, const Tolerances& tol) {
  const System& sys = orbit.sys;
  const int d = sys.n() - 1;
  PointVerdict v;
  v.t = t;
  v.tol = tol.reversibility_tol;
  Vec x = orbit_state(orbit, t);
  SymmetryDifferential sd = symmetry_differential(sys, x, tol);
  if (sd.on_gamma) throw NotTwoWayError("reversible point: theta(t) lies on the critical graph");
  v.scale = sd.scale;
  v.residual[0] = std::abs(sd.dscale.dot(sys.vector_field(x)));

  const Mat Jd = symplectic_J(d);
  Mat R = reduced_symmetry_at(sys, x, tol);
  v.residual[1] = op_norm(R.transpose() * Jd * R + sd.scale * Jd);

  const Vec y0 = sd.image;
  const Mat R_back = reduced_symmetry_at(sys, y0, tol);
  const Mat Bx = reduced_basis(sys, x);
  const Mat By0 = reduced_basis(sys, y0);
  auto G = [&](double h) {
    Vec xh = orbit_state(orbit, t + h);
    Vec yh = apply_symmetry(sys, xh, tol).image;
    // Companion travel time from yh back to y0.
    double tau = h / sd.scale;
    for (int it = 0; it < 12; ++it) {
      Vec end = flow_map(sys, yh, tau, tol);
      Vec X = sys.vector_field(end);
      double step = X.dot(y0 - end) / X.squaredNorm();
      tau += step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(tau))) break;
    }
    OrbitSegment back = variational_flow(sys, yh, tau, tol);
    Mat Phi_tilde = reduced_coordinates(By0, back.final_fundamental() * reduced_basis(sys, yh));
    Mat Rh = reduced_symmetry_at(sys, xh, tol);
    Mat Phi = reduced_coordinates(reduced_basis(sys, xh), orbit_flow(orbit, t, t + h) * Bx);
    return Mat(R_back * Phi_tilde * Rh * Phi);
  };
  const double h = 1e-3 * orbit.period;
  Mat D1 = (G(h) - G(-h)) / (2 * h);
  Mat D2 = (G(h / 2) - G(-h / 2)) / h;
  v.residual[2] = op_norm((4 * D2 - D1) / 3);
  for (int i = 0; i < 3; ++i) v.pass[i] = v.residual[i] <= v.tol;
  return v;
}

OrbitVerdict check_reversible_orbit(const PeriodicOrbit& orbit, const Tolerances& tol, int cocycle_grid) {
  OrbitVerdict v;
  v.tol = tol.reversibility_tol;
  OrbitClassification cls = classify_orbit(orbit, tol);
  if (cls.kind != OrbitKind::RoundTrip || cls.degenerate_times.size() != 2)
    throw ClassificationError("reversibility: orbit is not certified round trip (" + to_string(cls.kind) + ")");
  v.nu0 = cls.degenerate_times[0];
  v.nu1 = cls.degenerate_times[1];
  const System& sys = orbit.sys;
  const int d = sys.n() - 1;
  const double T = orbit.period;
  PeriodicOrbit ob = make_periodic_orbit(sys, orbit_state(orbit, v.nu0), T, tol);
  const double nu = v.nu1 - v.nu0;
  v.half_period_gap = std::abs(nu - T / 2);

  const Mat Jd = symplectic_J(d);
  const Mat I = Mat::Identity(2 * d, 2 * d);
  Mat R0 = reduced_symmetry_at(sys, ob.base_point, tol);
  Mat R1 = reduced_symmetry_at(sys, orbit_state(ob, nu), tol);
  Mat P01 = reduced_flow(ob, 0.0, nu), P10 = reduced_flow(ob, nu, T);
  v.identity_residual = op_norm(R0 * P10 * R1 * P01 - I);
  v.antisymplectic_residual[0] = op_norm(R0.transpose() * Jd * R0 + Jd);
  v.antisymplectic_residual[1] = op_norm(R1.transpose() * Jd * R1 + Jd);

  const double turning[2] = {0.0, nu};
  for (int i = 0; i < 2; ++i) {
    auto defect = [&](double h) {
      double acc = 0.0;
      for (double sgn : {-1.0, 1.0}) {
        Mat R = reduced_symmetry_at(sys, orbit_state(ob, turning[i] + sgn * h), tol);
        acc += 0.5 * op_norm(R.transpose() * Jd * R + Jd);
      }
      return acc;
    };
    const double h0 = 1e-2 * T;
    double c1 = defect(h0), c2 = defect(h0 / 2), c4 = defect(h0 / 4);
    v.antisymplectic_limit[i] = std::abs(2 * c4 - c2);
    if (std::abs(c4 - c2) > std::abs(c2 - c1) + 1e-10) {
      v.inconclusive = true;
      v.diagnostics.push_back("turning-point limit of the reduced symmetry does not converge at nu" +
                              std::to_string(i));
    }
  }

  if (cocycle_grid > 0) {
    try {
      TimeSymmetry sigma = time_symmetry_sigma(ob, 0.0, nu, tol);
      auto L = [&](double s, double t) {
        return Mat(reduced_flow(ob, s, 0.0) *
                   reduced_symmetry_at(sys, orbit_state(ob, sigma(s)), tol) *
                   reduced_flow(ob, sigma(t), sigma(t) - circle_diff(sigma(t), sigma(s), T)) *
                   reduced_symmetry_at(sys, orbit_state(ob, t), tol) * reduced_flow(ob, 0.0, t));
      };
      std::vector<double> g;
      for (int k = 0; k < cocycle_grid; ++k) g.push_back(nu * (k + 1) / (cocycle_grid + 1));
      std::vector<std::vector<Mat>> Lst(g.size(), std::vector<Mat>(g.size()));
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = 0; b < g.size(); ++b) {
          Lst[a][b] = L(g[a], g[b]);
          v.cocycle_identity = std::max(v.cocycle_identity, op_norm(Lst[a][b] - I));
        }
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = 0; b < g.size(); ++b)
          for (std::size_t c = 0; c < g.size(); ++c)
            v.cocycle_residual =
                std::max(v.cocycle_residual, op_norm(Lst[a][c] - Lst[a][b] * Lst[b][c]));
    } catch (const Error& e) {
      v.inconclusive = true;
      v.diagnostics.push_back(std::string("cocycle check failed: ") + e.what());
    }
  }
  v.reversible = !v.inconclusive && v.identity_residual <= v.tol &&
                 v.antisymplectic_residual[0] <= v.tol && v.antisymplectic_residual[1] <= v.tol;
  return v;
}

namespace {

// x* at the first crossing of q0 = s for each s, along the flow of sys from x0 over
// duration D (either sign).
std::vector<Vec> section_trace(const System& sys, const SectionFrame& frame, const Vec& x0, double D,
                               const std::vector<double>& s_list, const Tolerances& tol) {
  OrbitSegment seg = flow(sys, x0, D, tol);
  const auto& ts = seg.node_times();
  std::vector<Vec> out;
  for (double s : s_list) {
    auto f = [&](double t) { return frame.r(seg.state(t)) - s; };
    double f0 = f(ts[0]);
    if (f0 == 0.0) {
      out.push_back(frame.xstar(seg.state(ts[0])));
      continue;
    }
    bool found = false;
    for (std::size_t k = 1; k < ts.size() && !found; ++k) {
      double fk = f(ts[k]);
      if (fk == 0.0 || (fk > 0) != (f0 > 0)) {
        double t = fk == 0.0 ? ts[k] : bracket_root(f, std::min(ts[k - 1], ts[k]), std::max(ts[k - 1], ts[k]), 1e-15);
        out.push_back(frame.xstar(seg.state(t)));
        found = true;
      }
      f0 = fk;
    }
    if (!found) throw ReparametrizationError("section trace: q0 = " + std::to_string(s) + " is not reached");
  }
  return out;
}

}  // namespace

SectionDerivative potential_derivative_in_section(const SectionFrame& frame, const PeriodicOrbit& orbit,
                                                  std::shared_ptr<const Potential> v, double s_max,
                                                  int points, const Tolerances& tol) {
  const System& sys = orbit.sys;
  const int n = sys.n(), d = n - 1;
  if (!(s_max > 0)) throw InputError("section derivative: s_max must be positive");
  SectionDerivative out;
  for (int k = 0; k < points; ++k) out.s.push_back(s_max * k / std::max(points - 1, 1));

  const auto branch = monotone_branch(frame, orbit, tol);
  const double t_end = section_time(frame, orbit, s_max, tol, &branch);
  for (double s : out.s) {
    Vec q = sys.q(orbit_state(orbit, section_time(frame, orbit, s, tol, &branch)));
    if (std::abs(v->value(q)) > 1e-10)
      throw InputError("section derivative: v must vanish on the projected orbit arc");
  }

  auto point = [&frame, &orbit, &branch, tol](double r) {
    return orbit_state(orbit, section_time(frame, orbit, r, tol, &branch));
  };
  auto companion = [&sys, point, tol](double r) { return apply_symmetry(sys, point(r), tol).image; };
  const Mat Jd = symplectic_J(d);
  auto Lc = [&frame, Jd](const Vec& x, int order) {
    if (order > 0) throw CapabilityError("section blocks carry no derivatives");
    return Jet({Mat(Jd * frame.projected_hessian(x))});
  };
  auto ac = [&frame](const Vec& x, int order) {
    if (order > 0) throw CapabilityError("section blocks carry no derivatives");
    return Jet({Mat::Constant(1, 1, frame.tau_prime(x))});
  };
  LinearSystemPair pair;
  pair.L = Curve(2 * d, 2 * d, s_max, [=](double r, int o) { return Lc(point(r), o); }, 0);
  pair.Lt = Curve(2 * d, 2 * d, s_max, [=](double r, int o) { return Lc(companion(r), o); }, 0);
  pair.a = Curve(1, 1, s_max, [=](double r, int o) { return ac(point(r), o); }, 0);
  pair.at = Curve(1, 1, s_max, [=](double r, int o) { return ac(companion(r), o); }, 0);
  auto b = [&](double r) {
    Vec q = sys.q(point(r));
    Vec g = frame.O.transpose() * v->grad(q);
    Vec out_b = Vec::Zero(2 * d);
    out_b.tail(d) = -g.tail(d);
    return out_b;
  };
  OdeOptions lin_opt;
  lin_opt.rtol = 1e-10;
  lin_opt.atol = 1e-12;
  DenseSolution y = solve_forced(pair, Branch::Original, b, Vec::Zero(2 * d), lin_opt);
  DenseSolution yt = solve_forced(pair, Branch::Companion, b, Vec::Zero(2 * d), lin_opt);
  for (double s : out.s) {
    out.y_ode.push_back(y(s));
    out.ytilde_ode.push_back(yt(s));
  }

  const Vec x0 = frame.anchor;
  const Vec xt0 = apply_symmetry(sys, x0, tol).image;
  const double D = 1.2 * (t_end - frame.anchor_time);
  // Unperturbed companion: time to reach s_max backwards.
  double Dt;
  {
    Vec xe = companion(s_max);
    double tau = -(t_end - frame.anchor_time);
    for (int it = 0; it < 30; ++it) {
      Vec end = flow_map(sys, xt0, tau, tol);
      Vec X = sys.vector_field(end);
      double step = X.dot(xe - end) / X.squaredNorm();
      tau += step;
      if (std::abs(step) < 1e-14) break;
    }
    Dt = 1.2 * tau;
  }
  auto trace = [&](double eps, const Vec& start, double dur) {
    System se = eps == 0.0 ? sys : sys.perturbed(v, eps);
    return section_trace(se, frame, start, dur, out.s, tol);
  };
  const double e1 = 1e-3, e2 = 5e-4;
  auto central = [&](const Vec& start, double dur, double e) {
    auto plus = trace(e, start, dur), minus = trace(-e, start, dur);
    std::vector<Vec> dv;
    for (std::size_t k = 0; k < plus.size(); ++k) dv.push_back((plus[k] - minus[k]) / (2 * e));
    return dv;
  };
  for (int branch = 0; branch < 2; ++branch) {
    const Vec& start = branch == 0 ? x0 : xt0;
    double dur = branch == 0 ? D : Dt;
    auto D1 = central(start, dur, e1), D2 = central(start, dur, e2);
    auto& dst = branch == 0 ? out.y_fd : out.ytilde_fd;
    auto& ode = branch == 0 ? out.y_ode : out.ytilde_ode;
    for (std::size_t k = 0; k < D1.size(); ++k) {
      Vec r = (4 * D2[k] - D1[k]) / 3;
      dst.push_back(r);
      out.fd_error_estimate = std::max(out.fd_error_estimate, (r - D2[k]).norm());
      out.discrepancy = std::max(out.discrepancy, (r - ode[k]).norm());
    }
  }
  if (out.fd_error_estimate > 1e-5)
    out.warning = "finite differences in the potential did not settle (estimate " +
                  std::to_string(out.fd_error_estimate) + ")";
  return out;
}

}  // namespace libra
