#include "libra/linsys.hpp"

#include "libra/linalg.hpp"
#include "libra/sympmat.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <memory>

namespace libra {

namespace {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

std::vector<double> grid(double T, int nodes) {
  std::vector<double> t(nodes);
  for (int k = 0; k < nodes; ++k) t[k] = T * k / (nodes - 1);
  return t;
}

const Curve& pick_L(const LinearSystemPair& p, Branch w) { return w == Branch::Original ? p.L : p.Lt; }
const Curve& pick_a(const LinearSystemPair& p, Branch w) { return w == Branch::Original ? p.a : p.at; }

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

// Riccati right-hand side -a (s C^T + C s - s B s / alpha) as a jet, with C and B
// read off L.
Jet riccati_jet(const Jet& S, const Jet& L, const Jet& a, double alpha, int d) {
  Jet Ct = L.block(0, 0, d, d);
  Jet B = L.block(0, d, d, d);
  Jet C = Ct.transpose();
  return -1.0 * (a * (S * Ct + C * S - (1.0 / alpha) * (S * B * S)));
}

}  // namespace

void LinearSystemPair::validate(int nodes, double floor) const {
  const int n = L.rows();
  if (n % 2 != 0 || n == 0 || L.cols() != n || Lt.rows() != n || Lt.cols() != n)
    throw InputError("linear pair: L and Lt must be square of the same even size");
  if (a.rows() != 1 || a.cols() != 1 || at.rows() != 1 || at.cols() != 1)
    throw InputError("linear pair: a and at must be scalar curves");
  if (std::abs(Lt.T() - L.T()) > 1e-12 * std::max(1.0, L.T()) ||
      std::abs(a.T() - L.T()) > 1e-12 * std::max(1.0, L.T()) ||
      std::abs(at.T() - L.T()) > 1e-12 * std::max(1.0, L.T()))
    throw InputError("linear pair: curves live on different intervals");
  const int dd = n / 2;
  double sa = 0.0, sat = 0.0;
  for (double t : grid(T(), nodes)) {
    Mat Lv = L(t), Ltv = Lt(t);
    if (HamiltonianBlocks::defect(Lv) > 1e-8 * std::max(1.0, max_abs(Lv)))
      throw InputError("linear pair: L is not Hamiltonian at t = " + std::to_string(t));
    if (HamiltonianBlocks::defect(Ltv) > 1e-8 * std::max(1.0, max_abs(Ltv)))
      throw InputError("linear pair: Lt is not Hamiltonian at t = " + std::to_string(t));
    if (condition_number(Ltv.block(0, dd, dd, dd)) > 1e12)
      throw InvertibilityError("linear pair: B block of Lt is singular at t = " + std::to_string(t));
    double av = a.scalar(t), atv = at.scalar(t);
    if (std::abs(av) < floor || std::abs(atv) < floor)
      throw InputError("linear pair: a or at vanishes at t = " + std::to_string(t));
    if (sa == 0.0) sa = av;
    if (sat == 0.0) sat = atv;
    if (av * sa < 0.0 || atv * sat < 0.0)
      throw InputError("linear pair: a or at changes sign");
  }
}

Vec ForcingCurve::operator()(double t) const {
  const int d = static_cast<int>(dir.size());
  Vec out = Vec::Zero(2 * d);
  out.tail(d) = amp * bump((t - center) / width) * dir;
  return out;
}

std::vector<ForcingCurve> random_bump_ensemble(int d, double T, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<ForcingCurve> out;
  for (int i = 0; i < count; ++i) {
    ForcingCurve f;
    f.width = T * (0.05 + 0.15 * U(rng));
    double margin = f.width + 0.01 * T;
    f.center = margin + (T - 2 * margin) * U(rng);
    f.dir = Vec(d);
    for (int k = 0; k < d; ++k) f.dir(k) = N(rng);
    f.dir.normalize();
    f.amp = (0.5 + 1.5 * U(rng)) * (U(rng) < 0.5 ? -1.0 : 1.0);
    out.push_back(f);
  }
  return out;
}

DenseSolution solve_forced(const LinearSystemPair& pair, Branch which,
                           const std::function<Vec(double)>& b, const Vec& x0,
                           const OdeOptions& opt, const std::vector<double>& stops) {
  const Curve& L = pick_L(pair, which);
  const Curve& a = pick_a(pair, which);
  if (x0.size() != L.rows()) throw DimensionError("solve_forced: x0 has the wrong size");
  auto rhs = [&](double t, const Vec& x, Vec& dx) {
    Vec v = L(t) * x;
    if (b) v += b(t);
    dx = a.scalar(t) * v;
  };
  return integrate(rhs, 0.0, x0, pair.T(), opt, stops);
}

DenseSolution solve_forced(const LinearSystemPair& pair, Branch which,
                           const std::vector<ForcingCurve>& b, const Vec& x0,
                           const OdeOptions& opt) {
  std::vector<double> stops;
  for (const auto& f : b) {
    stops.push_back(f.lo());
    stops.push_back(f.hi());
  }
  const int n = pair.L.rows();
  auto sum = [&b, n](double t) {
    Vec v = Vec::Zero(n);
    for (const auto& f : b) v += f(t);
    return v;
  };
  return solve_forced(pair, which, sum, x0, opt, stops);
}

Mat resolvent(const LinearSystemPair& pair, Branch which, double s, double t, const OdeOptions& opt) {
  const Curve& L = pick_L(pair, which);
  const Curve& a = pick_a(pair, which);
  const int n = L.rows();
  if (s == t) return Mat::Identity(n, n);
  Mat I = Mat::Identity(n, n);
  Vec y0 = Eigen::Map<const Vec>(I.data(), n * n);
  auto rhs = [&](double tt, const Vec& y, Vec& dy) {
    Eigen::Map<const Mat> P(y.data(), n, n);
    Mat D = a.scalar(tt) * (L(tt) * P);
    dy = Eigen::Map<const Vec>(D.data(), n * n);
  };
  DenseSolution sol = integrate(rhs, s, y0, t, opt);
  return Eigen::Map<const Mat>(sol.final_state().data(), n, n);
}

Jet candidate_conjugacy_jet(const LinearSystemPair& pair, double t, int order) {
  const int d = pair.d();
  Jet L = pair.L.jet(t, order), Lt = pair.Lt.jet(t, order);
  Jet a = pair.a.jet(t, order), at = pair.at.jet(t, order);
  Jet Ct = L.block(0, 0, d, d), B = L.block(0, d, d, d);
  Jet Ctt = Lt.block(0, 0, d, d), Bt = Lt.block(0, d, d, d);
  if (condition_number(Bt.value()) > 1e12)
    throw InvertibilityError("candidate conjugacy: B block of Lt is singular at t = " +
                             std::to_string(t));
  Jet Bt_inv = Bt.inverse();
  Jet at_inv = at.inverse();
  Jet S = at_inv * (Bt_inv * (a * Ct - at * Ctt));
  Jet D = a * at_inv * (Bt_inv * B);
  return block_jet(Jet::identity(d, order), Jet::constant(Mat::Zero(d, d), order), S, D);
}

Mat candidate_conjugacy(const LinearSystemPair& pair, double t) {
  return candidate_conjugacy_jet(pair, t, 0).value();
}

Curve candidate_conjugacy_curve(const LinearSystemPair& pair) {
  int m = std::min({pair.L.max_order(), pair.Lt.max_order(), pair.a.max_order(), pair.at.max_order()});
  return Curve(
      pair.L.rows(), pair.L.cols(), pair.T(),
      [pair](double t, int order) { return candidate_conjugacy_jet(pair, t, order); }, m);
}

ConjugacyResidual conjugacy_ode_residual(const LinearSystemPair& pair, const Curve& R, int nodes,
                                         int pairs) {
  ConjugacyResidual out;
  for (double t : grid(pair.T(), nodes)) {
    Jet Rj = R.jet(t, 1);
    Mat Rv = Rj.value();
    Mat res = Rj.derivative(1) + pair.a.scalar(t) * Rv * pair.L(t) - pair.at.scalar(t) * pair.Lt(t) * Rv;
    out.ode = std::max(out.ode, op_norm(res));
  }
  if (pairs > 0) {
    OdeOptions opt;
    for (int i = 0; i < pairs; ++i) {
      double s = pair.T() * i / pairs, r = pair.T() * (i + 1) / pairs;
      Mat lhs = R(r) * resolvent(pair, Branch::Original, s, r, opt);
      Mat rhs = resolvent(pair, Branch::Companion, s, r, opt) * R(s);
      out.resolvent = std::max(out.resolvent, op_norm(lhs - rhs));
    }
  }
  return out;
}

std::vector<std::vector<Mat>> m_sequence(const Curve& L, const Curve& a, int n_max,
                                         const std::vector<double>& times) {
  if (n_max < 2) throw InputError("m_sequence: n_max must be at least 2");
  const int K = n_max - 1;
  std::vector<std::vector<Mat>> out(n_max - 1, std::vector<Mat>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    Jet Lj = L.jet(times[k], K), aj = a.jet(times[k], K);
    Jet M = Jet::identity(L.rows(), K);
    for (int n = 1; n < n_max; ++n) {
      M = M.differentiated() + aj * M * Lj;
      out[n - 1][k] = M.value();
    }
  }
  return out;
}

Mat upper_right(const Mat& M) {
  const int d = static_cast<int>(M.rows()) / 2;
  return M.block(0, d, d, d);
}

ThreeConditions check_three_conditions(const LinearSystemPair& pair, const Tolerances& tol, int nodes) {
  ThreeConditions out;
  out.tol = tol.decision_tol;
  const int d = pair.d();
  auto ts = grid(pair.T(), nodes);
  double prev = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double t = ts[k];
    double ratio = pair.at.scalar(t) / pair.a.scalar(t);
    if (k > 0) out.residual[0] += std::abs(ratio - prev);
    prev = ratio;
    Mat R = candidate_conjugacy(pair, t);
    Mat S = R.block(d, 0, d, d);
    Mat D = R.block(d, d, d, d);
    double r2 = op_norm(D - ratio * Mat::Identity(d, d)) + op_norm(S - S.transpose());
    out.residual[1] = std::max(out.residual[1], r2);
  }
  out.residual[2] = conjugacy_ode_residual(pair, candidate_conjugacy_curve(pair), nodes, 0).ode;
  for (int i = 0; i < 3; ++i) out.pass[i] = out.residual[i] <= tol.decision_tol;
  return out;
}

double projection_agreement(const LinearSystemPair& pair, const std::vector<ForcingCurve>& b,
                            const OdeOptions& opt, int samples) {
  const int d = pair.d();
  Vec x0 = Vec::Zero(2 * d);
  double worst = 0.0;
  for (const auto& f : b) {
    DenseSolution x = solve_forced(pair, Branch::Original, std::vector<ForcingCurve>{f}, x0, opt);
    DenseSolution y = solve_forced(pair, Branch::Companion, std::vector<ForcingCurve>{f}, x0, opt);
    for (double t : grid(pair.T(), samples))
      worst = std::max(worst, (x(t).head(d) - y(t).head(d)).norm());
  }
  return worst;
}

LinearSystemPair build_conjugate_pair(const Curve& L, const Curve& a, double alpha, const Mat& s0,
                                      const Tolerances& tol) {
  const int d = L.rows() / 2;
  const double T = L.T();
  if (alpha == 0.0 || !std::isfinite(alpha)) throw InputError("conjugate pair: alpha must be nonzero");
  if (s0.rows() != d || s0.cols() != d) throw DimensionError("conjugate pair: s0 must be d x d");
  if (max_abs(s0 - s0.transpose()) > tol.construction_tol * std::max(1.0, max_abs(s0)))
    throw InputError("conjugate pair: s0 must be symmetric");

  auto rhs = [&](double t, const Vec& y, Vec& dy) {
    Eigen::Map<const Mat> s(y.data(), d, d);
    Mat Lv = L(t);
    Mat Ct = Lv.block(0, 0, d, d), B = Lv.block(0, d, d, d);
    Mat ds = -a.scalar(t) * (s * Ct + Ct.transpose() * s - s * B * s / alpha);
    dy = Eigen::Map<const Vec>(ds.data(), d * d);
  };
  OdeOptions opt;
  opt.rtol = 1e-13;
  opt.atol = 1e-14;
  std::shared_ptr<const DenseSolution> sol;
  try {
    Vec y0 = Eigen::Map<const Vec>(s0.data(), d * d);
    sol = std::make_shared<const DenseSolution>(integrate(rhs, 0.0, y0, T, opt));
  } catch (const BlowUpError& e) {
    throw ConstructionError(std::string("conjugate pair: Riccati solution blows up: ") + e.what());
  }
  for (double t : grid(T, 101)) {
    Vec y = (*sol)(t);
    Eigen::Map<const Mat> s(y.data(), d, d);
    if (!s.allFinite() || max_abs(s - s.transpose()) > tol.construction_tol * std::max(1.0, max_abs(s)))
      throw ConstructionError("conjugate pair: Riccati solution loses symmetry at t = " + std::to_string(t));
  }

  auto s_jet = [L, a, alpha, d, sol](double t, int order) {
    Vec y = (*sol)(t);
    Mat s = Eigen::Map<const Mat>(y.data(), d, d);
    s = 0.5 * (s + s.transpose()).eval();
    Jet Lj = L.jet(t, order), aj = a.jet(t, order);
    std::vector<Mat> c{s};
    for (int k = 0; k <= order; ++k) {
      Jet F = riccati_jet(Jet(c), Lj.truncated(k), aj.truncated(k), alpha, d);
      c.push_back(F[k] / (k + 1));
    }
    return Jet(std::move(c));
  };

  auto lt_jet = [L, a, alpha, d, s_jet](double t, int order) {
    Jet S = s_jet(t, order);  // order + 1
    const int K = order + 1;
    Jet R = block_jet(Jet::identity(d, K), Jet::constant(Mat::Zero(d, d), K), S,
                      Jet::constant(alpha * Mat::Identity(d, d), K));
    Jet Rinv = R.truncated(order).inverse();
    Jet aj = a.jet(t, order);
    Jet Lj = L.jet(t, order);
    Jet num = R.differentiated() * Rinv + aj * (R.truncated(order) * Lj * Rinv);
    return (1.0 / alpha) * (aj.inverse() * num);
  };

  const int m = std::min(L.max_order(), a.max_order());
  LinearSystemPair pair;
  pair.L = L;
  pair.a = a;
  pair.Lt = Curve(2 * d, 2 * d, T, lt_jet, m);
  pair.at = Curve(
      1, 1, T, [a, alpha](double t, int order) { return alpha * a.jet(t, order); }, a.max_order());

  for (double t : grid(T, 21)) {
    Mat Ltv = pair.Lt(t);
    if (!Ltv.allFinite() || HamiltonianBlocks::defect(Ltv) > tol.construction_tol * std::max(1.0, max_abs(Ltv)))
      throw ConstructionError("conjugate pair: companion is not Hamiltonian at t = " + std::to_string(t));
  }
  return pair;
}

Curve random_hamiltonian_curve(int d, double T, std::mt19937_64& rng) {
  const int n = 2 * d;
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto sym = [&](double scale, double b_scale) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = N(rng);
    m = 0.5 * scale * (m + m.transpose()).eval();
    m.block(d, d, d, d) *= b_scale / scale;
    return m;
  };
  Mat S0 = sym(0.5, 0.1);
  S0.block(d, d, d, d) += 2.0 * Mat::Identity(d, d);
  Mat S1 = sym(0.3, 0.1 / d), S2 = sym(0.3, 0.1 / d);
  double w1 = 0.5 + 2.5 * U(rng), w2 = 0.5 + 2.5 * U(rng);
  double p1 = 6.28 * U(rng), p2 = 6.28 * U(rng);
  Mat J = symplectic_J(d);
  auto deriv = [=](double t, int k) {
    double ph = k * M_PI / 2;
    Mat S = std::pow(w1, k) * std::sin(w1 * t + p1 + ph) * S1 + std::pow(w2, k) * std::cos(w2 * t + p2 + ph) * S2;
    if (k == 0) S += S0;
    return Mat(J * S);
  };
  return Curve::from_derivatives(n, n, T, deriv, 12);
}

Curve random_positive_scalar(double T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double c = -0.4 + 0.8 * U(rng), w = 0.5 + 2.5 * U(rng), phi = 6.28 * U(rng);
  return Curve::from_scalar(
      T,
      [=](double t, int k) {
        double v = c * std::pow(w, k) * std::sin(w * t + phi + k * M_PI / 2);
        return k == 0 ? 1.0 + v : v;
      },
      12);
}

std::string to_string(Violation v) {
  switch (v) {
    case Violation::ScaleRatio: return "scale_ratio";
    case Violation::MomentumBlock: return "momentum_block";
    case Violation::PositionBlock: return "position_block";
  }
  return "unknown";
}

LinearSystemPair violate(const LinearSystemPair& pair, Violation which, double strength) {
  LinearSystemPair p = pair;
  if (which == Violation::ScaleRatio) {
    Curve at = pair.at;
    p.at = Curve(
        1, 1, p.T(),
        [at, strength](double t, int k) {
          std::vector<Mat> f{Mat::Constant(1, 1, 1.0 + strength * t), Mat::Constant(1, 1, strength)};
          f.resize(k + 1, Mat::Zero(1, 1));
          return at.jet(t, k) * Jet(f);
        },
        at.max_order());
    return p;
  }
  const int d = pair.d();
  Curve Lt = pair.Lt;
  p.Lt = Curve(
      Lt.rows(), Lt.cols(), Lt.T(),
      [Lt, which, strength, d](double t, int k) {
        Jet j = Lt.jet(t, k);
        std::vector<Mat> c;
        for (int i = 0; i <= k; ++i) {
          Mat m = j[i];
          if (which == Violation::MomentumBlock) m.block(0, d, d, d) *= 1.0 + strength;
          else if (i == 0) m.block(d, 0, d, d) -= strength * Mat::Identity(d, d);
          c.push_back(m);
        }
        return Jet(std::move(c));
      },
      Lt.max_order());
  return p;
}

}  // namespace libra
