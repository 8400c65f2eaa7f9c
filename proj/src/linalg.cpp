#include "libra/linalg.hpp"
#include "libra/config.hpp"

#include <Eigen/SVD>

#include <limits>
#include <string>

namespace libra {

Mat symplectic_J(int d) {
  Mat J = Mat::Zero(2 * d, 2 * d);
  J.topRightCorner(d, d).setIdentity();
  J.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  return J;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

int half_dim(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw DimensionError("expected a square matrix of even size, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  return static_cast<int>(m.rows() / 2);
}

namespace {

struct Svd {
  Eigen::JacobiSVD<Mat> svd;
  int rank;
};

Svd rank_svd(const Mat& A, double tol, unsigned flags) {
  Eigen::JacobiSVD<Mat> svd(A, flags);
  const auto& s = svd.singularValues();
  double scale = s.size() ? std::max(1.0, s(0)) : 1.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++r;
  return {std::move(svd), r};
}

}  // namespace

Mat null_space(const Mat& A, double tol) {
  auto [svd, r] = rank_svd(A, tol, Eigen::ComputeFullV);
  const Mat& V = svd.matrixV();
  return V.rightCols(A.cols() - r);
}

Mat range_space(const Mat& A, double tol) {
  auto [svd, r] = rank_svd(A, tol, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(r);
}

int numerical_rank(const Mat& A, double tol) {
  return rank_svd(A, tol, 0).rank;
}

double condition_number(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  double lo = s(s.size() - 1);
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / lo;
}

double sigma_min(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  return s.size() ? s(s.size() - 1) : 0.0;
}

Mat guarded_inverse(const Mat& A, double max_cond) {
  double c = condition_number(A);
  if (!(c <= max_cond))
    throw NumericalError("matrix too ill-conditioned to invert (cond = " +
                         std::to_string(c) + ")");
  return A.fullPivLu().inverse();
}

void Tolerances::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0)) throw ConfigError(std::string("tolerance '") + name + "' must be positive");
  };
  pos(symplectic_tol, "symplectic_tol");
  pos(gap_tol, "gap_tol");
  pos(root_tol, "root_tol");
  pos(gamma_tol, "gamma_tol");
  pos(gamma_event_tol, "gamma_event_tol");
  pos(energy_drift_tol, "energy_drift_tol");
  pos(newton_tol, "newton_tol");
  pos(transv_tol, "transv_tol");
  pos(velocity_floor, "velocity_floor");
  pos(integrator_rtol, "integrator_rtol");
  pos(integrator_atol, "integrator_atol");
  pos(construction_tol, "construction_tol");
  pos(decision_tol, "decision_tol");
  pos(closure_tol, "closure_tol");
  pos(minimality_tol, "minimality_tol");
  pos(chord_tol, "chord_tol");
  pos(reversibility_tol, "reversibility_tol");
  if (k_max < 1) throw ConfigError("tolerance 'k_max' must be at least 1");
  if (k_div < 1) throw ConfigError("tolerance 'k_div' must be at least 1");
}

}  // namespace libra
