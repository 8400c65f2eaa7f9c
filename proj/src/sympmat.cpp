#include "libra/sympmat.hpp"
#include "libra/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

namespace libra {

Mat HamiltonianBlocks::assemble() const {
  const int d = dim_d();
  Mat L(2 * d, 2 * d);
  L << C.transpose(), B, -A, -C;
  return L;
}

HamiltonianBlocks HamiltonianBlocks::split(const Mat& L) {
  const int d = half_dim(L);
  HamiltonianBlocks h;
  h.A = -L.bottomLeftCorner(d, d);
  h.B = L.topRightCorner(d, d);
  h.C = -L.bottomRightCorner(d, d);
  return h;
}

double HamiltonianBlocks::defect(const Mat& L) {
  const int d = half_dim(L);
  auto h = split(L);
  return std::max({max_abs(h.A - h.A.transpose()), max_abs(h.B - h.B.transpose()),
                   max_abs(L.topLeftCorner(d, d) - h.C.transpose())});
}

double symplectic_residual(const Mat& M) {
  const int d = half_dim(M);
  Mat J = symplectic_J(d);
  return max_abs(M.transpose() * J * M - J);
}

double involution_residual(const Mat& R) {
  half_dim(R);
  return max_abs(R * R - Mat::Identity(R.rows(), R.cols()));
}

double antisymplectic_residual(const Mat& R) {
  const int d = half_dim(R);
  Mat J = symplectic_J(d);
  return max_abs(R.transpose() * J * R + J);
}

bool is_symplectic(const Mat& M, double tol) {
  return symplectic_residual(M) <= tol && M.determinant() > 0;
}

bool is_antisymplectic_involution(const Mat& R, double tol) {
  const int d = half_dim(R);
  if (involution_residual(R) > tol || antisymplectic_residual(R) > tol) return false;
  Mat I = Mat::Identity(2 * d, 2 * d);
  double rtol = std::max(tol, 1e-12);
  return numerical_rank(I + R, rtol) == d && numerical_rank(I - R, rtol) == d;
}

Mat R0(int d) {
  Mat R = Mat::Identity(2 * d, 2 * d);
  R.bottomRightCorner(d, d) *= -1.0;
  return R;
}

Mat R1(int d) {
  Mat R = Mat::Zero(2 * d, 2 * d);
  R.topRightCorner(d, d).setIdentity();
  R.bottomLeftCorner(d, d).setIdentity();
  return R;
}

Mat conjugate_involution(const Mat& M, const Mat& R, double max_cond) {
  if (M.rows() != R.rows()) throw DimensionError("conjugate_involution: size mismatch");
  half_dim(M);
  return guarded_inverse(M, max_cond) * R * M;
}

namespace {

// Permutation matrix P with P vec(X) = vec(X^T) for n x n X (column-major vec).
Mat commutation(int n) {
  Mat P = Mat::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i * n + j, j * n + i) = 1.0;
  return P;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

}  // namespace

std::vector<Mat> tangent_basis_A2d(const Mat& R, double tol) {
  const int d = half_dim(R);
  const int n = 2 * d;
  // the null-space dimension alone cannot tell J apart from an involution when d = 1
  double scale = std::max(1.0, max_abs(R) * max_abs(R));
  if (involution_residual(R) > 1e-8 * scale || antisymplectic_residual(R) > 1e-8 * scale)
    throw NumericalError("tangent_basis_A2d: R is not an antisymplectic involution");
  Mat I = Mat::Identity(n, n);
  Mat J = symplectic_J(d);
  Mat In2 = Mat::Identity(n * n, n * n);
  // R X + X R = 0  and  Y - Y^T = 0 with Y = R^T J X
  Mat E1 = kron(I, R) + kron(R.transpose(), I);
  Mat E2 = (In2 - commutation(n)) * kron(I, R.transpose() * J);
  Mat S(2 * n * n, n * n);
  S << E1, E2;
  Mat K = null_space(S, tol);
  if (K.cols() != d * (d + 1))
    throw NumericalError("tangent space at R has dimension " + std::to_string(K.cols()) +
                         ", expected " + std::to_string(d * (d + 1)) +
                         "; R is not an antisymplectic involution");
  std::vector<Mat> basis;
  for (int k = 0; k < K.cols(); ++k)
    basis.push_back(Eigen::Map<const Mat>(K.col(k).data(), n, n));
  return basis;
}

Mat standardizing_map(const Mat& R, double tol) {
  const int d = half_dim(R);
  const int n = 2 * d;
  Mat I = Mat::Identity(n, n);
  // R is not symmetric in general, so the eigenspaces are taken as ranges of I +- R.
  Mat U = range_space(I + R, std::max(tol, 1e-12));
  Mat W = range_space(I - R, std::max(tol, 1e-12));
  if (U.cols() != d || W.cols() != d)
    throw InputError("eigenspaces of R do not both have dimension d");
  Mat J = symplectic_J(d);
  Mat G = U.transpose() * J * W;
  if (sigma_min(G) < 1e-10)
    throw InputError("eigenspaces of R are not a transverse Lagrangian pair");
  Mat N(n, n);
  N << U, W * G.inverse();
  Mat K(n, n);
  K << Mat::Identity(d, d), Mat::Identity(d, d), -Mat::Identity(d, d), Mat::Identity(d, d);
  K /= std::sqrt(2.0);
  return N * K;
}

Mat make_r_reversible(const Mat& R, const std::vector<double>& x, double tol) {
  const int d = half_dim(R);
  if (static_cast<int>(x.size()) != d)
    throw DimensionError("make_r_reversible: need d eigenvalue parameters");
  for (int i = 0; i < d; ++i) {
    if (!(x[i] > 1.0)) throw InputError("make_r_reversible: parameters must exceed 1");
    if (i > 0 && !(x[i] > x[i - 1]))
      throw InputError("make_r_reversible: parameters must be strictly increasing");
  }
  if (!is_antisymplectic_involution(R, std::max(tol, 1e-8)))
    throw InputError("make_r_reversible: R is not an antisymplectic involution");
  Mat M = standardizing_map(R, tol);
  Vec diag(2 * d);
  for (int i = 0; i < d; ++i) {
    diag(i) = x[i];
    diag(d + i) = 1.0 / x[i];
  }
  return M * diag.asDiagonal() * M.inverse();
}

double reversibility_residual(const Mat& R, const Mat& L) {
  Mat RL = R * L;
  return max_abs(RL * RL - Mat::Identity(L.rows(), L.cols()));
}

std::string to_string(UpsilonReason r) {
  switch (r) {
    case UpsilonReason::RootOfUnity:
      return "root_of_unity";
    case UpsilonReason::DoubleEigenvalue:
      return "double_eigenvalue";
    default:
      return "none";
  }
}

CVec eigenvalues(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return es.eigenvalues();
}

UpsilonVerdict classify_upsilon(const Mat& M, double root_tol, double gap_tol, int k_max) {
  if (k_max < 1) throw InputError("classify_upsilon: k_max must be at least 1");
  CVec ev = eigenvalues(M);
  UpsilonVerdict v;
  v.min_root_distance = std::numeric_limits<double>::infinity();
  v.min_eigenvalue_gap = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 1; k <= k_max; ++k) {
    for (int i = 0; i < ev.size(); ++i) {
      double dist = std::abs(std::pow(ev(i), k) - 1.0);
      v.min_root_distance = std::min(v.min_root_distance, dist);
      if (dist <= root_tol && best_k == 0) best_k = k;
    }
  }
  std::complex<double> disc = 1.0;
  for (int i = 0; i < ev.size(); ++i)
    for (int j = i + 1; j < ev.size(); ++j) {
      std::complex<double> diff = ev(i) - ev(j);
      v.min_eigenvalue_gap = std::min(v.min_eigenvalue_gap, std::abs(diff));
      disc *= diff * diff;
    }
  v.discriminant = disc.real();
  if (best_k > 0) {
    v.in_upsilon = true;
    v.reason = UpsilonReason::RootOfUnity;
    v.order = best_k;
  } else if (v.min_eigenvalue_gap <= gap_tol) {
    v.in_upsilon = true;
    v.reason = UpsilonReason::DoubleEigenvalue;
  }
  return v;
}

UpsilonPredicate default_upsilon(const Tolerances& tol) {
  return [tol](const Mat& M) { return classify_upsilon(M, tol); };
}

double upsilon_fraction(const std::vector<Mat>& mats, const UpsilonPredicate& pred) {
  if (mats.empty()) return 0.0;
  int hits = 0;
  for (const auto& m : mats)
    if (pred(m).in_upsilon) ++hits;
  return static_cast<double>(hits) / static_cast<double>(mats.size());
}

Mat random_symplectic(int d, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> U(-scale, scale);
  HamiltonianBlocks h;
  h.A = Mat(d, d);
  h.B = Mat(d, d);
  h.C = Mat(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      h.A(i, j) = h.A(j, i) = U(rng);
      h.B(i, j) = h.B(j, i) = U(rng);
    }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h.C(i, j) = U(rng);
  Mat L = h.assemble();
  return L.exp();
}

Mat random_r_reversible(const Mat& R, std::mt19937_64& rng) {
  const int d = half_dim(R);
  std::uniform_real_distribution<double> U(1.1, 4.0);
  std::vector<double> x(d);
  do {
    for (auto& xi : x) xi = U(rng);
    std::sort(x.begin(), x.end());
  } while ([&] {
    for (int i = 1; i < d; ++i)
      if (x[i] - x[i - 1] < 0.05) return true;
    return false;
  }());
  Mat L0 = make_r_reversible(R, x);
  Mat P = random_symplectic(d, rng, 0.5);
  Mat Pinv = guarded_inverse(P);
  return R * Pinv * R * L0 * P;
}

double sample_upsilon_fraction_in_RA(const Mat& R, int n_samples, std::uint64_t rng_seed,
                                     const UpsilonPredicate& pred) {
  if (n_samples < 1) throw InputError("sample_upsilon_fraction_in_RA: n_samples must be >= 1");
  std::mt19937_64 rng(rng_seed);
  std::vector<Mat> mats;
  mats.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) mats.push_back(random_r_reversible(R, rng));
  return upsilon_fraction(mats, pred);
}

double reciprocal_pairing_residual(const Mat& M) {
  CVec ev = eigenvalues(M);
  CVec inv(ev.size());
  for (int i = 0; i < ev.size(); ++i) inv(i) = 1.0 / ev(i);
  return eigenvalue_multiset_distance(ev, inv);
}

double eigenvalue_multiset_distance(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(a.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 7) {
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(a(i) - b(perm[i])));
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    int jb = -1;
    double db = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (!used[j] && std::abs(a(i) - b(j)) < db) {
        db = std::abs(a(i) - b(j));
        jb = j;
      }
    used[jb] = true;
    worst = std::max(worst, db);
  }
  return worst;
}

}  // namespace libra
