#pragma once

#include "libra/config.hpp"
#include "libra/types.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace libra {

/// Blocks of a Hamiltonian matrix L = [[C^T, B], [-A, -C]] with A, B symmetric.
struct HamiltonianBlocks {
  Mat A, B, C;

  int dim_d() const { return static_cast<int>(A.rows()); }
  Mat assemble() const;
  /// Reads the blocks off a 2d x 2d matrix. The C block is taken from the
  /// lower-right corner; no symmetry is enforced.
  static HamiltonianBlocks split(const Mat& L);
  /// max(|A - A^T|, |B - B^T|, |C^T - upper-left|) for a matrix that should be Hamiltonian.
  static double defect(const Mat& L);
};

bool is_symplectic(const Mat& M, double tol);
bool is_antisymplectic_involution(const Mat& R, double tol);

/// Residuals used by the two predicates above.
double symplectic_residual(const Mat& M);
double involution_residual(const Mat& R);
double antisymplectic_residual(const Mat& R);

Mat R0(int d);  ///< (q, p) -> (q, -p)
Mat R1(int d);  ///< (q, p) -> (p, q)

/// M^{-1} R M. Throws NumericalError when M is too ill-conditioned.
Mat conjugate_involution(const Mat& M, const Mat& R, double max_cond = 1e10);

/// Basis of the tangent space to the antisymplectic involutions at R.
/// Throws NumericalError if the null space does not have dimension d(d+1).
std::vector<Mat> tangent_basis_A2d(const Mat& R, double tol = 1e-9);

/// Symplectic M with M^{-1} R M = R1, built from the Lagrangian eigenspaces of R.
Mat standardizing_map(const Mat& R, double tol = 1e-9);

/// R-reversible symplectic matrix with eigenvalues x_i and 1/x_i.
/// Requires 1 < x_1 < ... < x_d.
Mat make_r_reversible(const Mat& R, const std::vector<double>& x, double tol = 1e-9);

/// ||(R L)^2 - I||_max.
double reversibility_residual(const Mat& R, const Mat& L);

enum class UpsilonReason { None, RootOfUnity, DoubleEigenvalue };
std::string to_string(UpsilonReason r);

struct UpsilonVerdict {
  bool in_upsilon = false;
  UpsilonReason reason = UpsilonReason::None;
  int order = 0;  ///< root-of-unity order, 0 if not applicable
  double min_root_distance = 0.0;
  double min_eigenvalue_gap = 0.0;
  double discriminant = 0.0;  ///< prod_{i<j} (l_i - l_j)^2, reported for cross-checks
};

UpsilonVerdict classify_upsilon(const Mat& M, double root_tol, double gap_tol, int k_max);
inline UpsilonVerdict classify_upsilon(const Mat& M, const Tolerances& tol = {}) {
  return classify_upsilon(M, tol.root_tol, tol.gap_tol, tol.k_max);
}

/// Any conjugacy-invariant degeneracy predicate can be plugged in here.
using UpsilonPredicate = std::function<UpsilonVerdict(const Mat&)>;
UpsilonPredicate default_upsilon(const Tolerances& tol = {});

/// Fraction of the given matrices that the predicate places in the degenerate set.
double upsilon_fraction(const std::vector<Mat>& mats, const UpsilonPredicate& pred);

/// exp of a random Hamiltonian matrix with block entries uniform in [-scale, scale].
Mat random_symplectic(int d, std::mt19937_64& rng, double scale = 1.0);

/// Random R-reversible matrix: R P^{-1} R L0 P with L0 from make_r_reversible.
Mat random_r_reversible(const Mat& R, std::mt19937_64& rng);

/// Draws n_samples random R-reversible matrices and returns the fraction in Upsilon.
double sample_upsilon_fraction_in_RA(const Mat& R, int n_samples, std::uint64_t rng_seed,
                                     const UpsilonPredicate& pred);

/// Complex eigenvalues of a real matrix.
CVec eigenvalues(const Mat& M);

/// Largest distance from an eigenvalue to the nearest reciprocal of another eigenvalue.
double reciprocal_pairing_residual(const Mat& M);

/// Distance between two eigenvalue multisets after greedy matching.
double eigenvalue_multiset_distance(const CVec& a, const CVec& b);

}  // namespace libra
