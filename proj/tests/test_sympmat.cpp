#include "doctest.h"

#include "libra/linalg.hpp"
#include "libra/sympmat.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace libra;

namespace {

Mat rotation(double a) {
  Mat m(2, 2);
  m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return m;
}

}  // namespace

TEST_CASE("symplectic predicate") {
  CHECK(is_symplectic(Mat::Identity(4, 4), 1e-10));
  CHECK(is_symplectic(symplectic_J(1), 1e-10));
  CHECK_FALSE(is_symplectic(2.0 * Mat::Identity(2, 2), 1e-10));
  // M^T J M = 4 J for 2 I
  CHECK(symplectic_residual(2.0 * Mat::Identity(2, 2)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(is_symplectic(Mat::Identity(3, 3), 1e-10), DimensionError);
}

TEST_CASE("antisymplectic involution predicate") {
  for (int d = 1; d <= 3; ++d) {
    CHECK(is_antisymplectic_involution(R0(d), 1e-10));
    CHECK(is_antisymplectic_involution(R1(d), 1e-10));
  }
  CHECK_FALSE(is_antisymplectic_involution(symplectic_J(1), 1e-10));
  CHECK_THROWS_AS(is_antisymplectic_involution(Mat::Identity(3, 3), 1e-10), DimensionError);
}

TEST_CASE("conjugate involution") {
  CHECK(max_abs(conjugate_involution(Mat::Identity(2, 2), R0(1)) - R0(1)) == 0.0);
  Mat expected(2, 2);
  expected << -1, 0, 0, 1;
  CHECK(max_abs(conjugate_involution(symplectic_J(1), R0(1)) - expected) < 1e-15);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    Mat M = random_symplectic(2, rng);
    CHECK(is_antisymplectic_involution(conjugate_involution(M, R0(2)), 1e-9));
  }
  Mat singular = Mat::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(conjugate_involution(singular, R0(1)), NumericalError);
}

TEST_CASE("tangent space to antisymplectic involutions has dimension d(d+1)") {
  CHECK(tangent_basis_A2d(R0(1)).size() == 2);
  CHECK(tangent_basis_A2d(R0(2)).size() == 6);
  CHECK(tangent_basis_A2d(R0(3)).size() == 12);
  // at R0 the tangent vectors are [[0, a], [b, 0]]
  for (const auto& X : tangent_basis_A2d(R0(1))) {
    CHECK(std::abs(X(0, 0)) < 1e-12);
    CHECK(std::abs(X(1, 1)) < 1e-12);
  }
  for (const auto& X : tangent_basis_A2d(R0(2))) {
    CHECK(max_abs(X.topLeftCorner(2, 2)) < 1e-12);
    CHECK(max_abs(X.bottomRightCorner(2, 2)) < 1e-12);
    CHECK(max_abs(X.topRightCorner(2, 2) - X.topRightCorner(2, 2).transpose()) < 1e-12);
    CHECK(max_abs(X.bottomLeftCorner(2, 2) - X.bottomLeftCorner(2, 2).transpose()) < 1e-12);
  }
  CHECK_THROWS_AS(tangent_basis_A2d(symplectic_J(1)), NumericalError);
}

TEST_CASE("R-reversible construction") {
  Mat L = make_r_reversible(R1(1), {2.0});
  Mat expected(2, 2);
  expected << 2.0, 0.0, 0.0, 0.5;
  CHECK(max_abs(L - expected) < 1e-12);

  Mat L0 = make_r_reversible(R0(1), {2.0});
  CHECK(reversibility_residual(R0(1), L0) < 1e-9);
  CHECK(eigenvalue_multiset_distance(eigenvalues(L0), CVec{{2.0, 0.5}}) < 1e-9);

  Mat L2 = make_r_reversible(R1(2), {2.0, 3.0});
  CVec want(4);
  want << 2.0, 3.0, 0.5, 1.0 / 3.0;
  CHECK(eigenvalue_multiset_distance(eigenvalues(L2), want) < 1e-9);
  CHECK(is_symplectic(L2, 1e-9));

  CHECK_THROWS_AS(make_r_reversible(R1(2), {3.0, 2.0}), InputError);
  CHECK_THROWS_AS(make_r_reversible(symplectic_J(1), {2.0}), InputError);
}

TEST_CASE("standardizing map conjugates R to R1") {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    Mat R = conjugate_involution(random_symplectic(d, rng), R0(d));
    Mat M = standardizing_map(R);
    CHECK(is_symplectic(M, 1e-8));
    CHECK(max_abs(M.inverse() * R * M - R1(d)) < 1e-8);
  }
}

TEST_CASE("Upsilon classifier") {
  auto v7 = classify_upsilon(rotation(2.0 * std::numbers::pi / 7.0), 1e-8, 1e-7, 12);
  CHECK(v7.in_upsilon);
  CHECK(v7.reason == UpsilonReason::RootOfUnity);
  CHECK(v7.order == 7);

  Mat hyp(2, 2);
  hyp << 2.0, 0.0, 0.0, 0.5;
  auto vh = classify_upsilon(hyp, 1e-8, 1e-7, 12);
  CHECK_FALSE(vh.in_upsilon);
  CHECK(vh.reason == UpsilonReason::None);
  CHECK(vh.min_eigenvalue_gap == doctest::Approx(1.5));
  CHECK(vh.discriminant == doctest::Approx(2.25));

  auto vi = classify_upsilon(Mat::Identity(2, 2), 1e-8, 1e-7, 12);
  CHECK(vi.in_upsilon);
  CHECK(vi.reason == UpsilonReason::RootOfUnity);
  CHECK(vi.order == 1);
  CHECK(vi.min_eigenvalue_gap == 0.0);

  // an irrational rotation stays out at k_max = 12
  auto vr = classify_upsilon(rotation(2.0 * std::numbers::pi * std::sqrt(2.0)), 1e-8, 1e-7, 12);
  CHECK_FALSE(vr.in_upsilon);
}

TEST_CASE("Upsilon verdicts are stable under well-conditioned conjugation") {
  std::mt19937_64 rng(3);
  std::vector<Mat> probes = {rotation(2.0 * std::numbers::pi / 5.0), rotation(1.0),
                             make_r_reversible(R1(1), {3.0})};
  for (const auto& M : probes) {
    auto base = classify_upsilon(M);
    for (int k = 0; k < 10; ++k) {
      Mat P = random_symplectic(1, rng, 0.3);
      if (condition_number(P) > 10) continue;
      auto v = classify_upsilon(P.inverse() * M * P);
      CHECK(v.in_upsilon == base.in_upsilon);
      CHECK(v.order == base.order);
    }
  }
}

TEST_CASE("symplectic spectra pair eigenvalues with reciprocals") {
  std::mt19937_64 rng(5);
  for (int d = 1; d <= 3; ++d)
    for (int k = 0; k < 5; ++k) CHECK(reciprocal_pairing_residual(random_symplectic(d, rng)) < 1e-6);
}

TEST_CASE("Upsilon fraction on reversible samples") {
  auto pred = default_upsilon();
  CHECK(upsilon_fraction({Mat::Identity(2, 2)}, pred) == 1.0);
  CHECK(upsilon_fraction({}, pred) == 0.0);
  CHECK(sample_upsilon_fraction_in_RA(R1(1), 1000, 1, pred) <= 0.01);
  CHECK(sample_upsilon_fraction_in_RA(R1(2), 1000, 2, pred) <= 0.01);
}

TEST_CASE("Hamiltonian block assembly round-trips") {
  HamiltonianBlocks h{Mat::Identity(2, 2), 2.0 * Mat::Identity(2, 2), Mat::Random(2, 2)};
  Mat L = h.assemble();
  auto back = HamiltonianBlocks::split(L);
  CHECK(max_abs(back.C - h.C) == 0.0);
  CHECK(HamiltonianBlocks::defect(L) == 0.0);
  // J L is symmetric for Hamiltonian L
  Mat JL = symplectic_J(2) * L;
  CHECK(max_abs(JL - JL.transpose()) < 1e-15);
}
