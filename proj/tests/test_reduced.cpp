#include "doctest.h"

#include "libra/builtin_systems.hpp"
#include "libra/linalg.hpp"
#include "libra/reduced.hpp"

#include <cmath>

using namespace libra;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec x(v.size());
  int i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

PeriodicOrbit double_well_libration(double omega = 1.5, double energy = 0.5, double eps = 0.0) {
  std::map<std::string, double> par{{"omega", omega}, {"energy", energy}, {"eps", eps}};
  auto [x0, T] = recommended_seed("double_well", par);
  return find_periodic_orbit(make_builtin("double_well", par), x0, T);
}

PeriodicOrbit magnetic_circle() {
  auto [x0, T] = recommended_seed("magnetic");
  return find_periodic_orbit(make_builtin("magnetic"), x0, T);
}

double max_speed_time(const PeriodicOrbit& o) {
  OrbitProjection proj(o);
  double best = -1, tb = 0;
  for (int k = 0; k < 2000; ++k) {
    double t = o.period * k / 2000;
    if (proj.Qdot(t).norm() > best) {
      best = proj.Qdot(t).norm();
      tb = t;
    }
  }
  return tb;
}

// Straight libration along q1 of a kinetic term that is not even in p1.
PeriodicOrbit asymmetric_libration() {
  auto V = std::make_shared<QuadraticPotential>(pt({1.0, 1.3}));
  System sys(std::make_shared<AsymmetricKineticHamiltonian>(2, 0.8, V, 0.5));
  return find_periodic_orbit(sys, pt({1.0, 0.0, 0.0, 0.0}), 2 * M_PI);
}

}  // namespace

TEST_CASE("section frame of a mechanical libration") {
  auto o = double_well_libration();
  double ta = max_speed_time(o);
  SectionFrame f = build_section(o, ta);
  CHECK(std::abs(std::abs(f.e0()(0)) - 1.0) < 1e-12);
  CHECK(std::abs(f.e0()(1)) < 1e-10);
  const int n = f.n();
  Vec y = f.to_frame(f.anchor);
  CHECK(f.kappa(0.0, f.xstar(f.anchor)) == doctest::Approx(-y(n)).epsilon(1e-12));
  CHECK((f.from_frame(y) - f.anchor).norm() < 1e-14);

  // closed form: p0^2 / 2 + |p*|^2 / 2 + V = E with V the double well
  double r = 0.1;
  Vec xs = pt({0.05, 0.1});
  Vec q = f.qa + f.O * pt({r, xs(0)});
  double V = std::pow(q(0) * q(0) - 1, 2) + 0.5 * 1.5 * 1.5 * q(1) * q(1);
  double p0 = std::sqrt(2 * (0.5 - V) - xs(1) * xs(1));
  CHECK(std::abs(std::abs(f.kappa(r, xs)) - p0) < 1e-10);
  CHECK(std::abs(o.sys.energy(f.lift(r, xs))) < 1e-10);

  OrbitClassification c = classify_orbit(o);
  CHECK_THROWS_AS(build_section(o, c.degenerate_times[0]), SectionError);
}

TEST_CASE("transition maps are symplectic, compose and match the variational route") {
  auto o = magnetic_circle();
  double ta = max_speed_time(o);
  SectionFrame f = build_section(o, ta);
  auto [lo, hi] = monotone_branch(f, o);
  CHECK(lo < ta);
  CHECK(hi > ta);

  auto I = transition_map(f, o, 0.05, 0.05);
  CHECK(max_abs(I.matrix - Mat::Identity(2, 2)) == 0.0);

  auto a = transition_map(f, o, -0.2, 0.1), b = transition_map(f, o, 0.1, 0.25),
       c = transition_map(f, o, -0.2, 0.25);
  CHECK(a.symplectic_residual < 1e-7);
  CHECK(max_abs(b.matrix * a.matrix - c.matrix) < 1e-7);
  CHECK(c.min_B_eigenvalue > 0.0);

  Mat v = section_flow(f, c.t_from, f, c.t_to, o);
  CHECK(max_abs(v - c.matrix) < 1e-7);

  OrbitProjection proj(o);
  double r_far = f.r(proj.state(hi)) + 0.1;
  CHECK_THROWS_AS(transition_map(f, o, 0.0, r_far), ReparametrizationError);
}

TEST_CASE("B block equals the momentum Hessian on straight paths") {
  for (auto o : {double_well_libration(), double_well_libration(1.2, 0.3), asymmetric_libration()}) {
    SectionFrame f = build_section(o, max_speed_time(o));
    auto tm = transition_map(f, o, -0.2, 0.2);
    for (std::size_t k = 0; k < tm.blocks.size(); ++k)
      CHECK(max_abs(tm.blocks[k].B - tm.hpp_star[k]) < 1e-6);
    CHECK(tm.min_B_eigenvalue > 0.0);
  }
}

TEST_CASE("return maps of oscillators") {
  auto iso = find_periodic_orbit(make_builtin("harmonic"), pt({1, 0, 0, 0.3}), 2 * M_PI);
  auto M = reduced_return_map(iso).matrix;
  CHECK(max_abs(M - Mat::Identity(2, 2)) < 1e-8);

  std::map<std::string, double> par{{"omega1", 1.0}, {"omega2", std::sqrt(2.0)}};
  auto aniso = find_periodic_orbit(make_builtin("harmonic", par), pt({1, 0, 0, 0}), 2 * M_PI);
  auto R = reduced_return_map(aniso);
  CHECK(R.symplectic_residual < 1e-9);
  CVec ev = eigenvalues(R.matrix);
  CHECK(std::abs(ev(0).real() - std::cos(2 * M_PI * std::sqrt(2.0))) < 1e-8);
  CHECK(std::abs(std::abs(ev(0).imag()) - std::abs(std::sin(2 * M_PI * std::sqrt(2.0)))) < 1e-8);
  CHECK_FALSE(classify_upsilon(R.matrix).in_upsilon);
}

TEST_CASE("return map spectrum does not depend on the anchor") {
  for (auto o : {double_well_libration(), magnetic_circle(), double_well_libration(1.3, 0.4, 0.2)}) {
    double ta = max_speed_time(o);
    auto A = reduced_return_map(o, ta), B = reduced_return_map(o, ta + 0.13 * o.period);
    CHECK(eigenvalue_multiset_distance(eigenvalues(A.matrix), eigenvalues(B.matrix)) < 1e-6);
  }
  auto o = double_well_libration();
  OrbitClassification c = classify_orbit(o);
  CHECK_THROWS_AS(reduced_return_map(o, c.degenerate_times[0]), DecompositionError);
}

TEST_CASE("reduced symmetry of a reversible libration") {
  auto o = double_well_libration();
  SectionFrame f = build_section(o, max_speed_time(o));
  for (double r : {-0.15, 0.0, 0.2}) {
    Mat R = reduced_symmetry(f, o, r);
    Mat expect = Mat::Identity(2, 2);
    expect(1, 1) = -1;
    CHECK(max_abs(R - expect) < 1e-6);
    CHECK(max_abs(reduced_symmetry_fd(f, o, r) - R) < 1e-4);
  }
  Vec x = OrbitProjection(o).state(0.3);
  Vec y = apply_symmetry(o.sys, x).image;
  Mat RR = reduced_symmetry_at(o.sys, y) * reduced_symmetry_at(o.sys, x);
  CHECK(max_abs(RR - Mat::Identity(2, 2)) < 1e-10);
}

TEST_CASE("section formula for the reduced symmetry with a non-constant scale") {
  auto o = asymmetric_libration();
  SectionFrame f = build_section(o, max_speed_time(o));
  for (double r : {-0.2, 0.1}) {
    Mat R = reduced_symmetry(f, o, r);
    CHECK(max_abs(reduced_symmetry_fd(f, o, r) - R) < 1e-4);
  }
}

TEST_CASE("reversible points of a mechanical libration") {
  auto o = double_well_libration();
  for (double t : {0.3, 1.1, 2.0}) {
    auto v = check_reversible_point(o, t);
    CHECK(v.all());
    CHECK(v.residual[1] < 1e-6);
  }
  OrbitClassification c = classify_orbit(o);
  CHECK_THROWS_AS(check_reversible_point(o, c.degenerate_times[0]), NotTwoWayError);
}

TEST_CASE("non-constant scale violates the first condition") {
  auto o = asymmetric_libration();
  auto v = check_reversible_point(o, 0.4);
  MESSAGE("residuals " << v.residual[0] << " " << v.residual[1] << " " << v.residual[2] << " scale " << v.scale);
  CHECK_FALSE(v.pass[0]);
  CHECK(v.residual[0] > 1e-2);
  CHECK(v.residual[1] < 1e-6);
}

TEST_CASE("double-well libration is reversible") {
  auto o = double_well_libration();
  auto v = check_reversible_orbit(o);
  CHECK(v.reversible);
  CHECK_FALSE(v.inconclusive);
  CHECK(v.identity_residual <= 1e-5);
  CHECK(v.antisymplectic_residual[0] <= 1e-5);
  CHECK(v.antisymplectic_residual[1] <= 1e-5);
  CHECK(v.antisymplectic_limit[0] <= 1e-5);
  CHECK(v.half_period_gap <= 1e-6);
  CHECK(v.cocycle_residual <= 1e-5);
  CHECK(v.cocycle_identity <= 1e-5);
  CHECK_THROWS_AS(check_reversible_orbit(magnetic_circle()), ClassificationError);
}

TEST_CASE("potential derivative along a section") {
  auto o = double_well_libration();
  SectionFrame f = build_section(o, max_speed_time(o));
  auto zero = std::make_shared<ZeroPotential>(2);
  auto z = potential_derivative_in_section(f, o, zero, 0.2, 5);
  for (std::size_t k = 0; k < z.s.size(); ++k) {
    CHECK(z.y_ode[k].norm() == 0.0);
    CHECK(z.y_fd[k].norm() == 0.0);
  }
  double c = f.qa(0) + 0.1 * f.e0()(0);
  auto v = std::make_shared<AxisForcingPotential>(2, 0, 1, c, 0.06, 0.7);
  auto d = potential_derivative_in_section(f, o, v, 0.2, 9);
  CHECK(d.y_ode[0].norm() == 0.0);
  CHECK(d.y_fd[0].norm() == 0.0);
  CHECK(d.y_ode.back().norm() > 1e-3);
  CHECK(d.discrepancy <= 1e-4);
  CHECK(d.warning.empty());
  MESSAGE("discrepancy " << d.discrepancy << " fd " << d.fd_error_estimate);
}
