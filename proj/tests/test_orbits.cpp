#include "doctest.h"

#include "libra/builtin_systems.hpp"
#include "libra/orbits.hpp"

#include <cmath>

using namespace libra;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec x(v.size());
  int i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

PeriodicOrbit double_well_libration(double omega = 1.5, double energy = 0.5) {
  std::map<std::string, double> par{{"omega", omega}, {"energy", energy}};
  auto [x0, T] = recommended_seed("double_well", par);
  return find_periodic_orbit(make_builtin("double_well", par), x0, T);
}

System oscillator(double w1, double w2) {
  auto V = std::make_shared<QuadraticPotential>(pt({w1, w2}));
  return System(std::make_shared<MechanicalHamiltonian>(2, V, 0.5));
}

}  // namespace

TEST_CASE("periodic orbit of the harmonic oscillator") {
  auto o = find_periodic_orbit(make_builtin("harmonic"), pt({1, 0, 0, 0}), 6.0);
  CHECK(o.period == doctest::Approx(2 * M_PI).epsilon(1e-8));
  CHECK(o.closure_residual <= 1e-9);
  CHECK(o.minimal);
}

TEST_CASE("fixed point seed is a period collapse") {
  CHECK_THROWS_AS(find_periodic_orbit(make_builtin("double_well"), pt({1, 0, 0, 0}), 2.0),
                  PeriodCollapseError);
}

TEST_CASE("double-well libration is a round trip with sigma(t) = -t") {
  auto o = double_well_libration();
  CHECK(o.closure_residual <= 1e-9);
  auto c = classify_orbit(o);
  REQUIRE(c.kind == OrbitKind::RoundTrip);
  REQUIRE(c.degenerate_times.size() == 2);
  double gap = std::abs(circle_diff(c.degenerate_times[1], c.degenerate_times[0], o.period));
  CHECK(gap == doctest::Approx(o.period / 2).epsilon(1e-6));
  auto s = time_symmetry_sigma(o, 0.0, o.period / 2);
  CHECK(s.derivative_residual <= 1e-4);
  CHECK(s.fixed_point_count == 2);
  for (int k = 0; k < 50; ++k) {
    double t = o.period * k / 50.0;
    CHECK(std::abs(circle_diff(s(t), -t, o.period)) < 1e-8);
    CHECK(std::abs(circle_diff(s(s(t)), t, o.period)) < 1e-6);
  }
  CHECK(count_multiple_intersections(o).count == 0);
}

TEST_CASE("sigma of a non-reversible libration uses the inverse scale") {
  // in one degree of freedom every orbit is a round trip; the kinetic term is not even in p
  auto Hk = std::make_shared<AsymmetricKineticHamiltonian>(
      1, 0.8, std::make_shared<QuadraticPotential>(pt({1.0})), 0.5);
  System sys(Hk);
  auto o = find_periodic_orbit(sys, pt({1.0, 0.0}), 2 * M_PI);
  auto c = classify_orbit(o);
  REQUIRE(c.kind == OrbitKind::RoundTrip);
  double gap = std::abs(circle_diff(c.degenerate_times[1], c.degenerate_times[0], o.period));
  CHECK(std::abs(gap - o.period / 2) > 0.01);
  auto s = time_symmetry_sigma(o, c.degenerate_times[0], c.degenerate_times[1]);
  CHECK(s.max_projection_residual < 1e-6);
  OrbitProjection proj(o);
  for (double t : {0.7, 1.9, 4.1}) {
    double scale = apply_symmetry(sys, proj.state(t)).scale;
    double scale_at_image = apply_symmetry(sys, proj.state(s(t))).scale;
    CHECK(std::abs(scale - 1.0) > 0.05);
    CHECK(s.derivative(t) == doctest::Approx(-1.0 / scale).epsilon(1e-10));
    CHECK(s.derivative(t) == doctest::Approx(-scale_at_image).epsilon(1e-6));
  }
}

TEST_CASE("circular magnetic orbit is neat") {
  auto [x0, T] = recommended_seed("magnetic");
  auto o = find_periodic_orbit(make_builtin("magnetic"), x0, T);
  CHECK(o.period == doctest::Approx(T).epsilon(1e-8));
  auto c = classify_orbit(o);
  CHECK(c.kind == OrbitKind::Neat);
  CHECK(c.degenerate_times.empty());
  CHECK(c.self_intersection_times.empty());
  CHECK(count_multiple_intersections(o).count == 0);
}

TEST_CASE("figure-eight projection is neat with a self-intersection") {
  System sys = oscillator(1.0, 2.0);
  auto o = make_periodic_orbit(sys, pt({0.8, 0, 0, 0.6}), 2 * M_PI);
  CHECK(std::abs(sys.energy(o.base_point)) < 1e-14);
  CHECK(o.closure_residual < 1e-9);
  auto c = classify_orbit(o);
  CHECK(c.kind == OrbitKind::Neat);
  REQUIRE(c.self_intersection_times.size() == 2);
  CHECK(c.self_intersection_times[0] == doctest::Approx(M_PI / 2).epsilon(1e-8));
  CHECK(c.self_intersection_times[1] == doctest::Approx(3 * M_PI / 2).epsilon(1e-8));
}

TEST_CASE("minimality flag catches a doubled period") {
  auto o = make_periodic_orbit(make_builtin("harmonic"), pt({1, 0, 0, 0}), 4 * M_PI);
  CHECK_FALSE(o.minimal);
  CHECK(o.note.find("T/2") != std::string::npos);
}

TEST_CASE("double-well chords") {
  System sys = make_builtin("double_well");
  auto o = double_well_libration();
  Gamma0Grid grid{pt({0.2, -0.8}), pt({1.6, 0.8}), 10};
  auto seeds = sample_gamma0(sys, grid);
  CHECK(seeds.size() >= 8);
  for (const auto& g : seeds) {
    CHECK(std::abs(sys.energy(g.x())) < 1e-12);
    CHECK(g.p_star.norm() < 1e-14);
  }

  auto chords = find_chords(sys, 0.6 * o.period, grid);
  REQUIRE_FALSE(chords.empty());
  const Chord* axis = nullptr;
  for (const auto& c : chords) {
    CHECK(c.verified);
    CHECK(c.end_residual <= 1e-8);
    CHECK(c.end.p_star.norm() < 1e-12);
    if (std::abs(c.start.q(1)) < 1e-8 && c.start.q(0) > 1.0) axis = &c;
  }
  REQUIRE(axis != nullptr);
  CHECK(axis->duration == doctest::Approx(o.period / 2).epsilon(1e-6));
  CHECK(axis->minimal);
  // a chord start lies on a brake orbit of twice the duration
  Vec x = axis->start.x();
  CHECK((flow_map(sys, x, 2 * axis->duration) - x).norm() < 1e-7);
  auto brake = find_periodic_orbit(sys, x, 2 * axis->duration);
  CHECK(brake.closure_residual <= 1e-8);

  CHECK(find_chords(sys, 0.3, grid).empty());
}

TEST_CASE("anisotropic oscillator chord is transverse") {
  System sys = oscillator(1.0, std::sqrt(2.0));
  Chord c = refine_chord(sys, pt({1.0, 0.02}), 3.0);
  CHECK(c.duration == doctest::Approx(M_PI).epsilon(1e-10));
  CHECK(c.start.q.norm() == doctest::Approx(1.0).epsilon(1e-10));
  auto [ok, s] = chord_transversality(sys, c);
  CHECK(ok);
  double expected = std::min(1.0, std::sqrt(2.0) * std::abs(std::sin(std::sqrt(2.0) * M_PI)));
  CHECK(s == doctest::Approx(expected).epsilon(1e-8));
  CHECK(c.transversality_sigma_min == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("degenerate chord becomes transverse under a bump") {
  System toy = oscillator(1.0, 0.0);
  Chord c = refine_chord(toy, pt({1.0, 0.3}), 3.0);
  CHECK(c.duration == doctest::Approx(M_PI).epsilon(1e-10));
  auto [ok, s] = chord_transversality(toy, c);
  CHECK_FALSE(ok);
  CHECK(s < 1e-9);

  System bumped = toy.perturbed(std::make_shared<BumpPotential>(pt({0.2, 0.5}), 0.6, 1.0), 0.05);
  Chord cb = refine_chord(bumped, c.start.q, c.duration);
  auto [okb, sb] = chord_transversality(bumped, cb);
  CHECK(okb);
  CHECK(sb > 1e-3);
}
