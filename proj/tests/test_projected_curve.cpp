#include "doctest.h"

#include "libra/projected_curve.hpp"

#include <cmath>

using namespace libra;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

FunctionCurve circle() {
  return FunctionCurve(
      2 * M_PI, 2, [](double t) { return v2(std::cos(t), std::sin(t)); },
      [](double t) { return v2(-std::sin(t), std::cos(t)); },
      [](double t) { return v2(-std::cos(t), -std::sin(t)); });
}

// (A cos t, B sin 2t) crosses itself at the origin for t = pi/2 and 3pi/2
FunctionCurve figure_eight(double A, double B) {
  return FunctionCurve(
      2 * M_PI, 2, [=](double t) { return v2(A * std::cos(t), B * std::sin(2 * t)); },
      [=](double t) { return v2(-A * std::sin(t), 2 * B * std::cos(2 * t)); },
      [=](double t) { return v2(-A * std::cos(t), -4 * B * std::sin(2 * t)); });
}

FunctionCurve trefoil() {
  return FunctionCurve(
      2 * M_PI, 2,
      [](double t) { return v2(std::sin(t) + 2 * std::sin(2 * t), std::cos(t) - 2 * std::cos(2 * t)); },
      [](double t) { return v2(std::cos(t) + 4 * std::cos(2 * t), -std::sin(t) + 4 * std::sin(2 * t)); },
      [](double t) { return v2(-std::sin(t) - 8 * std::sin(2 * t), -std::cos(t) + 8 * std::cos(2 * t)); });
}

// r = cos 3t: three petals through the origin, traced once per period pi
FunctionCurve rose() {
  auto q = [](double t) { return v2(std::cos(3 * t) * std::cos(t), std::cos(3 * t) * std::sin(t)); };
  auto qd = [](double t) {
    double r = std::cos(3 * t), rd = -3 * std::sin(3 * t);
    return v2(rd * std::cos(t) - r * std::sin(t), rd * std::sin(t) + r * std::cos(t));
  };
  auto qdd = [](double t) {
    double r = std::cos(3 * t), rd = -3 * std::sin(3 * t), rdd = -9 * std::cos(3 * t);
    return v2(rdd * std::cos(t) - 2 * rd * std::sin(t) - r * std::cos(t),
              rdd * std::sin(t) + 2 * rd * std::cos(t) - r * std::sin(t));
  };
  return FunctionCurve(M_PI, 2, q, qd, qdd);
}

// back and forth along a segment: stops at t = 0 and t = pi
FunctionCurve segment() {
  return FunctionCurve(
      2 * M_PI, 2, [](double t) { return v2(std::cos(t), 0.0); },
      [](double t) { return v2(-std::sin(t), 0.0); },
      [](double t) { return v2(-std::cos(t), 0.0); });
}

}  // namespace

TEST_CASE("time helpers") {
  CHECK(wrap_time(-0.5, 2.0) == doctest::Approx(1.5));
  CHECK(wrap_time(4.25, 2.0) == doctest::Approx(0.25));
  CHECK(circle_diff(0.1, 1.9, 2.0) == doctest::Approx(0.2));
  CHECK(circle_diff(1.9, 0.1, 2.0) == doctest::Approx(-0.2));
}

TEST_CASE("circle is neat and simple") {
  auto c = circle();
  auto a = analyze_curve(c);
  CHECK(a.degenerate_times.empty());
  CHECK(a.crossings.empty());
  CHECK(a.neat_certified);
  CHECK(a.revisited_fraction == 0.0);
  auto m = count_multiple_intersections(c);
  CHECK(m.count == 0);
  CHECK(m.double_points == 0);
  CHECK_FALSE(m.inconclusive);
}

TEST_CASE("figure eight has one transverse double point") {
  auto c = figure_eight(0.8, 0.3);
  auto a = analyze_curve(c);
  REQUIRE(a.crossings.size() == 1);
  CHECK(a.crossings[0].s == doctest::Approx(M_PI / 2).epsilon(1e-10));
  CHECK(a.crossings[0].sigma == doctest::Approx(3 * M_PI / 2).epsilon(1e-10));
  CHECK(a.crossings[0].point.norm() < 1e-10);
  CHECK(a.crossings[0].angle > 0.1);
  CHECK(a.neat_certified);
  CHECK(a.revisited_fraction < 0.05);
}

TEST_CASE("trefoil has three double points and no triple point") {
  auto c = trefoil();
  auto m = count_multiple_intersections(c);
  CHECK(m.count == 0);
  CHECK(m.double_points == 3);
  CHECK_FALSE(m.inconclusive);
}

TEST_CASE("three-petal rose has one triple point") {
  auto c = rose();
  auto m = count_multiple_intersections(c);
  CHECK(m.count == 1);
  REQUIRE(m.points.size() == 1);
  CHECK(m.points[0].norm() < 1e-8);
  CHECK_FALSE(m.inconclusive);
}

TEST_CASE("retraced segment has two degenerate times and no neat interval") {
  auto c = segment();
  auto a = analyze_curve(c);
  REQUIRE(a.degenerate_times.size() == 2);
  CHECK(a.degenerate_times[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(a.degenerate_times[1] == doctest::Approx(M_PI).epsilon(1e-9));
  CHECK_FALSE(a.neat_certified);
  CHECK(a.revisited_fraction > 0.95);
  CHECK(a.crossings.empty());
}

TEST_CASE("match_time recovers the partner time of a crossing") {
  auto c = figure_eight(0.8, 0.3);
  auto [sig, res] = match_time(c, M_PI / 2, 3 * M_PI / 2 + 0.01);
  CHECK(res < 1e-12);
  CHECK(sig == doctest::Approx(3 * M_PI / 2));
}
