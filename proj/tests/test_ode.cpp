#include "doctest.h"

#include "libra/ode.hpp"

#include <cmath>
#include <numbers>

using namespace libra;

namespace {

OdeRhs oscillator() {
  return [](double, const Vec& y, Vec& dy) {
    dy(0) = y(1);
    dy(1) = -y(0);
  };
}

}  // namespace

TEST_CASE("oscillator returns to its start after one period") {
  Vec y0(2);
  y0 << 1.0, 0.0;
  auto sol = integrate(oscillator(), 0.0, y0, 2.0 * std::numbers::pi);
  CHECK((sol.final_state() - y0).norm() < 1e-10);
}

TEST_CASE("dense output matches the closed form between nodes") {
  Vec y0(2);
  y0 << 1.0, 0.0;
  auto sol = integrate(oscillator(), 0.0, y0, 10.0);
  double worst = 0.0;
  for (int i = 0; i <= 997; ++i) {
    double t = 10.0 * i / 997.0;
    Vec y = sol(t);
    worst = std::max(worst, std::hypot(y(0) - std::cos(t), y(1) + std::sin(t)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("backward integration inverts forward integration") {
  Vec y0(2);
  y0 << 0.3, -0.7;
  auto fwd = integrate(oscillator(), 0.0, y0, 3.0);
  auto back = integrate(oscillator(), 3.0, fwd.final_state(), 0.0);
  CHECK((back.final_state() - y0).norm() < 1e-10);
  Vec mid = back(1.5);
  CHECK((mid - fwd(1.5)).norm() < 1e-9);
}

TEST_CASE("requested stop times are hit exactly as nodes") {
  Vec y0(1);
  y0 << 1.0;
  OdeRhs decay = [](double, const Vec& y, Vec& dy) { dy = -y; };
  auto sol = integrate(decay, 0.0, y0, 2.0, {}, {0.5, 1.25, 3.0});
  const auto& t = sol.node_times();
  CHECK(std::count(t.begin(), t.end(), 0.5) == 1);
  CHECK(std::count(t.begin(), t.end(), 1.25) == 1);
  CHECK(std::abs(sol.final_state()(0) - std::exp(-2.0)) < 1e-12);
}

TEST_CASE("finite-time blow-up raises with the last reached time") {
  Vec y0(1);
  y0 << 1.0;
  OdeRhs riccati = [](double, const Vec& y, Vec& dy) { dy(0) = y(0) * y(0); };
  try {
    integrate(riccati, 0.0, y0, 2.0);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.last_time() < 1.0);
    CHECK(e.last_time() > 0.99);
  }
}

TEST_CASE("zero-length integration returns the initial state") {
  Vec y0(2);
  y0 << 1.0, 2.0;
  auto sol = integrate(oscillator(), 1.0, y0, 1.0);
  CHECK(sol.num_steps() == 0);
  CHECK(sol(1.0) == y0);
}
