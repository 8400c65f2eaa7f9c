#include "libra/roots.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <string>

namespace libra {

double bracket_root(const std::function<double(double)>& f, double a, double b, double xtol,
                    int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(std::signbit(fa) != std::signbit(fb)))
    throw NewtonError("root bracket [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] has no sign change");
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto tol = [xtol](double x, double y) { return std::abs(x - y) <= xtol * std::max(1.0, std::abs(x)); };
  auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (lo + hi);
}

double expanding_root(const std::function<double(double)>& f, double a, double b,
                      double b_limit, double xtol) {
  double fa = f(a);
  double lo = a;
  while (true) {
    double fb = f(b);
    if (std::signbit(fb) != std::signbit(fa) || fb == 0.0) return bracket_root(f, lo, b, xtol);
    if (std::abs(b) >= std::abs(b_limit)) throw NewtonError("no sign change before the search limit");
    lo = b;
    fa = fb;
    b = a + 2.0 * (b - a);
  }
}

}  // namespace libra
