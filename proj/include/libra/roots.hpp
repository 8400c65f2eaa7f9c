#pragma once

#include "libra/types.hpp"

#include <functional>

namespace libra {

/// Root of f in [a, b] where f(a) and f(b) have opposite signs (TOMS 748).
/// Throws NewtonError if the bracket is invalid.
double bracket_root(const std::function<double(double)>& f, double a, double b,
                    double xtol = 1e-15, int max_iter = 200);

/// Grows b geometrically from a until f changes sign, then solves.
/// Throws NewtonError if no sign change is found before b_limit.
double expanding_root(const std::function<double(double)>& f, double a, double b,
                      double b_limit, double xtol = 1e-15);

}  // namespace libra
