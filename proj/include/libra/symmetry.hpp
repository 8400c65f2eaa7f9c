#pragma once

#include "libra/config.hpp"
#include "libra/hamsys.hpp"

#include <functional>
#include <optional>

namespace libra {

/// Fiber minimum (q, p*) with dH/dp(q, p*) = 0.
struct GammaPoint {
  Vec q;
  Vec p_star;
  double residual = 0.0;

  Vec x() const;
};

/// Image of the fiber symmetry and its scale factor.
struct SymmetryResult {
  Vec image;
  double scale = 1.0;
  double residual_proportional = 0.0;  ///< |dH/dp(image) + scale dH/dp(x)|
  double residual_energy = 0.0;        ///< |H(image) - H(x)|
  bool on_gamma = false;               ///< x was within gamma_tol of the critical graph
  bool used_fallback = false;          ///< Newton failed and the ray search was used
};

/// Minimizer of p -> H(q, p) by damped Newton from the seed (zero by default).
/// Throws NoMinimumError if Newton does not converge.
GammaPoint fiber_minimum(const System& sys, const Vec& q, const Tolerances& tol = {},
                         std::optional<Vec> seed = std::nullopt);

/// d(p*)/dq = -(d2H/dp2)^{-1} d2H/dpdq at the fiber minimum.
Mat dgamma_section(const System& sys, const Vec& q, const Tolerances& tol = {});

/// Fiber map (q, p) -> (q, dH/dp).
Vec legendre_h(const System& sys, const Vec& x);
/// Inverse fiber map: the p with dH/dp(q, p) = v.
Vec legendre_g(const System& sys, const Vec& q, const Vec& v, const Tolerances& tol = {},
               std::optional<Vec> seed = std::nullopt);

/// Companion point with the same energy and anti-parallel fiber derivative.
/// Inside gamma_tol of the critical graph x itself is returned with scale 1.
/// Throws SymmetryError if neither Newton nor the ray search converges.
SymmetryResult apply_symmetry(const System& sys, const Vec& x, const Tolerances& tol = {});

/// Finite-difference Jacobian of the symmetry with Richardson extrapolation.
Mat symmetry_jacobian(const System& sys, const Vec& x, const Tolerances& tol = {},
                      double h = 1e-4);

/// [[I, 0], [2 dp*/dq, -I]]: the Jacobian of the symmetry at a point of the critical graph.
Mat symmetry_jacobian_on_gamma(const System& sys, const Vec& q, const Tolerances& tol = {});

/// f(y, x) for the model involution; convex in x with minimum at x = 0.
using ModelFunction = std::function<double(const Vec& y, const Vec& x)>;

struct ModelInvolution {
  Vec x_tilde;
  double s = 1.0;
};

/// Solves f(y, -s x) = f(y, x) for s > 0; s = 1 at x = 0.
ModelInvolution model_involution(const ModelFunction& f, const Vec& y, const Vec& x,
                                 double s_limit = 1e6);

}  // namespace libra
