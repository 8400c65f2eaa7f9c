#pragma once

#include "libra/ode.hpp"

namespace libra {

/// All numerical thresholds in one place. Every routine that judges a
/// residual takes its threshold from here unless the caller overrides it.
struct Tolerances {
  double symplectic_tol = 1e-9;
  double gap_tol = 1e-7;
  double root_tol = 1e-8;
  int k_max = 12;
  double gamma_tol = 1e-6;
  double gamma_event_tol = 1e-10;
  double energy_drift_tol = 1e-8;  ///< relative to max(1, |energy|)
  double newton_tol = 1e-12;
  double transv_tol = 1e-6;
  double velocity_floor = 1e-6;
  int k_div = 6;
  double integrator_rtol = 1e-12;
  double integrator_atol = 1e-13;
  double construction_tol = 1e-7;
  double decision_tol = 1e-4;
  double closure_tol = 1e-9;      ///< accepted |phi(T, x) - x| of a periodic orbit
  double minimality_tol = 1e-6;   ///< closure at T/k that flags a non-minimal period
  double chord_tol = 1e-8;        ///< start and end residuals of a verified chord
  double reversibility_tol = 1e-5;  ///< reduced reversibility and reversible-point residuals

  OdeOptions ode() const {
    OdeOptions o;
    o.rtol = integrator_rtol;
    o.atol = integrator_atol;
    return o;
  }

  /// Throws ConfigError naming the first non-positive field.
  void validate() const;
};

}  // namespace libra
