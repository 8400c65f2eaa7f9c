#pragma once

#include "libra/types.hpp"

#include <functional>
#include <vector>

namespace libra {

/// Right-hand side f(t, y) written into dydt (already sized).
using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-13;
  double h_init = 0.0;  ///< 0 selects the initial step automatically
  double h_max = 0.0;   ///< 0 means unbounded
  long max_steps = 2000000;
  double min_step_ratio = 1e-14;  ///< step below this fraction of |t1 - t0| is a blow-up
};

/// Piecewise dense output of an 8(5,3) Dormand-Prince integration.
/// Time may run backwards; pieces are stored in integration order.
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(double t0, Vec y0);

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  int dim() const { return static_cast<int>(y_.front().size()); }
  std::size_t num_steps() const { return h_.size(); }

  /// Interpolated state; t must lie in the covered interval.
  Vec operator()(double t) const;

  const std::vector<double>& node_times() const { return t_; }
  const std::vector<Vec>& node_states() const { return y_; }
  const Vec& final_state() const { return y_.back(); }

  void append(double h, const Vec& y_new, Mat rcont);

 private:
  std::size_t locate(double t) const;

  std::vector<double> t_;
  std::vector<Vec> y_;
  std::vector<double> h_;
  std::vector<Mat> rcont_;  // dim x 8 per step
};

/// Adaptive integration from (t0, y0) to t1. Steps are shortened to land on
/// every time in `stops` that lies strictly inside the interval.
/// Throws BlowUpError on step collapse or non-finite values.
DenseSolution integrate(const OdeRhs& rhs, double t0, const Vec& y0, double t1,
                        const OdeOptions& opt = {},
                        const std::vector<double>& stops = {});

}  // namespace libra
