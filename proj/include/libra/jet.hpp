#pragma once

#include "libra/types.hpp"

#include <functional>
#include <vector>

namespace libra {

/// Truncated Taylor expansion sum_k c[k] (t - t0)^k of a matrix-valued function.
/// Products and inverses drop every term beyond the common order.
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::vector<Mat> coeffs) : c_(std::move(coeffs)) {}
  static Jet constant(const Mat& m, int order);
  static Jet identity(int n, int order);
  static Jet scalar(double v, int order) { return constant(Mat::Constant(1, 1, v), order); }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  int rows() const { return c_.empty() ? 0 : static_cast<int>(c_[0].rows()); }
  int cols() const { return c_.empty() ? 0 : static_cast<int>(c_[0].cols()); }
  const Mat& operator[](int k) const { return c_[k]; }
  Mat& operator[](int k) { return c_[k]; }
  const Mat& value() const { return c_[0]; }
  /// k-th derivative at t0.
  Mat derivative(int k) const;

  Jet truncated(int order) const;
  /// d/dt; the order drops by one.
  Jet differentiated() const;
  Jet transpose() const;
  Jet block(int i, int j, int r, int c) const;
  /// Matrix inverse by the recursion B_k = -B_0 sum_{j>=1} c_j B_{k-j}.
  Jet inverse() const;

  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a);
  /// Cauchy product. A 1x1 factor acts as a scalar.
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(double s, const Jet& a);

 private:
  std::vector<Mat> c_;
};

/// Assembles [[a, b], [c, d]] coefficientwise.
Jet block_jet(const Jet& a, const Jet& b, const Jet& c, const Jet& d);

/// Fornberg weights: row k holds the weights of the k-th derivative at z
/// for the nodes x, k = 0..m.
Mat fornberg_weights(double z, const std::vector<double>& x, int m);

/// Matrix-valued curve on [0, T] given by a jet provider.
class Curve {
 public:
  using JetProvider = std::function<Jet(double t, int order)>;

  Curve() = default;
  Curve(int rows, int cols, double T, JetProvider provider, int max_order);
  /// From a closure d(t, k) returning the k-th derivative, k <= max_order.
  static Curve from_derivatives(int rows, int cols, double T,
                                std::function<Mat(double, int)> d, int max_order);
  static Curve from_scalar(double T, std::function<double(double, int)> d, int max_order);
  static Curve constant(const Mat& m, double T);
  /// Uniform samples on [0, T]; derivatives up to order 3 from local Fornberg stencils.
  static Curve from_samples(double T, std::vector<Mat> samples, int stencil = 9);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double T() const { return T_; }
  int max_order() const { return max_order_; }
  Mat operator()(double t) const;
  double scalar(double t) const { return (*this)(t)(0, 0); }
  Mat derivative(double t, int k) const;
  /// Throws CapabilityError if the provider does not reach the requested order.
  Jet jet(double t, int order) const;

 private:
  int rows_ = 0, cols_ = 0;
  double T_ = 0.0;
  JetProvider provider_;
  int max_order_ = 0;
};

}  // namespace libra
