#include "libra/jet.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <memory>

namespace libra {

Jet Jet::constant(const Mat& m, int order) {
  std::vector<Mat> c(order + 1, Mat::Zero(m.rows(), m.cols()));
  c[0] = m;
  return Jet(std::move(c));
}

Jet Jet::identity(int n, int order) { return constant(Mat::Identity(n, n), order); }

Mat Jet::derivative(int k) const {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f * c_[k];
}

Jet Jet::truncated(int order) const {
  return Jet(std::vector<Mat>(c_.begin(), c_.begin() + std::min<int>(order + 1, c_.size())));
}

Jet Jet::differentiated() const {
  std::vector<Mat> c;
  for (int k = 1; k <= order(); ++k) c.push_back(k * c_[k]);
  if (c.empty()) throw CapabilityError("cannot differentiate a jet of order 0");
  return Jet(std::move(c));
}

Jet Jet::transpose() const {
  std::vector<Mat> c;
  for (const auto& m : c_) c.push_back(m.transpose());
  return Jet(std::move(c));
}

Jet Jet::block(int i, int j, int r, int cl) const {
  std::vector<Mat> c;
  for (const auto& m : c_) c.push_back(m.block(i, j, r, cl));
  return Jet(std::move(c));
}

Jet Jet::inverse() const {
  Eigen::FullPivLU<Mat> lu(c_[0]);
  if (!lu.isInvertible()) throw InvertibilityError("jet inverse: singular leading coefficient");
  Mat B0 = lu.inverse();
  std::vector<Mat> b{B0};
  for (int k = 1; k <= order(); ++k) {
    Mat s = Mat::Zero(B0.rows(), B0.cols());
    for (int j = 1; j <= k; ++j) s += c_[j] * b[k - j];
    b.push_back(-B0 * s);
  }
  return Jet(std::move(b));
}

Jet operator+(const Jet& a, const Jet& b) {
  int K = std::min(a.order(), b.order());
  std::vector<Mat> c;
  for (int k = 0; k <= K; ++k) c.push_back(a[k] + b[k]);
  return Jet(std::move(c));
}

Jet operator-(const Jet& a, const Jet& b) {
  int K = std::min(a.order(), b.order());
  std::vector<Mat> c;
  for (int k = 0; k <= K; ++k) c.push_back(a[k] - b[k]);
  return Jet(std::move(c));
}

Jet operator-(const Jet& a) { return -1.0 * a; }

Jet operator*(const Jet& a, const Jet& b) {
  int K = std::min(a.order(), b.order());
  bool sa = a.rows() == 1 && a.cols() == 1, sb = b.rows() == 1 && b.cols() == 1;
  std::vector<Mat> c;
  for (int k = 0; k <= K; ++k) {
    Mat s;
    for (int j = 0; j <= k; ++j) {
      Mat term = sa ? Mat(a[j](0, 0) * b[k - j]) : sb ? Mat(b[k - j](0, 0) * a[j]) : Mat(a[j] * b[k - j]);
      if (j == 0)
        s = term;
      else
        s += term;
    }
    c.push_back(s);
  }
  return Jet(std::move(c));
}

Jet operator*(double s, const Jet& a) {
  std::vector<Mat> c;
  for (int k = 0; k <= a.order(); ++k) c.push_back(s * a[k]);
  return Jet(std::move(c));
}

Jet block_jet(const Jet& a, const Jet& b, const Jet& c, const Jet& d) {
  int K = std::min({a.order(), b.order(), c.order(), d.order()});
  std::vector<Mat> out;
  for (int k = 0; k <= K; ++k) {
    Mat m(a.rows() + c.rows(), a.cols() + b.cols());
    m << a[k], b[k], c[k], d[k];
    out.push_back(m);
  }
  return Jet(std::move(out));
}

Mat fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  Mat c = Mat::Zero(n + 1, m + 1);
  double c1 = 1.0, c4 = x[0] - z;
  c(0, 0) = 1.0;
  for (int i = 1; i <= n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.transpose();
}

Curve::Curve(int rows, int cols, double T, JetProvider provider, int max_order)
    : rows_(rows), cols_(cols), T_(T), provider_(std::move(provider)), max_order_(max_order) {}

Curve Curve::from_derivatives(int rows, int cols, double T, std::function<Mat(double, int)> d,
                              int max_order) {
  auto p = [d](double t, int order) {
    std::vector<Mat> c;
    double f = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 1) f *= k;
      c.push_back(d(t, k) / f);
    }
    return Jet(std::move(c));
  };
  return Curve(rows, cols, T, p, max_order);
}

Curve Curve::from_scalar(double T, std::function<double(double, int)> d, int max_order) {
  return from_derivatives(
      1, 1, T, [d](double t, int k) { return Mat::Constant(1, 1, d(t, k)); }, max_order);
}

Curve Curve::constant(const Mat& m, double T) {
  return Curve(
      static_cast<int>(m.rows()), static_cast<int>(m.cols()), T,
      [m](double, int order) { return Jet::constant(m, order); }, 1000);
}

Curve Curve::from_samples(double T, std::vector<Mat> samples, int stencil) {
  const int N = static_cast<int>(samples.size());
  if (N < stencil) throw InputError("from_samples: fewer samples than the stencil width");
  auto data = std::make_shared<std::vector<Mat>>(std::move(samples));
  const double h = T / (N - 1);
  auto p = [data, h, N, stencil](double t, int order) {
    int start = static_cast<int>(std::floor(t / h)) - stencil / 2 + 1;
    start = std::clamp(start, 0, N - stencil);
    std::vector<double> x(stencil);
    for (int i = 0; i < stencil; ++i) x[i] = (start + i) * h;
    Mat w = fornberg_weights(t, x, order);
    std::vector<Mat> c;
    double f = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 1) f *= k;
      Mat s = Mat::Zero((*data)[0].rows(), (*data)[0].cols());
      for (int i = 0; i < stencil; ++i) s += w(k, i) * (*data)[start + i];
      c.push_back(s / f);
    }
    return Jet(std::move(c));
  };
  const Mat& m0 = (*data)[0];
  return Curve(static_cast<int>(m0.rows()), static_cast<int>(m0.cols()), T, p, 3);
}

Mat Curve::operator()(double t) const { return provider_(t, 0)[0]; }

Mat Curve::derivative(double t, int k) const { return jet(t, k).derivative(k); }

Jet Curve::jet(double t, int order) const {
  if (order > max_order_)
    throw CapabilityError("curve provides derivatives up to order " + std::to_string(max_order_) +
                          ", requested " + std::to_string(order));
  return provider_(t, order);
}

}  // namespace libra
