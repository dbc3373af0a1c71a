#include "qrad/series.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "qrad/errors.hpp"

namespace qrad {

double VecSeries::max_abs() const {
  double m = 0.0;
  for (const Vec3& v : values) m = std::max(m, v.max_abs());
  return m;
}

namespace {

// Centred order-2 stencil for the n-th derivative, built by composing the
// exact difference operators [1 -2 1] (second derivative) and
// [-1/2 0 1/2] (first derivative).  Width is 2*ceil(n/2) + 1.
std::vector<double> central_stencil(int order) {
  std::vector<double> c{1.0};
  auto convolve = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
  };
  const std::vector<double> d2{1.0, -2.0, 1.0};
  const std::vector<double> d1{-0.5, 0.0, 0.5};
  for (int k = 0; k < order / 2; ++k) c = convolve(c, d2);
  if (order % 2 == 1) c = convolve(c, d1);
  return c;
}

}  // namespace

DerivativeSeries nth_time_derivative(const VecSeries& s, int order) {
  if (order < 1) throw ConfigError("nth_time_derivative: order must be >= 1");
  const int n = int(s.values.size());
  if (n != s.times.n_samples)
    throw ConfigError("nth_time_derivative: series length does not match its sampling");
  const std::vector<double> stencil = central_stencil(order);
  const int w = int(stencil.size()) / 2;  // half-width of the fine stencil
  // The coarse (2*dt) stencil reaches 2w nodes either side; demand at least
  // one interior sample besides the documented minimum length of order + 4.
  const int min_len = std::max(order + 4, 4 * w + 1);
  if (n < min_len)
    throw NumericalRejection("nth_time_derivative: need at least " + std::to_string(min_len) +
                             " samples for order " + std::to_string(order) + ", got " +
                             std::to_string(n));

  const double h = s.times.dt;
  const double inv_hn = 1.0 / std::pow(h, order);
  const double inv_2hn = 1.0 / std::pow(2.0 * h, order);

  const int lo = 2 * w, hi = n - 1 - 2 * w;  // inclusive interior range
  DerivativeSeries out;
  out.order = order;
  out.first_index = lo;
  out.series.times = TimeSampling{s.times.time(lo), s.times.dt, hi - lo + 1};
  out.series.values.resize(hi - lo + 1);

  double err = 0.0;
  for (int i = lo; i <= hi; ++i) {
    Vec3 fine{}, coarse{};
    for (int k = -w; k <= w; ++k) {
      const double c = stencil[k + w];
      if (c == 0.0) continue;
      fine += s.values[i + k] * c;
      coarse += s.values[i + 2 * k] * c;
    }
    fine *= inv_hn;
    coarse *= inv_2hn;
    // Both stencils are order-2 accurate; one Richardson step cancels the h^2
    // term and the correction magnitude bounds the residual truncation error.
    const Vec3 refined = (fine * 4.0 - coarse) / 3.0;
    err = std::max(err, (fine - coarse).max_abs() / 3.0);
    out.series.values[i - lo] = refined;
  }
  out.error_estimate = err;
  return out;
}

PolynomialFit fit_polynomial_degree(const VecSeries& s, int max_degree, double tol) {
  if (max_degree < 0) throw ConfigError("fit_polynomial_degree: max_degree must be >= 0");
  const int n = int(s.values.size());
  if (n < max_degree + 5)
    throw ConfigError("fit_polynomial_degree: need at least max_degree + 5 samples, got " +
                      std::to_string(n));

  PolynomialFit fit;
  fit.scale = s.max_abs();
  fit.rel_residuals.assign(max_degree + 1, 0.0);
  if (fit.scale == 0.0) {
    // Identically zero series: degree 0 with zero residual.
    fit.certified_degree = 0;
    return fit;
  }

  // Scaled time axis keeps the Vandermonde well conditioned for the low
  // degrees used here.
  const double t_mid = 0.5 * (s.times.time(0) + s.times.time(n - 1));
  const double t_half = 0.5 * s.times.window_length();
  Eigen::MatrixXd vanderm(n, max_degree + 1);
  for (int i = 0; i < n; ++i) {
    const double tau = (s.times.time(i) - t_mid) / t_half;
    double p = 1.0;
    for (int d = 0; d <= max_degree; ++d) {
      vanderm(i, d) = p;
      p *= tau;
    }
  }
  Eigen::MatrixXd rhs(n, 3);
  for (int i = 0; i < n; ++i) {
    rhs(i, 0) = s.values[i].x;
    rhs(i, 1) = s.values[i].y;
    rhs(i, 2) = s.values[i].z;
  }

  for (int d = 0; d <= max_degree; ++d) {
    const auto block = vanderm.leftCols(d + 1);
    const Eigen::MatrixXd coeff = block.colPivHouseholderQr().solve(rhs);
    const Eigen::MatrixXd residual = block * coeff - rhs;
    const double rms = std::sqrt(residual.squaredNorm() / double(3 * n));
    fit.rel_residuals[d] = rms / fit.scale;
    if (fit.certified_degree < 0 && fit.rel_residuals[d] <= tol) fit.certified_degree = d;
  }
  return fit;
}

}  // namespace qrad
