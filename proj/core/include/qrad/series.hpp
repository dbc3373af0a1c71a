#pragma once

#include <vector>

#include "qrad/geometry.hpp"
#include "qrad/grid.hpp"

namespace qrad {

/// Uniformly sampled vector-valued time series (moment series, far fields...).
struct VecSeries {
  TimeSampling times;
  std::vector<Vec3> values;

  double max_abs() const;
};

/// Scalar companion (power series, pointwise density probes).
struct ScalarSeries {
  TimeSampling times;
  std::vector<double> values;
};

/// Result of the central-difference n-th time derivative.
///
/// The estimate combines the order-2 centred stencil at spacing dt with the
/// same stencil at 2*dt through one Richardson step, giving an order-4
/// truncation error; `error_estimate` is the max-norm Richardson correction
/// |D_h - D_2h| / 3, an a-posteriori bound on the remaining error.  Only
/// interior samples where the wide stencil fits are returned.
struct DerivativeSeries {
  int order = 0;
  VecSeries series;           ///< derivative on the valid interior samples
  int first_index = 0;        ///< index into the input series of series[0]
  double error_estimate = 0;  ///< max-norm step-halving estimate
};

/// n-th time derivative of a uniformly sampled series.
/// Rejects series shorter than order + 4 samples or too short for the
/// Richardson stencil to have any interior point.
DerivativeSeries nth_time_derivative(const VecSeries& s, int order);

/// Least-squares polynomial degree certification.
///
/// Fits degrees 0..max_degree on the scaled time axis tau in [-1, 1] (all
/// three components share a degree) and certifies the smallest degree whose
/// relative RMS residual -- RMS over samples and components, divided by the
/// max-norm of the series -- is <= tol.  `certified_degree` is -1 when no
/// degree qualifies.
struct PolynomialFit {
  int certified_degree = -1;
  std::vector<double> rel_residuals;  ///< indexed by degree 0..max_degree
  double scale = 0.0;                 ///< max-norm of the input series
};

PolynomialFit fit_polynomial_degree(const VecSeries& s, int max_degree, double tol);

}  // namespace qrad
