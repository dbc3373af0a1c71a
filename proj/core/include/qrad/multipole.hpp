#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrad/grid.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/series.hpp"
#include "qrad/source.hpp"
#include "qrad/spectrum.hpp"

namespace qrad {

/// Where the far field is observed: direction, radius and wave speed.
struct ObservationGeometry {
  Vec3 nhat;
  double R0 = 0.0;
  double light_speed = 1.0;

  /// Normalises the direction and validates R0 >= 50 x source_extent (pass
  /// source_extent = 0 to skip when no source is attached).
  static ObservationGeometry make(const Vec3& direction, double R0, double light_speed,
                                  double source_extent);
};

/// Projected current moments I_m(t) = integral J (nhat.x)^(m-1) d3x for
/// m = 1..max_order along one direction.
struct MomentSeries {
  int max_order = 0;
  Vec3 nhat;
  TimeSampling times;
  std::vector<VecSeries> moments;  ///< index m-1
  std::string source_kind;
  double source_extent = 0.0;  ///< max 99% charge radius over the window

  const VecSeries& order(int m) const { return moments.at(std::size_t(m) - 1); }
};

/// Largest supported moment order (compile-time accumulator bound).
inline constexpr int max_moment_order = 8;

/// Single-snapshot moment integral.  Rejects when |J| at the grid boundary
/// exceeds 1e-8 of its peak (the integrand would be truncated).
Vec3 compute_moment(const Field<Vec3>& current, const Vec3& nhat, int m);

/// Moment series for several directions sharing one sweep over the source
/// samples (the field evaluation dominates, so directions are near-free).
std::vector<MomentSeries> moment_series_multi(const CurrentSource& source,
                                              const std::vector<Vec3>& directions, int max_order,
                                              const TimeSampling& times);

MomentSeries moment_series(const CurrentSource& source, const Vec3& nhat, int max_order,
                           const TimeSampling& times);

/// Per-order verdict of the polynomial certification.
struct DegreeCertificate {
  int m = 0;
  PolynomialFit fit;                  ///< expected certified_degree <= m-1
  double derivative_residual = 0.0;   ///< max |d^m I_m / dt^m| / scale
  double derivative_error = 0.0;      ///< FD step-halving estimate / scale
  double scale = 0.0;                 ///< window peak |I_m|
  bool degree_ok = false;
  bool derivative_ok = false;
  bool pass = false;
};

/// Certification along one direction: for every m the series must fit a
/// polynomial of degree <= m-1 and its m-th time derivative must vanish.
struct NonRadiationCertificate {
  Vec3 nhat;
  double tol = 0.0;
  std::vector<DegreeCertificate> orders;
  bool pass = false;
};

NonRadiationCertificate certify_nonradiation(const MomentSeries& series, double tol);

/// Refinement diagnosis: a failure is quadrature-dominated when refining the
/// discretisation moves a failing derivative residual by more than 2x.
bool quadrature_dominated(const NonRadiationCertificate& base,
                          const NonRadiationCertificate& refined);

/// Far field along one direction over the usable (derivative-interior) part
/// of the source window.  Radiative piece only, to leading order in 1/R0:
///
///   B(t0 + R0/c) = -nhat x (1/(c^2 R0)) sum_m d^m I_m/dt^m (1/c)^(m-1)/(m-1)!
///   E = -nhat x B
///
/// term_max records each order's largest contribution to the bracket so
/// truncation error is visible.
struct FarfieldSeries {
  ObservationGeometry geom;
  int max_order = 0;
  TimeSampling t_obs;          ///< source interior times shifted by R0/c
  int first_source_index = 0;  ///< index into the source sampling of t_obs[0]
  std::vector<Vec3> B;
  std::vector<Vec3> E;
  std::vector<double> term_max;  ///< index m-1
};

FarfieldSeries farfield_series(const MomentSeries& series, const ObservationGeometry& geom);

/// E = -nhat x B (exact).
Vec3 farfield_E(const Vec3& B, const Vec3& nhat);

/// Sphere-integrated Poynting flux P = (c/4pi) sum w (E x B).nhat with the
/// quadrature weights carrying the R0^2 area factor.
double radiated_power(const SphereQuadrature& sphere, const std::vector<Vec3>& E,
                      const std::vector<Vec3>& B, double light_speed);

/// (2/3) q^2 |a|^2 / c^3.
double larmor_power(const Vec3& acceleration, double charge, double light_speed);

/// Full radiation pipeline: moments along every sphere direction, far-field
/// assembly, and the flux time series on the sphere of radius R0.
struct RadiationReport {
  double R0 = 0.0;
  int max_order = 0;
  TimeSampling t_obs;
  std::vector<double> power;       ///< P(t_obs) >= 0
  double mean_power = 0.0;
  double max_power = 0.0;
  std::vector<double> term_max;    ///< per order, max over directions
  std::optional<Spectrum> power_spectrum;  ///< present when the window allows
  double source_extent = 0.0;
  int n_theta = 0, n_phi = 0;
};

RadiationReport radiation_report(const CurrentSource& source, double R0, int max_order,
                                 const TimeSampling& times, int n_theta = 12, int n_phi = 24);

}  // namespace qrad
