#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qrad/grid.hpp"
#include "qrad/source.hpp"

namespace qrad {

/// Dense rho/J snapshots on a grid with retarded-time interpolation.  This is
/// the storage behind the brute-force field evaluator; it also accepts
/// synthetic (non-quantum) currents, which is how the dipole calibration
/// history is built.  Binary layout documented in docs/history_format.md.
class CurrentHistory {
 public:
  enum class Interp : std::uint32_t { linear = 1, cubic = 3 };

  /// Sample a source over `times` (cubic interpolation by default: the field
  /// evaluator needs dJ/dt, and a linear interpolant would make it piecewise
  /// constant).
  static CurrentHistory from_source(const CurrentSource& source, const TimeSampling& times,
                                    Interp interp = Interp::cubic);

  /// Build from explicit snapshots (synthetic currents, tests).
  static CurrentHistory from_snapshots(const UniformGrid3& grid, const TimeSampling& times,
                                       const std::vector<Field<double>>& rho,
                                       const std::vector<Field<Vec3>>& current,
                                       double light_speed, Interp interp = Interp::cubic);

  const UniformGrid3& grid() const { return grid_; }
  const TimeSampling& times() const { return times_; }
  double light_speed() const { return light_speed_; }
  Interp interp() const { return interp_; }
  double source_extent() const { return extent_; }

  /// Earliest / latest time the interpolant may be asked for.
  double t_min_valid() const;
  double t_max_valid() const;

  /// Interpolated snapshot of one node, with the interpolant's dJ/dt.
  struct NodeSample {
    double rho;
    Vec3 current;
    Vec3 dcurrent_dt;
  };
  NodeSample at(std::size_t node, double t) const;

  /// Raw stored samples (tests, serialization).
  double stored_rho(std::size_t node, int sample) const;
  Vec3 stored_current(std::size_t node, int sample) const;
  /// Overwrite one stored sample (causality experiments in tests).
  void poke(std::size_t node, int sample, double rho, const Vec3& current);

  /// Whether a node ever carries a numerically relevant source amplitude.
  /// Nodes whose whole history stays below 1e-14 of the global peak are
  /// dropped from retarded sums; their retarded times then never constrain
  /// the stored window.
  bool node_contributes(std::size_t node) const { return contrib_[node] != 0; }

  void save(const std::filesystem::path& path) const;
  static CurrentHistory load(const std::filesystem::path& path);

 private:
  UniformGrid3 grid_;
  TimeSampling times_{0.0, 1.0, 0};
  double light_speed_ = 1.0;
  Interp interp_ = Interp::cubic;
  double extent_ = 0.0;
  /// Snapshot-major, node-major inside: [s][node][rho, Jx, Jy, Jz].
  std::vector<double> data_;
  std::vector<std::uint8_t> contrib_;

  std::size_t offset(std::size_t node, int sample) const {
    return (std::size_t(sample) * grid_.node_count() + node) * 4;
  }
  void require_window(double t) const;
  void rebuild_support();
};

/// Scalar and vector potentials at one observation event by brute-force
/// quadrature with exact per-node retardation:
///
///   phi = sum rho(x', t - R/c) / R dV,   A = (1/c) sum J(x', t - R/c) / R dV.
struct RetardedPotential {
  double phi;
  Vec3 A;
};

RetardedPotential retarded_potential(const CurrentHistory& history, const Vec3& x_obs,
                                     double t_obs);

/// Magnetic field with both the 1/R^2 and the 1/R radiative term, no far-field
/// approximation anywhere:
///
///   B = (1/c) sum n' x [ -J_ret/R^2 - Jdot_ret/(R c) ] dV,  n' = (x - x')/R.
Vec3 exact_farfield_B(const CurrentHistory& history, const Vec3& x_obs, double t_obs);

/// Radius ladder of sphere-integrated radiative flux and |B| statistics.
struct FluxScanRow {
  double R0;
  double t_obs;
  double power;      ///< (c/4pi) integral of |B|^2 - (n.B)^2 over the sphere
  double rms_B;      ///< quadrature rms of |B| over the sphere
};

struct FluxScan {
  std::vector<FluxScanRow> rows;
  double b_decay_exponent = 0.0;  ///< |B| ~ R^-p fit; +inf for an all-zero scan
  double p_decay_exponent = 0.0;  ///< P ~ R^-p fit over rows with P > 0
};

/// When `anchored` is true each radius is observed at t_anchor + R/c (same
/// source retarded epoch for every radius, which keeps the required history
/// window radius-independent); otherwise all radii share t_obs = t_anchor.
FluxScan flux_scan(const CurrentHistory& history, const std::vector<double>& radii,
                   double t_anchor, bool anchored = true, int n_theta = 12, int n_phi = 24);

/// Synthetic oscillating dipole: charge rho = p(t) (z/sigma^2) G_sigma(x) and
/// current J = pdot(t) G_sigma(x) zhat with p(t) = p0 sin(omega t); satisfies
/// continuity exactly and has dipole moment p(t).
CurrentHistory make_dipole_history(const UniformGrid3& grid, const TimeSampling& times, double p0,
                                   double omega, double sigma, double light_speed);

/// Closed-form point-dipole field of the same p(t) (the textbook oracle the
/// synthetic history is validated against):
///   B(x, t) = -(nhat x zhat) [ pdot(t - r/c)/r^2 + pddot(t - r/c)/(r c) ] / c.
Vec3 point_dipole_B(const Vec3& x_obs, double t_obs, double p0, double omega,
                    double light_speed);

}  // namespace qrad
