#pragma once

#include <functional>
#include <vector>

#include "qrad/grid.hpp"
#include "qrad/source.hpp"

namespace qrad {

/// Meshless point sampler of (rho, J) at an event.  Implementations must be
/// closed-form or brute-force synthesis evaluations, not grid interpolants, so
/// the finite differences below probe the physics rather than a mesh.
using PointSampler = std::function<void(const Vec3& x, double t, double& rho, Vec3& current)>;

/// Local charge conservation d rho/dt + div J = 0, checked with 4th-order
/// central differences in both space and time at every node of a probe patch.
struct ContinuityReport {
  double max_residual = 0.0;      ///< max |d rho/dt + div J|
  double max_drho_dt = 0.0;       ///< max |d rho/dt| (the comparison scale)
  double relative_residual = 0.0; ///< ratio of the two (0 for an empty scale)
  double tolerance = 0.0;
  bool pass = false;
  Vec3 worst_position{};
  double worst_time = 0.0;
};

ContinuityReport continuity_check(const PointSampler& sample, const UniformGrid3& patch,
                                  const std::vector<double>& times, double space_step,
                                  double time_step, double tolerance = 1e-6);

/// Grid integral of rho tracked over a window; drift is measured against the
/// first sample and compared with `tolerance * scale`.  The scale defaults to
/// |nominal_charge|; pass an explicit positive scale for states whose signed
/// charges cancel (the physical |q| is then the right yardstick).
struct ChargeScanReport {
  std::vector<double> times;
  std::vector<double> charge;
  double nominal_charge = 0.0;
  double scale = 0.0;          ///< denominator actually used for the verdict
  double max_deviation = 0.0;  ///< max_t |Q(t) - Q(t0)|
  double initial_offset = 0.0; ///< |Q(t0) - nominal|, capture quality, informational
  double tolerance = 0.0;
  bool pass = false;
};

ChargeScanReport charge_constancy_scan(const CurrentSource& source, const TimeSampling& times,
                                       double tolerance = 1e-8, double scale = 0.0);

/// Pointwise causal bound |J| <= c |rho| over all nodes and sampled times.
/// `max_excess` is max(|J| - c |rho|) normalised by c * max|rho|; sampling
/// round-off keeps it at machine-epsilon level when the bound holds.
struct CurrentBoundReport {
  double max_excess = 0.0;
  double max_ratio = 0.0;  ///< max |J| / (c |rho|) over supported nodes
  double tolerance = 0.0;
  bool pass = false;
};

CurrentBoundReport current_bound_scan(const CurrentSource& source, const TimeSampling& times,
                                      double tolerance = 1e-12);

/// Support radius may not grow faster than the configured light speed.
struct SpreadingReport {
  std::vector<double> times;
  std::vector<double> extents;
  double max_rate = 0.0;
  double light_speed = 0.0;
  bool pass = false;
};

SpreadingReport subluminal_spreading_check(const CurrentSource& source,
                                           const TimeSampling& times);

}  // namespace qrad
