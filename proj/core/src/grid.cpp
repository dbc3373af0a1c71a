#include "qrad/grid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qrad {

UniformGrid3 UniformGrid3::make(const Vec3& origin, const Vec3& spacing,
                                const std::array<int, 3>& counts, std::size_t node_budget) {
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0))
    throw ConfigError("UniformGrid3: spacing must be positive on every axis");
  for (int axis = 0; axis < 3; ++axis)
    if (counts[axis] < 2)
      throw ConfigError("UniformGrid3: need at least 2 nodes per axis, axis " +
                        std::to_string(axis) + " has " + std::to_string(counts[axis]));
  if (!is_finite(origin) || !is_finite(spacing))
    throw ConfigError("UniformGrid3: non-finite origin or spacing");
  const std::size_t total =
      std::size_t(counts[0]) * std::size_t(counts[1]) * std::size_t(counts[2]);
  if (total > node_budget) {
    std::ostringstream msg;
    msg << "UniformGrid3: " << counts[0] << "x" << counts[1] << "x" << counts[2] << " = " << total
        << " nodes exceeds the configured budget of " << node_budget;
    throw ConfigError(msg.str());
  }
  UniformGrid3 g;
  g.origin = origin;
  g.spacing = spacing;
  g.counts = counts;
  return g;
}

UniformGrid3 UniformGrid3::centered(const Vec3& center, const Vec3& half_extent,
                                    const std::array<int, 3>& counts, std::size_t node_budget) {
  if (!(half_extent.x > 0.0) || !(half_extent.y > 0.0) || !(half_extent.z > 0.0))
    throw ConfigError("UniformGrid3: half_extent must be positive on every axis");
  const Vec3 spacing{2.0 * half_extent.x / counts[0], 2.0 * half_extent.y / counts[1],
                     2.0 * half_extent.z / counts[2]};
  const Vec3 origin{center.x - half_extent.x + 0.5 * spacing.x,
                    center.y - half_extent.y + 0.5 * spacing.y,
                    center.z - half_extent.z + 0.5 * spacing.z};
  return make(origin, spacing, counts, node_budget);
}

bool UniformGrid3::same_layout(const UniformGrid3& o, double rtol) const {
  if (counts != o.counts) return false;
  auto close = [rtol](double a, double b) {
    return std::fabs(a - b) <= rtol * std::max({std::fabs(a), std::fabs(b), 1.0});
  };
  return close(origin.x, o.origin.x) && close(origin.y, o.origin.y) &&
         close(origin.z, o.origin.z) && close(spacing.x, o.spacing.x) &&
         close(spacing.y, o.spacing.y) && close(spacing.z, o.spacing.z);
}

TimeSampling TimeSampling::make(double t_start, double dt, int n_samples) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t_start))
    throw ConfigError("TimeSampling: dt must be positive and finite");
  if (n_samples < 5)
    throw ConfigError("TimeSampling: need at least 5 samples, got " + std::to_string(n_samples));
  TimeSampling s;
  s.t_start = t_start;
  s.dt = dt;
  s.n_samples = n_samples;
  return s;
}

double TimeSampling::samples_per_period(double omega) const {
  if (omega <= 0.0) return std::numeric_limits<double>::infinity();
  return (2.0 * M_PI / omega) / dt;
}

bool TimeSampling::resolves(double omega, double min_samples) const {
  return samples_per_period(omega) >= min_samples;
}

}  // namespace qrad
