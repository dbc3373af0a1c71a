#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "qrad/errors.hpp"
#include "qrad/geometry.hpp"

namespace qrad {

/// Axis-aligned uniform Cartesian grid of sample nodes.
///
/// Nodes sit at `origin + (i,j,k) * spacing`; for box-covering grids built via
/// `centered()` the nodes are cell centres, which is what the midpoint
/// quadrature in `quadrature.hpp` assumes.  The linear node index runs
/// x-fastest: `idx = (iz * ny + iy) * nx + ix`.
struct UniformGrid3 {
  Vec3 origin;
  Vec3 spacing;
  std::array<int, 3> counts{};

  /// Default cap on total node count; large enough for 96^3 production grids,
  /// small enough to catch runaway configurations.  Refinement studies may
  /// pass a larger budget explicitly.
  static constexpr std::size_t default_node_budget = std::size_t{1} << 21;

  static UniformGrid3 make(const Vec3& origin, const Vec3& spacing,
                           const std::array<int, 3>& counts,
                           std::size_t node_budget = default_node_budget);

  /// Cell-centred grid covering the box `center +- half_extent`.
  static UniformGrid3 centered(const Vec3& center, const Vec3& half_extent,
                               const std::array<int, 3>& counts,
                               std::size_t node_budget = default_node_budget);

  std::size_t node_count() const {
    return std::size_t(counts[0]) * std::size_t(counts[1]) * std::size_t(counts[2]);
  }
  double cell_volume() const { return spacing.x * spacing.y * spacing.z; }

  std::size_t index(int ix, int iy, int iz) const {
    return (std::size_t(iz) * counts[1] + std::size_t(iy)) * counts[0] + std::size_t(ix);
  }
  std::array<int, 3> decompose(std::size_t idx) const {
    const int ix = int(idx % std::size_t(counts[0]));
    const std::size_t r = idx / std::size_t(counts[0]);
    const int iy = int(r % std::size_t(counts[1]));
    const int iz = int(r / std::size_t(counts[1]));
    return {ix, iy, iz};
  }
  Vec3 position(int ix, int iy, int iz) const {
    return {origin.x + ix * spacing.x, origin.y + iy * spacing.y, origin.z + iz * spacing.z};
  }
  Vec3 position(std::size_t idx) const {
    const auto ijk = decompose(idx);
    return position(ijk[0], ijk[1], ijk[2]);
  }
  bool is_boundary(std::size_t idx) const {
    const auto ijk = decompose(idx);
    return ijk[0] == 0 || ijk[0] == counts[0] - 1 || ijk[1] == 0 || ijk[1] == counts[1] - 1 ||
           ijk[2] == 0 || ijk[2] == counts[2] - 1;
  }
  Vec3 center() const {
    return {origin.x + 0.5 * (counts[0] - 1) * spacing.x,
            origin.y + 0.5 * (counts[1] - 1) * spacing.y,
            origin.z + 0.5 * (counts[2] - 1) * spacing.z};
  }
  /// Half-extent of the covered box (cell-centred convention).
  Vec3 half_extent() const {
    return {0.5 * counts[0] * spacing.x, 0.5 * counts[1] * spacing.y, 0.5 * counts[2] * spacing.z};
  }

  bool same_layout(const UniformGrid3& o, double rtol = 1e-12) const;
};

/// Values of type T sampled on a UniformGrid3.  The payload type doubles as
/// the payload-kind tag: complex scalars for wavefunctions, Vec3 for real
/// current densities, Spinor4 for Dirac states, double for charge densities.
template <class T>
struct Field {
  UniformGrid3 grid;
  std::vector<T> values;

  static Field zero(const UniformGrid3& g) {
    Field f;
    f.grid = g;
    f.values.assign(g.node_count(), T{});
    return f;
  }

  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

/// Index of the first non-finite sample, or npos when the field is clean.
template <class T>
std::size_t first_non_finite(const Field<T>& f) {
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (!is_finite(f.values[i])) return i;
  return std::size_t(-1);
}

template <class T>
void require_finite(const Field<T>& f, const char* what) {
  const std::size_t bad = first_non_finite(f);
  if (bad != std::size_t(-1)) {
    const Vec3 p = f.grid.position(bad);
    throw NumericalRejection(std::string(what) + ": non-finite sample at node " +
                             std::to_string(bad) + " position (" + std::to_string(p.x) + ", " +
                             std::to_string(p.y) + ", " + std::to_string(p.z) + ")");
  }
}

/// Uniform time sampling window for moment series and current histories.
struct TimeSampling {
  double t_start = 0.0;
  double dt = 0.0;
  int n_samples = 0;

  static TimeSampling make(double t_start, double dt, int n_samples);

  double time(int i) const { return t_start + i * dt; }
  double t_end() const { return time(n_samples - 1); }
  double window_length() const { return dt * (n_samples - 1); }
  std::vector<double> times() const {
    std::vector<double> t(n_samples);
    for (int i = 0; i < n_samples; ++i) t[i] = time(i);
    return t;
  }
  /// Samples per period of an angular frequency; the sampling contract asks
  /// for >= 8 on the fastest configured frequency.
  double samples_per_period(double omega) const;
  bool resolves(double omega, double min_samples = 8.0) const;
};

}  // namespace qrad
