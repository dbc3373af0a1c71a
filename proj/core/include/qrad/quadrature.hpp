#pragma once

#include <functional>
#include <vector>

#include "qrad/grid.hpp"
#include "qrad/reduce.hpp"

namespace qrad {

/// Midpoint-rule integral of a sampled field: sum(values) * cell_volume,
/// evaluated with the deterministic pairwise reduction.  On cell-centred grids
/// this is spectrally accurate for smooth, grid-decaying integrands (all the
/// packet shapes used here), so quadrature error is dominated by the truncated
/// Gaussian tails rather than by the rule itself.
///
/// Rejects fields containing non-finite samples, reporting the node index.
template <class T>
T integrate_grid(const Field<T>& f) {
  require_finite(f, "integrate_grid");
  T total = pairwise_transform_sum<T>(f.size(), [&](std::size_t i) { return f.values[i]; });
  total *= f.grid.cell_volume();
  return total;
}

/// Weighted variant: integral of values[i] * weight(i).  The weight callback
/// receives the linear node index; position lookups are up to the caller.
template <class T, class W>
T integrate_grid_weighted(const Field<T>& f, W&& weight) {
  require_finite(f, "integrate_grid");
  T total =
      pairwise_transform_sum<T>(f.size(), [&](std::size_t i) { return f.values[i] * weight(i); });
  total *= f.grid.cell_volume();
  return total;
}

/// Same as integrate_grid_weighted but without the finiteness sweep; for hot
/// loops that validated the field once already.
template <class T, class W>
T integrate_grid_weighted_unchecked(const Field<T>& f, W&& weight) {
  T total =
      pairwise_transform_sum<T>(f.size(), [&](std::size_t i) { return f.values[i] * weight(i); });
  total *= f.grid.cell_volume();
  return total;
}

/// Gauss-Legendre nodes and weights on [-1, 1]; exact for polynomials of
/// degree 2n-1.  Computed by Newton iteration on P_n, deterministically.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

/// Product quadrature on a sphere of radius R0: Gauss-Legendre in cos(theta)
/// times a uniform (trapezoidal, hence spectrally accurate for periodic
/// integrands) rule in phi.  Node weights carry the R0^2 area factor, so the
/// weights of any rule sum to the sphere area 4*pi*R0^2 to rounding.
class SphereQuadrature {
 public:
  struct Node {
    Vec3 nhat;      ///< outward unit normal
    double weight;  ///< area weight, includes R0^2
  };

  static SphereQuadrature make(double radius, int n_theta, int n_phi);

  double radius() const { return radius_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Deterministic pairwise sum of weight * f(node).
  template <class F>
  double integrate(F&& f) const {
    return pairwise_transform_sum<double>(nodes_.size(), [&](std::size_t i) {
      return nodes_[i].weight * f(nodes_[i]);
    });
  }

  double weight_sum() const;

 private:
  double radius_ = 0.0;
  int n_theta_ = 0;
  int n_phi_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace qrad
