#include "qrad/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "qrad/errors.hpp"

namespace qrad {

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n with the standard Chebyshev-based initial guess;
  // symmetric pairs are filled together so the rule is exactly symmetric.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence: evaluates P_n(x) and P'_n(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    // One clean evaluation at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    pp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

SphereQuadrature SphereQuadrature::make(double radius, int n_theta, int n_phi) {
  if (!(radius > 0.0)) throw ConfigError("SphereQuadrature: radius must be positive");
  if (n_theta < 2 || n_phi < 3)
    throw ConfigError("SphereQuadrature: need n_theta >= 2 and n_phi >= 3");
  SphereQuadrature q;
  q.radius_ = radius;
  q.n_theta_ = n_theta;
  q.n_phi_ = n_phi;
  q.nodes_.reserve(std::size_t(n_theta) * n_phi);
  const GaussLegendreRule gl = gauss_legendre(n_theta);
  const double dphi = 2.0 * M_PI / n_phi;
  for (int it = 0; it < n_theta; ++it) {
    const double ct = gl.nodes[it];  // cos(theta)
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = dphi * (ip + 0.5);
      Node node;
      node.nhat = {st * std::cos(phi), st * std::sin(phi), ct};
      node.weight = gl.weights[it] * dphi * radius * radius;
      q.nodes_.push_back(node);
    }
  }
  return q;
}

double SphereQuadrature::weight_sum() const {
  return pairwise_transform_sum<double>(nodes_.size(),
                                        [&](std::size_t i) { return nodes_[i].weight; });
}

}  // namespace qrad
