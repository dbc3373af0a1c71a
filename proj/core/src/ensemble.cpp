#include "qrad/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qrad/errors.hpp"
#include "qrad/reduce.hpp"
#include "qrad/threading.hpp"

namespace qrad {

namespace {
constexpr double capture_tolerance = 1e-8;  ///< charge the grid may drop
}

NewtonianEnsemble NewtonianEnsemble::make(std::vector<NewtonianBlob> blobs, double charge,
                                          double light_speed) {
  if (blobs.empty()) throw ConfigError("NewtonianEnsemble: no blobs");
  if (!(light_speed > 0.0)) throw ConfigError("NewtonianEnsemble: light_speed must be positive");
  double wsum = 0.0;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    if (!(b.weight > 0.0)) throw ConfigError("NewtonianEnsemble: weights must be positive");
    if (!(std::min({b.sigma_x.x, b.sigma_x.y, b.sigma_x.z}) > 0.0))
      throw ConfigError("NewtonianEnsemble: sigma_x must be positive on every axis");
    if (!(b.velocity.norm() < light_speed)) {
      std::ostringstream msg;
      msg << "NewtonianEnsemble: blob " << i << " moves at speed " << b.velocity.norm()
          << " >= light speed " << light_speed;
      throw ConfigError(msg.str());
    }
    wsum += b.weight;
  }
  if (std::fabs(wsum - 1.0) > 1e-12)
    throw ConfigError("NewtonianEnsemble: weights must sum to 1 (got " + std::to_string(wsum) +
                      ")");
  NewtonianEnsemble e;
  e.blobs_ = std::move(blobs);
  e.charge_ = charge;
  e.light_speed_ = light_speed;
  return e;
}

void NewtonianEnsemble::fields(double t, const UniformGrid3& grid, Field<double>& rho,
                               Field<Vec3>& current) const {
  rho = Field<double>::zero(grid);
  current = Field<Vec3>::zero(grid);

  // Separable per-axis Gaussian tables per blob.
  struct BlobTables {
    std::array<std::vector<double>, 3> g;
    Vec3 v;
    double scale;  // weight * charge
  };
  std::vector<BlobTables> tables;
  tables.reserve(blobs_.size());
  for (const auto& b : blobs_) {
    BlobTables tab;
    tab.v = b.velocity;
    tab.scale = b.weight * charge_;
    const Vec3 center = b.x0 + b.velocity * t;
    for (int a = 0; a < 3; ++a) {
      const int n = grid.counts[a];
      const double o = a == 0 ? grid.origin.x : (a == 1 ? grid.origin.y : grid.origin.z);
      const double d = a == 0 ? grid.spacing.x : (a == 1 ? grid.spacing.y : grid.spacing.z);
      const double s = b.sigma_x[a];
      const double norm = 1.0 / (s * std::sqrt(2.0 * M_PI));
      tab.g[a].resize(n);
      for (int i = 0; i < n; ++i) {
        const double u = (o + i * d - center[a]) / s;
        tab.g[a][i] = norm * std::exp(-0.5 * u * u);
      }
    }
    tables.push_back(std::move(tab));
  }

  const int nx = grid.counts[0], ny = grid.counts[1], nz = grid.counts[2];
  parallel_for(std::size_t(nz), [&](std::size_t iz) {
    for (int iy = 0; iy < ny; ++iy) {
      const std::size_t row = (iz * ny + iy) * nx;
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t idx = row + ix;
        double r = 0.0;
        Vec3 j{};
        for (const auto& tab : tables) {
          const double g = tab.scale * tab.g[0][ix] * tab.g[1][iy] * tab.g[2][iz];
          r += g;
          j += tab.v * g;
        }
        rho.values[idx] = r;
        current.values[idx] = j;
      }
    }
  });

  const double captured =
      pairwise_transform_sum<double>(rho.size(), [&](std::size_t i) { return rho.values[i]; }) *
      grid.cell_volume();
  if (std::fabs(captured - charge_) > capture_tolerance * std::fabs(charge_)) {
    std::ostringstream msg;
    msg << "NewtonianEnsemble::fields: grid captures charge " << captured << " of " << charge_
        << " at t = " << t << "; enlarge the box (99% radius " << extent99(t) << ")";
    throw NumericalRejection(msg.str());
  }
}

std::vector<double> gaussian_raw_moments(double mu, double s2, int p_max) {
  std::vector<double> m(std::size_t(p_max) + 1);
  m[0] = 1.0;
  if (p_max >= 1) m[1] = mu;
  for (int p = 2; p <= p_max; ++p) m[p] = mu * m[p - 1] + (p - 1) * s2 * m[p - 2];
  return m;
}

Vec3 NewtonianEnsemble::analytic_moment(int m, const Vec3& nhat, double t) const {
  if (m < 1) throw ConfigError("analytic_moment: order must be >= 1");
  Vec3 out{};
  for (const auto& b : blobs_) {
    const Vec3 center = b.x0 + b.velocity * t;
    const double mu = dot(nhat, center);
    const double s2 = nhat.x * nhat.x * b.sigma_x.x * b.sigma_x.x +
                      nhat.y * nhat.y * b.sigma_x.y * b.sigma_x.y +
                      nhat.z * nhat.z * b.sigma_x.z * b.sigma_x.z;
    const double mom = gaussian_raw_moments(mu, s2, m - 1)[m - 1];
    out += b.velocity * (b.weight * charge_ * mom);
  }
  return out;
}

double NewtonianEnsemble::extent99(double t) const {
  double r = 0.0;
  for (const auto& b : blobs_) {
    const Vec3 center = b.x0 + b.velocity * t;
    const double smax = std::max({b.sigma_x.x, b.sigma_x.y, b.sigma_x.z});
    r = std::max(r, center.norm() + 3.4 * smax);
  }
  return r;
}

void NewtonianCurrentSource::evaluate(double t, Field<double>& rho, Field<Vec3>& current) const {
  ensemble_.fields(t, grid_, rho, current);
}

double NewtonianCurrentSource::max_angular_frequency() const {
  // The only time scale is envelope transit: fastest blob over its narrowest
  // width.
  double f = 0.0;
  for (const auto& b : ensemble_.blobs()) {
    const double smin = std::min({b.sigma_x.x, b.sigma_x.y, b.sigma_x.z});
    f = std::max(f, b.velocity.norm() / smin);
  }
  return f;
}

}  // namespace qrad
