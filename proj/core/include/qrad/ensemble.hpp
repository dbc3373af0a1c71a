#pragma once

#include <string>
#include <vector>

#include "qrad/grid.hpp"
#include "qrad/source.hpp"

namespace qrad {

/// One rigid Gaussian charge blob drifting at constant velocity.  The density
/// is weight * q * G_sigma(x - x0 - v t) with G a normalised anisotropic
/// Gaussian, and the current is simply v times the density.
struct NewtonianBlob {
  double weight = 1.0;
  Vec3 x0;
  Vec3 velocity;
  Vec3 sigma_x;
};

/// Classical ensemble of drifting blobs sharing one total charge q.  The
/// motion is inertial, so the projected moments are exact polynomials in time
/// and every member of the family is available in closed form for testing.
class NewtonianEnsemble {
 public:
  /// Validates weights (positive, summing to 1), widths (> 0) and speeds
  /// (strictly below light_speed).
  static NewtonianEnsemble make(std::vector<NewtonianBlob> blobs, double charge,
                                double light_speed);

  const std::vector<NewtonianBlob>& blobs() const { return blobs_; }
  double charge() const { return charge_; }
  double light_speed() const { return light_speed_; }

  /// Sample rho and J on a grid (rejects when the grid drops charge).
  void fields(double t, const UniformGrid3& grid, Field<double>& rho, Field<Vec3>& current) const;

  /// Closed-form projected moment: integral of J (nhat . x)^(m-1) d3x,
  /// evaluated through Gaussian moment recursion.  m >= 1.
  Vec3 analytic_moment(int m, const Vec3& nhat, double t) const;

  /// Conservative 99% charge radius at time t.
  double extent99(double t) const;

 private:
  std::vector<NewtonianBlob> blobs_;
  double charge_ = 1.0;
  double light_speed_ = 1.0;
};

/// Raw moments E[Y^p] for Y ~ N(mu, s^2), p = 0..p_max inclusive.
std::vector<double> gaussian_raw_moments(double mu, double s2, int p_max);

/// CurrentSource adapter for the ensemble.
class NewtonianCurrentSource : public CurrentSource {
 public:
  NewtonianCurrentSource(NewtonianEnsemble ensemble, UniformGrid3 grid)
      : ensemble_(std::move(ensemble)), grid_(grid) {}

  const UniformGrid3& grid() const override { return grid_; }
  void evaluate(double t, Field<double>& rho, Field<Vec3>& current) const override;
  double total_charge() const override { return ensemble_.charge(); }
  double extent99(double t) const override { return ensemble_.extent99(t); }
  double max_angular_frequency() const override;
  double light_speed() const override { return ensemble_.light_speed(); }
  std::string kind() const override { return "newtonian"; }

  const NewtonianEnsemble& ensemble() const { return ensemble_; }

 private:
  NewtonianEnsemble ensemble_;
  UniformGrid3 grid_;
};

}  // namespace qrad
