#pragma once

#include <memory>
#include <string>

#include "qrad/grid.hpp"

namespace qrad {

/// A time-dependent charge/current density sampled on a fixed grid: the seam
/// between the concrete dynamics (Schrodinger packets, Klein-Gordon and Dirac
/// superpositions, Newtonian ensembles, synthetic calibration sources) and
/// the moment/radiation/oracle pipelines, which only ever see (rho, J).
class CurrentSource {
 public:
  virtual ~CurrentSource() = default;

  /// Evaluation grid shared by all samples of this source.
  virtual const UniformGrid3& grid() const = 0;

  /// Fill rho and J at time t on grid().  Implementations must be pure
  /// functions of t so that pipelines may evaluate samples in parallel.
  virtual void evaluate(double t, Field<double>& rho, Field<Vec3>& current) const = 0;

  /// Total charge carried by the source (the Coulomb monopole).
  virtual double total_charge() const = 0;

  /// Conservative bound on the radius containing 99% of |rho| at time t,
  /// measured from the coordinate origin.  Feeds the far-field radius
  /// validation (R0 >= 50x this) and the oracle radius ladders.
  virtual double extent99(double t) const = 0;

  /// Fastest angular frequency the source is configured to produce; sampling
  /// validation demands >= 8 samples per period of this.
  virtual double max_angular_frequency() const = 0;

  /// Wave propagation speed of the surrounding field theory.
  virtual double light_speed() const = 0;

  virtual std::string kind() const = 0;
};

/// Convenience: allocate rho/J fields shaped for a source's grid.
struct SourceFields {
  Field<double> rho;
  Field<Vec3> current;

  static SourceFields shaped(const UniformGrid3& g) {
    return {Field<double>::zero(g), Field<Vec3>::zero(g)};
  }
};

}  // namespace qrad
