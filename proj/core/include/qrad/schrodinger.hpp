#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrad/grid.hpp"
#include "qrad/source.hpp"

namespace qrad {

/// One Gaussian momentum-space component of a free packet:
///
///   g(k) = amplitude * prod_a (2 pi sigma_k,a^2)^(-1/4)
///                    * exp(-(k_a - k0_a)^2 / (4 sigma_k,a^2))
///                    * exp(-i k . x_offset)
///
/// so each component is a unit-norm packet centred at x_offset moving with
/// group velocity hbar k_center / m.
struct GaussianComponent {
  cplx amplitude{1.0, 0.0};
  Vec3 k_center;   ///< wavenumber centre (momentum = hbar * k)
  Vec3 sigma_k;    ///< per-axis wavenumber spread, > 0
  Vec3 x_offset;   ///< initial position centre
};

/// Physical parameters shared by the components of a packet set.
struct PacketParams {
  double mass = 1.0;
  double charge = 1.0;
  double hbar = 1.0;
  double light_speed = 1.0;
  double band_delta = 0.2;  ///< band-limit safety margin delta
  double n_sigma = 6.0;     ///< tail multiplier for the effective support
};

/// Verdict of the non-relativistic band-limit check: every component must
/// keep hbar * (|k_center| + n_sigma * max sigma_k) below (1 - delta) m c.
struct BandLimitReport {
  bool pass = false;
  double p_max = 0.0;       ///< largest effective momentum over components
  double p_limit = 0.0;     ///< (1 - delta) * m * c
  double margin = 0.0;      ///< p_limit - p_max
  int worst_component = -1;
  std::string summary() const;
};

BandLimitReport check_band_limit(const std::vector<GaussianComponent>& components,
                                 const PacketParams& params);

/// Uniform classical force F acting on a packet (zero = free evolution).
struct UniformForce {
  Vec3 F;
  bool is_zero() const { return F.x == 0.0 && F.y == 0.0 && F.z == 0.0; }
};

/// Wavefunction and gradient samples on a grid.
struct WaveFields {
  Field<cplx> psi;
  Field<CVec3> grad;
};

/// Pointwise sample.
struct WaveSample {
  cplx psi;
  CVec3 grad;
};

/// Normalised superposition of Gaussian components with closed-form free and
/// uniform-force evolution (no time stepping anywhere: the t-dependence is
/// analytic, gradients included).
class GaussianPacketSet {
 public:
  /// Normalises the amplitudes via analytic pairwise overlaps and enforces
  /// the band limit (throws NumericalRejection with the report on failure).
  static GaussianPacketSet make(std::vector<GaussianComponent> components,
                                const PacketParams& params);

  const std::vector<GaussianComponent>& components() const { return components_; }
  const PacketParams& params() const { return params_; }

  /// Evaluate psi (and optionally grad) on a grid.  Verifies that at least
  /// 1 - 1e-6 of the norm is captured by the grid; otherwise rejects and
  /// suggests a sufficient half-extent in the message.
  WaveFields evaluate(const UniformForce& force, double t, const UniformGrid3& grid,
                      bool with_gradient = true) const;

  /// Closed-form pointwise evaluation (used by density probes and the
  /// fine-grid continuity checks).
  WaveSample evaluate_at(const UniformForce& force, double t, const Vec3& x) const;

  /// Norm captured by a grid (midpoint integral of |psi|^2).
  double grid_norm(const UniformForce& force, double t, const UniformGrid3& grid) const;

  /// Envelope centre of component c at time t (includes drift and force).
  Vec3 component_center(const UniformForce& force, double t, int c) const;
  /// Per-axis envelope width of component c at time t (spreading included).
  Vec3 component_sigma_x(double t, int c) const;

  /// Conservative 99% charge radius at time t (envelope bound).
  double extent99(const UniformForce& force, double t) const;

  /// Largest density beat frequency the set can produce (pairwise energy
  /// differences plus the single-component dispersion bandwidth).
  double max_beat_frequency() const;

  /// Mean momentum <p> at t = 0 (analytic).
  Vec3 mean_momentum() const;

 private:
  std::vector<GaussianComponent> components_;
  PacketParams params_;
};

/// rho = q |psi|^2 and J = (q hbar / m) Im(psi* grad psi), sampled pointwise.
void current_density(const WaveFields& fields, const PacketParams& params, Field<double>& rho,
                     Field<Vec3>& current);

/// Same densities for a single point sample.
void current_density_at(const WaveSample& sample, const PacketParams& params, double& rho,
                        Vec3& current);

/// Statistical mixture of packet sets; members may carry different hbar (and
/// mass/charge), the currents combine linearly with the weights.
class MixedState {
 public:
  struct Member {
    double weight;
    GaussianPacketSet state;
  };

  static MixedState make(std::vector<Member> members);
  const std::vector<Member>& members() const { return members_; }

  void current(const UniformForce& force, double t, const UniformGrid3& grid, Field<double>& rho,
               Field<Vec3>& current_out) const;

 private:
  std::vector<Member> members_;
};

/// Ehrenfest acceleration of a forced packet: analytically F/m.
Vec3 acceleration_expectation(const GaussianPacketSet& state, const UniformForce& force);

/// Independent grid route: (1/m) * integral psi* F psi d3x = F/m times the
/// captured norm; agrees with the analytic route to the quadrature accuracy.
Vec3 acceleration_expectation_grid(const GaussianPacketSet& state, const UniformForce& force,
                                   double t, const UniformGrid3& grid);

/// CurrentSource adapter for a pure packet under an optional uniform force.
class SchrodingerCurrentSource : public CurrentSource {
 public:
  SchrodingerCurrentSource(GaussianPacketSet state, UniformForce force, UniformGrid3 grid)
      : state_(std::move(state)), force_(force), grid_(grid) {}

  const UniformGrid3& grid() const override { return grid_; }
  void evaluate(double t, Field<double>& rho, Field<Vec3>& current) const override;
  double total_charge() const override { return state_.params().charge; }
  double extent99(double t) const override { return state_.extent99(force_, t); }
  double max_angular_frequency() const override;
  double light_speed() const override { return state_.params().light_speed; }
  std::string kind() const override { return force_.is_zero() ? "schrodinger" : "schrodinger_forced"; }

  const GaussianPacketSet& state() const { return state_; }
  const UniformForce& force() const { return force_; }

 private:
  GaussianPacketSet state_;
  UniformForce force_;
  UniformGrid3 grid_;
};

/// CurrentSource adapter for a mixed state (free evolution only).
class MixedCurrentSource : public CurrentSource {
 public:
  MixedCurrentSource(MixedState mix, UniformGrid3 grid) : mix_(std::move(mix)), grid_(grid) {}

  const UniformGrid3& grid() const override { return grid_; }
  void evaluate(double t, Field<double>& rho, Field<Vec3>& current) const override;
  double total_charge() const override;
  double extent99(double t) const override;
  double max_angular_frequency() const override;
  double light_speed() const override;
  std::string kind() const override { return "mixed_state"; }

  const MixedState& mix() const { return mix_; }

 private:
  MixedState mix_;
  UniformGrid3 grid_;
};

}  // namespace qrad
