#include "qrad/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qrad/errors.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/reduce.hpp"
#include "qrad/threading.hpp"

namespace qrad {

namespace {

constexpr double escape_tolerance = 1e-6;  ///< captured-norm deficit budget

double max_component(const Vec3& v) { return std::max({v.x, v.y, v.z}); }
double min_component(const Vec3& v) { return std::min({v.x, v.y, v.z}); }

/// 1-D momentum-space overlap of two Gaussian components (axis slice):
/// integral of conj(g1) g2 over k, in closed form.  b is complex because the
/// position offsets enter as linear phases.
cplx overlap_1d(double s1, double k1, double x1, double s2, double k2, double x2) {
  const double a = 1.0 / (4.0 * s1 * s1) + 1.0 / (4.0 * s2 * s2);
  const cplx b = cplx(k1 / (4.0 * s1 * s1) + k2 / (4.0 * s2 * s2), 0.5 * (x1 - x2));
  const double c0 = k1 * k1 / (4.0 * s1 * s1) + k2 * k2 / (4.0 * s2 * s2);
  const double norm = std::pow(2.0 * M_PI * s1 * s1, -0.25) * std::pow(2.0 * M_PI * s2 * s2, -0.25);
  return norm * std::sqrt(M_PI / a) * std::exp(b * b / a - c0);
}

/// Full 3-D overlap <g_c1 | g_c2>, amplitudes excluded.
cplx overlap_3d(const GaussianComponent& c1, const GaussianComponent& c2) {
  cplx o{1.0, 0.0};
  for (int a = 0; a < 3; ++a)
    o *= overlap_1d(c1.sigma_k[a], c1.k_center[a], c1.x_offset[a], c2.sigma_k[a], c2.k_center[a],
                    c2.x_offset[a]);
  return o;
}

/// First-moment variant: <g_c1 | k_axis | g_c2> / <g_c1 | g_c2> = b/a of the
/// product Gaussian on that axis.
cplx overlap_k_mean_1d(double s1, double k1, double x1, double s2, double k2, double x2) {
  const double a = 1.0 / (4.0 * s1 * s1) + 1.0 / (4.0 * s2 * s2);
  const cplx b = cplx(k1 / (4.0 * s1 * s1) + k2 / (4.0 * s2 * s2), 0.5 * (x1 - x2));
  return b / a;
}

}  // namespace

std::string BandLimitReport::summary() const {
  std::ostringstream os;
  os << (pass ? "band limit ok" : "band limit violated") << ": max effective momentum " << p_max
     << " vs limit " << p_limit << " (margin " << margin << ", worst component "
     << worst_component << ")";
  return os.str();
}

BandLimitReport check_band_limit(const std::vector<GaussianComponent>& components,
                                 const PacketParams& params) {
  BandLimitReport report;
  report.p_limit = (1.0 - params.band_delta) * params.mass * params.light_speed;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& comp = components[c];
    const double p = params.hbar *
                     (comp.k_center.norm() + params.n_sigma * max_component(comp.sigma_k));
    if (p > report.p_max) {
      report.p_max = p;
      report.worst_component = int(c);
    }
  }
  report.margin = report.p_limit - report.p_max;
  report.pass = report.p_max < report.p_limit;
  return report;
}

GaussianPacketSet GaussianPacketSet::make(std::vector<GaussianComponent> components,
                                          const PacketParams& params) {
  if (components.empty()) throw ConfigError("GaussianPacketSet: no components");
  if (!(params.mass > 0.0) || !(params.hbar > 0.0) || !(params.light_speed > 0.0))
    throw ConfigError("GaussianPacketSet: mass, hbar and light speed must be positive");
  if (!(params.band_delta > 0.0) || !(params.band_delta < 1.0))
    throw ConfigError("GaussianPacketSet: band_delta must lie in (0, 1)");
  for (const auto& c : components) {
    if (!(min_component(c.sigma_k) > 0.0))
      throw ConfigError("GaussianPacketSet: sigma_k must be positive on every axis");
    if (!is_finite(c.k_center) || !is_finite(c.x_offset) || !is_finite(c.amplitude))
      throw ConfigError("GaussianPacketSet: non-finite component parameters");
  }

  const BandLimitReport band = check_band_limit(components, params);
  if (!band.pass) throw NumericalRejection("GaussianPacketSet: " + band.summary());

  // Normalise through the analytic Gram matrix of the components.
  cplx norm2{0.0, 0.0};
  for (const auto& ci : components)
    for (const auto& cj : components)
      norm2 += std::conj(ci.amplitude) * cj.amplitude * overlap_3d(ci, cj);
  const double n2 = norm2.real();
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw ConfigError("GaussianPacketSet: degenerate superposition, cannot normalise");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& c : components) c.amplitude *= inv;

  GaussianPacketSet set;
  set.components_ = std::move(components);
  set.params_ = params;
  return set;
}

Vec3 GaussianPacketSet::component_center(const UniformForce& force, double t, int c) const {
  const auto& comp = components_[c];
  const double hm = params_.hbar / params_.mass;
  const Vec3 drift = comp.k_center * (hm * t);
  const Vec3 push = force.F * (t * t / (2.0 * params_.mass));
  return comp.x_offset + drift + push;
}

Vec3 GaussianPacketSet::component_sigma_x(double t, int c) const {
  const auto& comp = components_[c];
  const double hm = params_.hbar / params_.mass;
  Vec3 s;
  const double sx = comp.sigma_k.x, sy = comp.sigma_k.y, sz = comp.sigma_k.z;
  s.x = std::sqrt(1.0 / (4.0 * sx * sx) + sx * sx * hm * hm * t * t);
  s.y = std::sqrt(1.0 / (4.0 * sy * sy) + sy * sy * hm * hm * t * t);
  s.z = std::sqrt(1.0 / (4.0 * sz * sz) + sz * sz * hm * hm * t * t);
  return s;
}

double GaussianPacketSet::extent99(const UniformForce& force, double t) const {
  // Envelope bound: worst component centre distance plus 3.4 sigma (the 99%
  // radial quantile of an isotropic 3-D Gaussian is 3.37 sigma).
  double r = 0.0;
  for (int c = 0; c < int(components_.size()); ++c) {
    const Vec3 center = component_center(force, t, c);
    const Vec3 sig = component_sigma_x(t, c);
    r = std::max(r, center.norm() + 3.4 * max_component(sig));
  }
  return r;
}

double GaussianPacketSet::max_beat_frequency() const {
  const double hm = params_.hbar / (2.0 * params_.mass);
  double w_hi = 0.0, w_lo = std::numeric_limits<double>::infinity();
  for (const auto& comp : components_) {
    const double k0 = comp.k_center.norm();
    const double tail = params_.n_sigma * max_component(comp.sigma_k);
    const double k_hi = k0 + tail;
    const double k_lo = std::max(k0 - tail, 0.0);
    w_hi = std::max(w_hi, hm * k_hi * k_hi);
    w_lo = std::min(w_lo, hm * k_lo * k_lo);
  }
  return w_hi - w_lo;
}

Vec3 GaussianPacketSet::mean_momentum() const {
  cplx acc[3] = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  for (const auto& ci : components_)
    for (const auto& cj : components_) {
      const cplx base = std::conj(ci.amplitude) * cj.amplitude * overlap_3d(ci, cj);
      for (int a = 0; a < 3; ++a)
        acc[a] += base * overlap_k_mean_1d(ci.sigma_k[a], ci.k_center[a], ci.x_offset[a],
                                           cj.sigma_k[a], cj.k_center[a], cj.x_offset[a]);
    }
  return Vec3{acc[0].real(), acc[1].real(), acc[2].real()} * params_.hbar;
}

namespace {

/// Per-component, per-axis lookup tables so the grid sweep is a handful of
/// complex multiplies per node instead of transcendental calls.
struct AxisTables {
  std::vector<cplx> value;  ///< envelope * phase factor along the axis
  std::vector<cplx> dlog;   ///< d/dx log of the component along the axis
};

struct ComponentTables {
  cplx scalar;  ///< amplitude * prefactors * global phases
  AxisTables axis[3];
};

ComponentTables build_tables(const GaussianComponent& comp, const PacketParams& par,
                             const UniformForce& force, double t,
                             const std::array<std::vector<double>, 3>& axis_coords) {
  ComponentTables tab;
  const double hbar = par.hbar, m = par.mass;
  const Vec3 shift = force.F * (t * t / (2.0 * m));

  cplx scalar = comp.amplitude;
  const double k0sq = comp.k_center.norm2();
  // Global dynamical phases: free dispersion plus the uniform-force phase
  // -|F|^2 t^3 / (6 m hbar) of the exact translated solution.
  scalar *= std::polar(1.0, -hbar * k0sq * t / (2.0 * m));
  if (!force.is_zero()) scalar *= std::polar(1.0, -force.F.norm2() * t * t * t / (6.0 * m * hbar));

  for (int a = 0; a < 3; ++a) {
    const double sig = comp.sigma_k[a];
    const cplx alpha(1.0 / (4.0 * sig * sig), hbar * t / (2.0 * m));
    const cplx pref = std::sqrt(M_PI / alpha) / std::sqrt(2.0 * M_PI) *
                      std::pow(2.0 * M_PI * sig * sig, -0.25);
    scalar *= pref;
    const double k0 = comp.k_center[a];
    const double x0 = comp.x_offset[a];
    const double center = x0 + hbar * k0 * t / m + shift[a];
    const double fphase = force.F[a] * t / hbar;  // momentum kick F t
    const auto& xs = axis_coords[a];
    auto& at = tab.axis[a];
    at.value.resize(xs.size());
    at.dlog.resize(xs.size());
    const cplx inv4a = 0.25 / alpha;
    const cplx inv2a = 0.5 / alpha;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double u = x - center;
      // envelope exp(-u^2/(4 alpha)), carrier exp(i k0 (x - shift - x0)),
      // force phase exp(i F_a x t / hbar); all functions of this axis alone.
      const cplx expo = -u * u * inv4a + cplx(0.0, k0 * (x - shift[a] - x0) + fphase * x);
      at.value[i] = std::exp(expo);
      at.dlog[i] = cplx(0.0, k0 + fphase) - u * inv2a;
    }
  }
  tab.scalar = scalar;
  return tab;
}

std::array<std::vector<double>, 3> grid_axis_coords(const UniformGrid3& grid) {
  std::array<std::vector<double>, 3> coords;
  for (int a = 0; a < 3; ++a) {
    coords[a].resize(grid.counts[a]);
    const double o = a == 0 ? grid.origin.x : (a == 1 ? grid.origin.y : grid.origin.z);
    const double d = a == 0 ? grid.spacing.x : (a == 1 ? grid.spacing.y : grid.spacing.z);
    for (int i = 0; i < grid.counts[a]; ++i) coords[a][i] = o + i * d;
  }
  return coords;
}

}  // namespace

WaveFields GaussianPacketSet::evaluate(const UniformForce& force, double t,
                                       const UniformGrid3& grid, bool with_gradient) const {
  WaveFields out;
  out.psi = Field<cplx>::zero(grid);
  if (with_gradient) out.grad = Field<CVec3>::zero(grid);

  const auto coords = grid_axis_coords(grid);
  std::vector<ComponentTables> tables;
  tables.reserve(components_.size());
  for (const auto& comp : components_)
    tables.push_back(build_tables(comp, params_, force, t, coords));

  const int nx = grid.counts[0], ny = grid.counts[1], nz = grid.counts[2];
  parallel_for(std::size_t(nz), [&](std::size_t iz) {
    for (int iy = 0; iy < ny; ++iy) {
      const std::size_t row = (iz * ny + iy) * nx;
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t idx = row + ix;
        cplx psi{0.0, 0.0};
        CVec3 grad{cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0}};
        for (const auto& tab : tables) {
          const cplx pc = tab.scalar * tab.axis[0].value[ix] * tab.axis[1].value[iy] *
                          tab.axis[2].value[iz];
          psi += pc;
          if (with_gradient) {
            grad[0] += pc * tab.axis[0].dlog[ix];
            grad[1] += pc * tab.axis[1].dlog[iy];
            grad[2] += pc * tab.axis[2].dlog[iz];
          }
        }
        out.psi.values[idx] = psi;
        if (with_gradient) out.grad.values[idx] = grad;
      }
    }
  });

  // Grid-escape guard: if the captured norm falls short the moments computed
  // downstream are silently wrong, so reject loudly with a usable suggestion.
  const double captured =
      pairwise_transform_sum<double>(out.psi.size(),
                                     [&](std::size_t i) { return std::norm(out.psi.values[i]); }) *
      grid.cell_volume();
  if (std::fabs(captured - 1.0) > escape_tolerance) {
    double suggest = 0.0;
    const Vec3 gc = grid.center();
    for (int c = 0; c < int(components_.size()); ++c) {
      const Vec3 center = component_center(force, t, c);
      const Vec3 sig = component_sigma_x(t, c);
      suggest = std::max(suggest, (center - gc).max_abs() + 6.5 * max_component(sig));
    }
    std::ostringstream msg;
    msg << "GaussianPacketSet::evaluate: grid captures only " << captured
        << " of the norm at t = " << t << " (deficit above " << escape_tolerance
        << "); suggest half-extent >= " << suggest << " about the grid centre";
    throw NumericalRejection(msg.str());
  }
  return out;
}

WaveSample GaussianPacketSet::evaluate_at(const UniformForce& force, double t,
                                          const Vec3& x) const {
  const std::array<std::vector<double>, 3> coords{std::vector<double>{x.x},
                                                  std::vector<double>{x.y},
                                                  std::vector<double>{x.z}};
  WaveSample s{cplx{0.0, 0.0}, {cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0}}};
  for (const auto& comp : components_) {
    const ComponentTables tab = build_tables(comp, params_, force, t, coords);
    const cplx pc = tab.scalar * tab.axis[0].value[0] * tab.axis[1].value[0] * tab.axis[2].value[0];
    s.psi += pc;
    s.grad[0] += pc * tab.axis[0].dlog[0];
    s.grad[1] += pc * tab.axis[1].dlog[0];
    s.grad[2] += pc * tab.axis[2].dlog[0];
  }
  return s;
}

double GaussianPacketSet::grid_norm(const UniformForce& force, double t,
                                    const UniformGrid3& grid) const {
  const WaveFields f = evaluate(force, t, grid, /*with_gradient=*/false);
  return pairwise_transform_sum<double>(f.psi.size(),
                                        [&](std::size_t i) { return std::norm(f.psi.values[i]); }) *
         grid.cell_volume();
}

void current_density(const WaveFields& fields, const PacketParams& params, Field<double>& rho,
                     Field<Vec3>& current) {
  const std::size_t n = fields.psi.size();
  if (fields.grad.size() != n)
    throw ConfigError("current_density: need gradient samples alongside psi");
  rho.grid = fields.psi.grid;
  current.grid = fields.psi.grid;
  rho.values.resize(n);
  current.values.resize(n);
  const double q = params.charge;
  const double jfac = params.charge * params.hbar / params.mass;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx p = fields.psi.values[i];
    const CVec3& g = fields.grad.values[i];
    rho.values[i] = q * std::norm(p);
    const cplx pc = std::conj(p);
    current.values[i] = Vec3{(pc * g[0]).imag(), (pc * g[1]).imag(), (pc * g[2]).imag()} * jfac;
  }
}

void current_density_at(const WaveSample& sample, const PacketParams& params, double& rho,
                        Vec3& current) {
  const double jfac = params.charge * params.hbar / params.mass;
  rho = params.charge * std::norm(sample.psi);
  const cplx pc = std::conj(sample.psi);
  current = Vec3{(pc * sample.grad[0]).imag(), (pc * sample.grad[1]).imag(),
                 (pc * sample.grad[2]).imag()} *
            jfac;
}

MixedState MixedState::make(std::vector<Member> members) {
  if (members.empty()) throw ConfigError("MixedState: no members");
  double wsum = 0.0;
  for (const auto& m : members) {
    if (!(m.weight > 0.0)) throw ConfigError("MixedState: weights must be positive");
    wsum += m.weight;
  }
  if (std::fabs(wsum - 1.0) > 1e-12)
    throw ConfigError("MixedState: weights must sum to 1 (got " + std::to_string(wsum) + ")");
  MixedState mix;
  mix.members_ = std::move(members);
  return mix;
}

void MixedState::current(const UniformForce& force, double t, const UniformGrid3& grid,
                         Field<double>& rho, Field<Vec3>& current_out) const {
  rho = Field<double>::zero(grid);
  current_out = Field<Vec3>::zero(grid);
  Field<double> rho_m;
  Field<Vec3> cur_m;
  for (const auto& member : members_) {
    const WaveFields f = member.state.evaluate(force, t, grid);
    current_density(f, member.state.params(), rho_m, cur_m);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      rho.values[i] += member.weight * rho_m.values[i];
      current_out.values[i] += cur_m.values[i] * member.weight;
    }
  }
}

Vec3 acceleration_expectation(const GaussianPacketSet& state, const UniformForce& force) {
  return force.F / state.params().mass;
}

Vec3 acceleration_expectation_grid(const GaussianPacketSet& state, const UniformForce& force,
                                   double t, const UniformGrid3& grid) {
  // <a> = (1/m) <F> with F uniform: F/m times the captured norm, evaluated by
  // grid quadrature so disagreement flags a broken grid or quadrature.
  const double captured = state.grid_norm(force, t, grid);
  return force.F * (captured / state.params().mass);
}

void SchrodingerCurrentSource::evaluate(double t, Field<double>& rho, Field<Vec3>& current) const {
  const WaveFields f = state_.evaluate(force_, t, grid_);
  current_density(f, state_.params(), rho, current);
}

double SchrodingerCurrentSource::max_angular_frequency() const {
  double freq = state_.max_beat_frequency();
  // Envelope transit rate: fastest component velocity over narrowest width.
  double vmax = 0.0, smin = std::numeric_limits<double>::infinity();
  const auto& par = state_.params();
  for (int c = 0; c < int(state_.components().size()); ++c) {
    const auto& comp = state_.components()[c];
    vmax = std::max(vmax, par.hbar *
                              (comp.k_center.norm() +
                               par.n_sigma * std::max({comp.sigma_k.x, comp.sigma_k.y,
                                                       comp.sigma_k.z})) /
                              par.mass);
    const Vec3 s0 = state_.component_sigma_x(0.0, c);
    smin = std::min(smin, std::min({s0.x, s0.y, s0.z}));
  }
  return std::max(freq, vmax / smin);
}

void MixedCurrentSource::evaluate(double t, Field<double>& rho, Field<Vec3>& current) const {
  mix_.current(UniformForce{}, t, grid_, rho, current);
}

double MixedCurrentSource::total_charge() const {
  double q = 0.0;
  for (const auto& m : mix_.members()) q += m.weight * m.state.params().charge;
  return q;
}

double MixedCurrentSource::extent99(double t) const {
  double r = 0.0;
  for (const auto& m : mix_.members()) r = std::max(r, m.state.extent99(UniformForce{}, t));
  return r;
}

double MixedCurrentSource::max_angular_frequency() const {
  double f = 0.0;
  for (const auto& m : mix_.members()) {
    SchrodingerCurrentSource tmp(m.state, UniformForce{}, grid_);
    f = std::max(f, tmp.max_angular_frequency());
  }
  return f;
}

double MixedCurrentSource::light_speed() const {
  return mix_.members().front().state.params().light_speed;
}

}  // namespace qrad
