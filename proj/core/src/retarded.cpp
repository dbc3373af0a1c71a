#include "qrad/retarded.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "qrad/errors.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/reduce.hpp"
#include "qrad/threading.hpp"

namespace qrad {

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'A', 'D', 'H', 'I', 'S', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kEndianTag = 0x01020304u;
constexpr std::uint32_t kPayloadPerNode = 4;  // rho, Jx, Jy, Jz
constexpr double kSupportRel = 1e-8;

/// Largest |x| over nodes whose stored |rho| or |J| exceeds kSupportRel of the
/// history-wide peak; falls back to the grid half-extent for an empty history.
double measure_extent(const UniformGrid3& grid, const std::vector<double>& data) {
  double peak = 0.0;
  for (double v : data) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return grid.half_extent().max_abs();
  const double cut = kSupportRel * peak;
  const std::size_t n = grid.node_count();
  const std::size_t snapshots = data.size() / (4 * n);
  double extent = 0.0;
  for (std::size_t s = 0; s < snapshots; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* rec = data.data() + (s * n + i) * 4;
      const double mag = std::max({std::abs(rec[0]), std::abs(rec[1]), std::abs(rec[2]),
                                   std::abs(rec[3])});
      if (mag > cut) extent = std::max(extent, grid.position(i).norm());
    }
  }
  return extent > 0.0 ? extent : grid.half_extent().max_abs();
}

struct CubicWeights {
  int base;                     // index of the tau=0 sample
  std::array<double, 4> w;      // value weights for samples base-1 .. base+2
  std::array<double, 4> dw;     // d/dt weights (already divided by dt)
};

struct LinearWeights {
  int base;
  double w0, w1;
  double dw;  // (f1 - f0) * dw is df/dt
};

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw ConfigError("history load: truncated file");
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  write_bytes(out, &v, sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  read_bytes(in, &v, sizeof(T));
  return v;
}

}  // namespace

CurrentHistory CurrentHistory::from_source(const CurrentSource& source, const TimeSampling& times,
                                           Interp interp) {
  CurrentHistory h;
  h.grid_ = source.grid();
  h.times_ = times;
  h.light_speed_ = source.light_speed();
  h.interp_ = interp;
  const std::size_t n = h.grid_.node_count();
  h.data_.assign(std::size_t(times.n_samples) * n * 4, 0.0);
  Field<double> rho = Field<double>::zero(h.grid_);
  Field<Vec3> current = Field<Vec3>::zero(h.grid_);
  for (int s = 0; s < times.n_samples; ++s) {
    source.evaluate(times.time(s), rho, current);
    require_finite(rho, "history rho");
    require_finite(current, "history current");
    double* rec = h.data_.data() + std::size_t(s) * n * 4;
    for (std::size_t i = 0; i < n; ++i) {
      rec[i * 4 + 0] = rho[i];
      rec[i * 4 + 1] = current[i].x;
      rec[i * 4 + 2] = current[i].y;
      rec[i * 4 + 3] = current[i].z;
    }
  }
  h.extent_ = measure_extent(h.grid_, h.data_);
  h.rebuild_support();
  return h;
}

CurrentHistory CurrentHistory::from_snapshots(const UniformGrid3& grid, const TimeSampling& times,
                                              const std::vector<Field<double>>& rho,
                                              const std::vector<Field<Vec3>>& current,
                                              double light_speed, Interp interp) {
  if (int(rho.size()) != times.n_samples || int(current.size()) != times.n_samples)
    throw ConfigError("history: snapshot count does not match the time sampling");
  if (!(light_speed > 0.0)) throw ConfigError("history: light_speed must be positive");
  CurrentHistory h;
  h.grid_ = grid;
  h.times_ = times;
  h.light_speed_ = light_speed;
  h.interp_ = interp;
  const std::size_t n = grid.node_count();
  h.data_.assign(std::size_t(times.n_samples) * n * 4, 0.0);
  for (int s = 0; s < times.n_samples; ++s) {
    if (!rho[std::size_t(s)].grid.same_layout(grid) ||
        !current[std::size_t(s)].grid.same_layout(grid))
      throw ConfigError("history: snapshot grid mismatch");
    require_finite(rho[std::size_t(s)], "history rho");
    require_finite(current[std::size_t(s)], "history current");
    double* rec = h.data_.data() + std::size_t(s) * n * 4;
    for (std::size_t i = 0; i < n; ++i) {
      rec[i * 4 + 0] = rho[std::size_t(s)][i];
      rec[i * 4 + 1] = current[std::size_t(s)][i].x;
      rec[i * 4 + 2] = current[std::size_t(s)][i].y;
      rec[i * 4 + 3] = current[std::size_t(s)][i].z;
    }
  }
  h.extent_ = measure_extent(h.grid_, h.data_);
  h.rebuild_support();
  return h;
}

void CurrentHistory::rebuild_support() {
  const std::size_t n = grid_.node_count();
  contrib_.assign(n, 0);
  std::vector<double> node_peak(n, 0.0);
  double global_peak = 0.0;
  for (int s = 0; s < times_.n_samples; ++s) {
    const double* rec = data_.data() + std::size_t(s) * n * 4;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::max(std::abs(rec[i * 4 + 0]) * light_speed_,
                                std::max(std::abs(rec[i * 4 + 1]),
                                         std::max(std::abs(rec[i * 4 + 2]),
                                                  std::abs(rec[i * 4 + 3]))));
      node_peak[i] = std::max(node_peak[i], a);
      global_peak = std::max(global_peak, a);
    }
  }
  const double cut = 1e-14 * global_peak;
  for (std::size_t i = 0; i < n; ++i) contrib_[i] = node_peak[i] > cut ? 1 : 0;
}

double CurrentHistory::t_min_valid() const {
  return interp_ == Interp::cubic ? times_.t_start + times_.dt : times_.t_start;
}

double CurrentHistory::t_max_valid() const {
  return interp_ == Interp::cubic ? times_.t_end() - 2.0 * times_.dt : times_.t_end();
}

void CurrentHistory::require_window(double t) const {
  const double slack = 1e-9 * times_.dt;
  if (t < t_min_valid() - slack || t > t_max_valid() + slack) {
    std::ostringstream msg;
    msg << "retarded time " << t << " is outside the interpolable window [" << t_min_valid()
        << ", " << t_max_valid() << "]; extend the recorded history to cover it";
    throw NumericalRejection(msg.str());
  }
}

CurrentHistory::NodeSample CurrentHistory::at(std::size_t node, double t) const {
  require_window(t);
  const std::size_t n = grid_.node_count();
  const double s = (t - times_.t_start) / times_.dt;
  NodeSample out{};
  if (interp_ == Interp::linear) {
    int j = std::clamp(int(std::floor(s)), 0, times_.n_samples - 2);
    const double u = s - j;
    const double* f0 = data_.data() + (std::size_t(j) * n + node) * 4;
    const double* f1 = f0 + n * 4;
    const double inv_dt = 1.0 / times_.dt;
    out.rho = (1.0 - u) * f0[0] + u * f1[0];
    out.current = Vec3{(1.0 - u) * f0[1] + u * f1[1], (1.0 - u) * f0[2] + u * f1[2],
                       (1.0 - u) * f0[3] + u * f1[3]};
    out.dcurrent_dt =
        Vec3{(f1[1] - f0[1]) * inv_dt, (f1[2] - f0[2]) * inv_dt, (f1[3] - f0[3]) * inv_dt};
    return out;
  }
  // Cubic Lagrange through the four samples bracketing t.
  int j = std::clamp(int(std::floor(s)), 1, times_.n_samples - 3);
  const double u = s - j;
  const std::array<double, 4> w = {
      -u * (u - 1.0) * (u - 2.0) / 6.0,
      (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
      -(u + 1.0) * u * (u - 2.0) / 2.0,
      (u + 1.0) * u * (u - 1.0) / 6.0,
  };
  const double inv_dt = 1.0 / times_.dt;
  const std::array<double, 4> dw = {
      -(3.0 * u * u - 6.0 * u + 2.0) / 6.0 * inv_dt,
      (3.0 * u * u - 4.0 * u - 1.0) / 2.0 * inv_dt,
      -(3.0 * u * u - 2.0 * u - 2.0) / 2.0 * inv_dt,
      (3.0 * u * u - 1.0) / 6.0 * inv_dt,
  };
  for (int k = 0; k < 4; ++k) {
    const double* f = data_.data() + (std::size_t(j - 1 + k) * n + node) * 4;
    out.rho += w[std::size_t(k)] * f[0];
    out.current += Vec3{f[1], f[2], f[3]} * w[std::size_t(k)];
    out.dcurrent_dt += Vec3{f[1], f[2], f[3]} * dw[std::size_t(k)];
  }
  return out;
}

double CurrentHistory::stored_rho(std::size_t node, int sample) const {
  return data_[offset(node, sample)];
}

Vec3 CurrentHistory::stored_current(std::size_t node, int sample) const {
  const double* rec = data_.data() + offset(node, sample);
  return Vec3{rec[1], rec[2], rec[3]};
}

void CurrentHistory::poke(std::size_t node, int sample, double rho, const Vec3& current) {
  double* rec = data_.data() + offset(node, sample);
  rec[0] = rho;
  rec[1] = current.x;
  rec[2] = current.y;
  rec[3] = current.z;
  rebuild_support();
}

void CurrentHistory::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("history save: cannot open " + path.string());
  write_bytes(out, kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, kEndianTag);
  const Vec3 origin = grid_.origin;
  const Vec3 spacing = grid_.spacing;
  for (double v : {origin.x, origin.y, origin.z}) write_pod(out, v);
  for (double v : {spacing.x, spacing.y, spacing.z}) write_pod(out, v);
  for (int c : grid_.counts) write_pod(out, std::uint32_t(c));
  write_pod(out, times_.t_start);
  write_pod(out, times_.dt);
  write_pod(out, std::uint32_t(times_.n_samples));
  write_pod(out, kPayloadPerNode);
  write_pod(out, std::uint32_t(interp_));
  write_pod(out, light_speed_);
  write_bytes(out, data_.data(), data_.size() * sizeof(double));
  if (!out) throw ConfigError("history save: write failed for " + path.string());
}

CurrentHistory CurrentHistory::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("history load: cannot open " + path.string());
  char magic[8];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ConfigError("history load: bad magic in " + path.string());
  if (read_pod<std::uint32_t>(in) != kFormatVersion)
    throw ConfigError("history load: unsupported format version");
  if (read_pod<std::uint32_t>(in) != kEndianTag)
    throw ConfigError("history load: endianness mismatch");
  Vec3 origin{read_pod<double>(in), read_pod<double>(in), read_pod<double>(in)};
  Vec3 spacing{read_pod<double>(in), read_pod<double>(in), read_pod<double>(in)};
  const int nx = int(read_pod<std::uint32_t>(in));
  const int ny = int(read_pod<std::uint32_t>(in));
  const int nz = int(read_pod<std::uint32_t>(in));
  const double t_start = read_pod<double>(in);
  const double dt = read_pod<double>(in);
  const int n_samples = int(read_pod<std::uint32_t>(in));
  if (read_pod<std::uint32_t>(in) != kPayloadPerNode)
    throw ConfigError("history load: unexpected per-node payload");
  const auto interp = Interp(read_pod<std::uint32_t>(in));
  if (interp != Interp::linear && interp != Interp::cubic)
    throw ConfigError("history load: unknown interpolation tag");
  CurrentHistory h;
  h.grid_ = UniformGrid3::make(origin, spacing, {nx, ny, nz});
  h.times_ = TimeSampling::make(t_start, dt, n_samples);
  h.light_speed_ = read_pod<double>(in);
  if (!(h.light_speed_ > 0.0)) throw ConfigError("history load: non-positive light speed");
  h.interp_ = interp;
  h.data_.resize(std::size_t(n_samples) * h.grid_.node_count() * 4);
  read_bytes(in, h.data_.data(), h.data_.size() * sizeof(double));
  h.extent_ = measure_extent(h.grid_, h.data_);
  h.rebuild_support();
  return h;
}

namespace {

struct PotentialAcc {
  double phi = 0.0;
  Vec3 A{};
  PotentialAcc& operator+=(const PotentialAcc& o) {
    phi += o.phi;
    A += o.A;
    return *this;
  }
};

void require_outside(const CurrentHistory& history, const Vec3& x_obs) {
  const UniformGrid3& g = history.grid();
  const double min_r = 0.5 * std::min({g.spacing.x, g.spacing.y, g.spacing.z});
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.node_count(); ++i)
    closest = std::min(closest, (x_obs - g.position(i)).norm());
  if (closest < min_r)
    throw ConfigError("observation point sits on a source node; move it off the grid");
}

}  // namespace

RetardedPotential retarded_potential(const CurrentHistory& history, const Vec3& x_obs,
                                     double t_obs) {
  require_outside(history, x_obs);
  const UniformGrid3& g = history.grid();
  const double dV = g.cell_volume();
  const double c = history.light_speed();
  const PotentialAcc acc = pairwise_transform_sum<PotentialAcc>(g.node_count(), [&](std::size_t i) {
    if (!history.node_contributes(i)) return PotentialAcc{};
    const Vec3 r = x_obs - g.position(i);
    const double R = r.norm();
    const CurrentHistory::NodeSample s = history.at(i, t_obs - R / c);
    PotentialAcc term;
    term.phi = s.rho / R * dV;
    term.A = s.current * (dV / (c * R));
    return term;
  });
  return RetardedPotential{acc.phi, acc.A};
}

Vec3 exact_farfield_B(const CurrentHistory& history, const Vec3& x_obs, double t_obs) {
  const UniformGrid3& g = history.grid();
  const double dV = g.cell_volume();
  const double c = history.light_speed();
  return pairwise_transform_sum<Vec3>(g.node_count(), [&](std::size_t i) {
    if (!history.node_contributes(i)) return Vec3{};
    const Vec3 r = x_obs - g.position(i);
    const double R = r.norm();
    const Vec3 nhat = r / R;
    const CurrentHistory::NodeSample s = history.at(i, t_obs - R / c);
    const Vec3 bracket = s.current * (-1.0 / (R * R)) + s.dcurrent_dt * (-1.0 / (R * c));
    return cross(nhat, bracket) * (dV / c);
  });
}

FluxScan flux_scan(const CurrentHistory& history, const std::vector<double>& radii,
                   double t_anchor, bool anchored, int n_theta, int n_phi) {
  if (radii.empty()) throw ConfigError("flux_scan: need at least one radius");
  for (double r : radii)
    if (!(r > 0.0)) throw ConfigError("flux_scan: radii must be positive");
  const double c = history.light_speed();
  FluxScan scan;
  scan.rows.reserve(radii.size());
  for (double R0 : radii) {
    const SphereQuadrature sphere = SphereQuadrature::make(R0, n_theta, n_phi);
    const auto& nodes = sphere.nodes();
    const double t_obs = anchored ? t_anchor + R0 / c : t_anchor;
    std::vector<Vec3> B(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
      B[i] = exact_farfield_B(history, nodes[i].nhat * R0, t_obs);
    });
    // Radiative flux keeps only the transverse part of B; the longitudinal
    // component is a near-field remnant that carries no net power outward.
    const double power =
        (c / (4.0 * M_PI)) * pairwise_transform_sum<double>(nodes.size(), [&](std::size_t i) {
          const double b2 = B[i].norm2();
          const double bn = dot(nodes[i].nhat, B[i]);
          return nodes[i].weight * (b2 - bn * bn);
        });
    const double mean_b2 = pairwise_transform_sum<double>(nodes.size(), [&](std::size_t i) {
                             return nodes[i].weight * B[i].norm2();
                           }) /
                           (4.0 * M_PI * R0 * R0);
    scan.rows.push_back(FluxScanRow{R0, t_obs, power, std::sqrt(std::max(mean_b2, 0.0))});
  }
  // Log-log least-squares slopes.  A quantity that is exactly zero at every
  // radius has, by convention, an infinite decay exponent.
  const auto fit_exponent = [](const std::vector<double>& r, const std::vector<double>& v) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(v[i] > 0.0)) continue;
      const double x = std::log(r[i]);
      const double y = std::log(v[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n == 0) return std::numeric_limits<double>::infinity();
    if (n < 2) return 0.0;
    const double denom = double(n) * sxx - sx * sx;
    return -(double(n) * sxy - sx * sy) / denom;
  };
  std::vector<double> r, b, p;
  for (const FluxScanRow& row : scan.rows) {
    r.push_back(row.R0);
    b.push_back(row.rms_B);
    p.push_back(row.power);
  }
  scan.b_decay_exponent = fit_exponent(r, b);
  scan.p_decay_exponent = fit_exponent(r, p);
  return scan;
}

CurrentHistory make_dipole_history(const UniformGrid3& grid, const TimeSampling& times, double p0,
                                   double omega, double sigma, double light_speed) {
  if (!(sigma > 0.0)) throw ConfigError("dipole history: sigma must be positive");
  if (!(omega > 0.0)) throw ConfigError("dipole history: omega must be positive");
  const double norm = std::pow(2.0 * M_PI * sigma * sigma, -1.5);
  std::vector<Field<double>> rho(std::size_t(times.n_samples), Field<double>::zero(grid));
  std::vector<Field<Vec3>> current(std::size_t(times.n_samples), Field<Vec3>::zero(grid));
  for (int s = 0; s < times.n_samples; ++s) {
    const double t = times.time(s);
    const double p = p0 * std::sin(omega * t);
    const double pdot = p0 * omega * std::cos(omega * t);
    Field<double>& r = rho[std::size_t(s)];
    Field<Vec3>& j = current[std::size_t(s)];
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      const Vec3 x = grid.position(i);
      const double g = norm * std::exp(-x.norm2() / (2.0 * sigma * sigma));
      r[i] = p * (x.z / (sigma * sigma)) * g;
      j[i] = Vec3{0.0, 0.0, pdot * g};
    }
  }
  return CurrentHistory::from_snapshots(grid, times, rho, current, light_speed);
}

Vec3 point_dipole_B(const Vec3& x_obs, double t_obs, double p0, double omega,
                    double light_speed) {
  const double r = x_obs.norm();
  const double c = light_speed;
  const double tr = t_obs - r / c;
  const double pdot = p0 * omega * std::cos(omega * tr);
  const double pddot = -p0 * omega * omega * std::sin(omega * tr);
  const Vec3 nhat = x_obs / r;
  return cross(nhat, Vec3{0.0, 0.0, 1.0}) * (-(pdot / (r * r) + pddot / (r * c)) / c);
}

}  // namespace qrad
