#include "qrad/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrad/errors.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/threading.hpp"

namespace qrad {

namespace {

/// 4th-order central first-derivative weights for offsets -2h..+2h.
constexpr double kD1[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};

struct NodeWorst {
  double residual = 0.0;
  double drho = 0.0;
  double time = 0.0;
};

}  // namespace

ContinuityReport continuity_check(const PointSampler& sample, const UniformGrid3& patch,
                                  const std::vector<double>& times, double space_step,
                                  double time_step, double tolerance) {
  if (times.empty()) throw ConfigError("continuity_check: need at least one probe time");
  if (!(space_step > 0.0) || !(time_step > 0.0))
    throw ConfigError("continuity_check: steps must be positive");
  const std::size_t n = patch.node_count();
  std::vector<NodeWorst> per_node(n);
  parallel_for(n, [&](std::size_t i) {
    const Vec3 x = patch.position(i);
    NodeWorst w;
    double rho;
    Vec3 jv;
    for (double t : times) {
      double drho_dt = 0.0;
      double div_j = 0.0;
      for (int s = -2; s <= 2; ++s) {
        if (s == 0) continue;
        const double wt = kD1[s + 2];
        sample(x, t + s * time_step, rho, jv);
        drho_dt += wt * rho / time_step;
        sample(x + Vec3{s * space_step, 0.0, 0.0}, t, rho, jv);
        div_j += wt * jv.x / space_step;
        sample(x + Vec3{0.0, s * space_step, 0.0}, t, rho, jv);
        div_j += wt * jv.y / space_step;
        sample(x + Vec3{0.0, 0.0, s * space_step}, t, rho, jv);
        div_j += wt * jv.z / space_step;
      }
      const double resid = std::abs(drho_dt + div_j);
      if (resid > w.residual) {
        w.residual = resid;
        w.time = t;
      }
      w.drho = std::max(w.drho, std::abs(drho_dt));
    }
    per_node[i] = w;
  });
  ContinuityReport report;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < n; ++i) {
    if (per_node[i].residual > report.max_residual) {
      report.max_residual = per_node[i].residual;
      report.worst_position = patch.position(i);
      report.worst_time = per_node[i].time;
    }
    report.max_drho_dt = std::max(report.max_drho_dt, per_node[i].drho);
  }
  report.relative_residual =
      report.max_drho_dt > 0.0 ? report.max_residual / report.max_drho_dt : 0.0;
  report.pass = report.max_residual <= tolerance * report.max_drho_dt ||
                (report.max_drho_dt == 0.0 && report.max_residual == 0.0);
  return report;
}

ChargeScanReport charge_constancy_scan(const CurrentSource& source, const TimeSampling& times,
                                       double tolerance, double scale) {
  ChargeScanReport report;
  report.tolerance = tolerance;
  report.nominal_charge = source.total_charge();
  report.scale = scale > 0.0 ? scale : std::abs(report.nominal_charge);
  const UniformGrid3& grid = source.grid();
  Field<double> rho = Field<double>::zero(grid);
  Field<Vec3> current = Field<Vec3>::zero(grid);
  for (int s = 0; s < times.n_samples; ++s) {
    const double t = times.time(s);
    source.evaluate(t, rho, current);
    report.times.push_back(t);
    report.charge.push_back(integrate_grid(rho));
  }
  report.initial_offset = std::abs(report.charge.front() - report.nominal_charge);
  for (double q : report.charge)
    report.max_deviation = std::max(report.max_deviation, std::abs(q - report.charge.front()));
  report.pass = report.max_deviation <= tolerance * report.scale;
  return report;
}

CurrentBoundReport current_bound_scan(const CurrentSource& source, const TimeSampling& times,
                                      double tolerance) {
  CurrentBoundReport report;
  report.tolerance = tolerance;
  const UniformGrid3& grid = source.grid();
  const double c = source.light_speed();
  Field<double> rho = Field<double>::zero(grid);
  Field<Vec3> current = Field<Vec3>::zero(grid);
  double excess = -std::numeric_limits<double>::infinity();
  double peak_rho = 0.0;
  double ratio = 0.0;
  for (int s = 0; s < times.n_samples; ++s) {
    source.evaluate(times.time(s), rho, current);
    double frame_peak = 0.0;
    for (std::size_t i = 0; i < grid.node_count(); ++i)
      frame_peak = std::max(frame_peak, std::abs(rho[i]));
    peak_rho = std::max(peak_rho, frame_peak);
    const double support = 1e-12 * frame_peak;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      const double j = current[i].norm();
      const double cr = c * std::abs(rho[i]);
      excess = std::max(excess, j - cr);
      if (cr > support) ratio = std::max(ratio, j / cr);
    }
  }
  if (peak_rho == 0.0) {
    report.max_excess = 0.0;
    report.max_ratio = 0.0;
    report.pass = true;
    return report;
  }
  report.max_excess = excess / (c * peak_rho);
  report.max_ratio = ratio;
  report.pass = report.max_excess <= tolerance;
  return report;
}

SpreadingReport subluminal_spreading_check(const CurrentSource& source,
                                           const TimeSampling& times) {
  if (times.n_samples < 2) throw ConfigError("spreading check: need at least two times");
  SpreadingReport report;
  report.light_speed = source.light_speed();
  for (int s = 0; s < times.n_samples; ++s) {
    const double t = times.time(s);
    report.times.push_back(t);
    report.extents.push_back(source.extent99(t));
  }
  for (std::size_t i = 1; i < report.extents.size(); ++i) {
    const double rate = (report.extents[i] - report.extents[i - 1]) / times.dt;
    report.max_rate = std::max(report.max_rate, rate);
  }
  report.pass = report.max_rate <= report.light_speed * (1.0 + 1e-9);
  return report;
}

}  // namespace qrad
