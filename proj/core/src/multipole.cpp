#include "qrad/multipole.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qrad/errors.hpp"
#include "qrad/reduce.hpp"

namespace qrad {

namespace {

constexpr double boundary_rel = 1e-8;  ///< current decay demanded at the box edge

void check_current_boundary(const Field<Vec3>& current, double t) {
  double max2 = 0.0, boundary2 = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    const double n2 = current.values[i].norm2();
    max2 = std::max(max2, n2);
    if (current.grid.is_boundary(i)) boundary2 = std::max(boundary2, n2);
  }
  if (max2 == 0.0) return;
  if (boundary2 > boundary_rel * boundary_rel * max2) {
    std::ostringstream msg;
    msg << "moment quadrature: |J| at the grid boundary is " << std::sqrt(boundary2 / max2)
        << " of its peak";
    if (std::isfinite(t)) msg << " at t = " << t;
    msg << " (limit " << boundary_rel << "); the integrand is truncated -- enlarge the box";
    throw NumericalRejection(msg.str());
  }
}

/// Monomial table for (nhat.x)^(m-1) expanded into Cartesian moments: entry
/// (a,b,c) with a+b+c = m-1 carries the multinomial coefficient, so moments
/// for every direction come from one direction-independent sweep.
struct MonomialTable {
  struct Entry {
    int m, a, b, c;
    double coeff;
  };
  std::vector<Entry> entries;  ///< grouped by m ascending

  explicit MonomialTable(int max_order) {
    auto factorial = [](int n) {
      double f = 1.0;
      for (int i = 2; i <= n; ++i) f *= i;
      return f;
    };
    for (int m = 1; m <= max_order; ++m) {
      const int d = m - 1;
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) {
          const int c = d - a - b;
          entries.push_back(
              {m, a, b, c, factorial(d) / (factorial(a) * factorial(b) * factorial(c))});
        }
    }
  }
};

constexpr int max_cartesian_entries = 120;  // generous for max_moment_order

struct CartesianAcc {
  std::array<Vec3, max_cartesian_entries> v{};
  CartesianAcc& operator+=(const CartesianAcc& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
};

}  // namespace

ObservationGeometry ObservationGeometry::make(const Vec3& direction, double R0,
                                              double light_speed, double source_extent) {
  const double n = direction.norm();
  if (!(n > 0.0)) throw ConfigError("ObservationGeometry: direction must be nonzero");
  if (!(R0 > 0.0)) throw ConfigError("ObservationGeometry: R0 must be positive");
  if (!(light_speed > 0.0)) throw ConfigError("ObservationGeometry: light speed must be positive");
  if (source_extent > 0.0 && R0 < 50.0 * source_extent) {
    std::ostringstream msg;
    msg << "ObservationGeometry: R0 = " << R0 << " is closer than 50 x source extent ("
        << source_extent << "); the far-field expansion is not trustworthy there";
    throw ConfigError(msg.str());
  }
  return ObservationGeometry{direction / n, R0, light_speed};
}

Vec3 compute_moment(const Field<Vec3>& current, const Vec3& nhat, int m) {
  if (m < 1) throw ConfigError("compute_moment: order must be >= 1");
  check_current_boundary(current, std::numeric_limits<double>::quiet_NaN());
  const Vec3 n = nhat / nhat.norm();
  const Vec3 sum = pairwise_transform_sum<Vec3>(current.size(), [&](std::size_t i) {
    const double d = dot(n, current.grid.position(i));
    double w = 1.0;
    for (int p = 1; p < m; ++p) w *= d;
    return current.values[i] * w;
  });
  return sum * current.grid.cell_volume();
}

std::vector<MomentSeries> moment_series_multi(const CurrentSource& source,
                                              const std::vector<Vec3>& directions, int max_order,
                                              const TimeSampling& times) {
  if (max_order < 1 || max_order > max_moment_order)
    throw ConfigError("moment_series_multi: max_order out of range");
  if (directions.empty()) throw ConfigError("moment_series_multi: no directions");

  const double f = source.max_angular_frequency();
  if (f > 0.0 && times.samples_per_period(f) < 8.0) {
    std::ostringstream msg;
    msg << "moment_series_multi: sampling gives " << times.samples_per_period(f)
        << " samples per period at the source's top angular frequency " << f << " (need >= 8)";
    throw NumericalRejection(msg.str());
  }

  std::vector<Vec3> nhats;
  nhats.reserve(directions.size());
  for (const auto& d : directions) {
    const double n = d.norm();
    if (!(n > 0.0)) throw ConfigError("moment_series_multi: zero direction");
    nhats.push_back(d / n);
  }

  const MonomialTable table(max_order);
  if (table.entries.size() > max_cartesian_entries)
    throw ConfigError("moment_series_multi: order too large for the accumulator");

  std::vector<MomentSeries> out(nhats.size());
  for (std::size_t di = 0; di < nhats.size(); ++di) {
    out[di].max_order = max_order;
    out[di].nhat = nhats[di];
    out[di].times = times;
    out[di].source_kind = source.kind();
    out[di].moments.assign(std::size_t(max_order), VecSeries{times, {}});
    for (auto& s : out[di].moments) s.values.resize(times.n_samples);
  }

  Field<double> rho;
  Field<Vec3> current;
  double extent = 0.0;
  // Precompute node positions once; the per-time sweep is the hot path.
  const UniformGrid3& grid = source.grid();
  std::vector<Vec3> pos(grid.node_count());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = grid.position(i);

  for (int it = 0; it < times.n_samples; ++it) {
    const double t = times.time(it);
    source.evaluate(t, rho, current);
    if (current.size() != grid.node_count())
      throw ConfigError("moment_series_multi: source returned a mismatched field");
    require_finite(current, "moment_series_multi: current");
    check_current_boundary(current, t);
    extent = std::max(extent, source.extent99(t));

    // Chunked pairwise reduction: the wide accumulator is summed per block of
    // nodes (fixed block size, so the reduction tree never depends on thread
    // count or data), keeping the copies off the per-node path.
    constexpr std::size_t block = 256;
    const std::size_t n_nodes = grid.node_count();
    const std::size_t n_blocks = (n_nodes + block - 1) / block;
    const CartesianAcc acc = pairwise_transform_sum<CartesianAcc>(n_blocks, [&](std::size_t bi) {
      CartesianAcc a;
      const std::size_t end = std::min(n_nodes, (bi + 1) * block);
      for (std::size_t i = bi * block; i < end; ++i) {
        const Vec3& x = pos[i];
        const Vec3& J = current.values[i];
        // Power ladders shared by all entries of this node.
        double px[max_moment_order], py[max_moment_order], pz[max_moment_order];
        px[0] = py[0] = pz[0] = 1.0;
        for (int p = 1; p < max_order; ++p) {
          px[p] = px[p - 1] * x.x;
          py[p] = py[p - 1] * x.y;
          pz[p] = pz[p - 1] * x.z;
        }
        for (std::size_t e = 0; e < table.entries.size(); ++e) {
          const auto& en = table.entries[e];
          a.v[e] += J * (px[en.a] * py[en.b] * pz[en.c]);
        }
      }
      return a;
    });

    const double dV = grid.cell_volume();
    for (std::size_t di = 0; di < nhats.size(); ++di) {
      const Vec3& n = nhats[di];
      for (std::size_t e = 0; e < table.entries.size(); ++e) {
        const auto& en = table.entries[e];
        double w = en.coeff * dV;
        for (int p = 0; p < en.a; ++p) w *= n.x;
        for (int p = 0; p < en.b; ++p) w *= n.y;
        for (int p = 0; p < en.c; ++p) w *= n.z;
        out[di].moments[std::size_t(en.m) - 1].values[std::size_t(it)] += acc.v[e] * w;
      }
    }
  }
  for (auto& s : out) s.source_extent = extent;
  return out;
}

MomentSeries moment_series(const CurrentSource& source, const Vec3& nhat, int max_order,
                           const TimeSampling& times) {
  return moment_series_multi(source, {nhat}, max_order, times).front();
}

NonRadiationCertificate certify_nonradiation(const MomentSeries& series, double tol) {
  if (!(tol > 0.0)) throw ConfigError("certify_nonradiation: tol must be positive");
  NonRadiationCertificate cert;
  cert.nhat = series.nhat;
  cert.tol = tol;
  cert.pass = true;
  for (int m = 1; m <= series.max_order; ++m) {
    const VecSeries& s = series.order(m);
    DegreeCertificate dc;
    dc.m = m;
    dc.scale = s.max_abs();
    dc.fit = fit_polynomial_degree(s, m - 1, tol);
    dc.degree_ok = dc.fit.certified_degree >= 0;
    if (dc.scale > 0.0) {
      const DerivativeSeries d = nth_time_derivative(s, m);
      dc.derivative_residual = d.series.max_abs() / dc.scale;
      dc.derivative_error = d.error_estimate / dc.scale;
    }
    dc.derivative_ok = dc.derivative_residual <= tol;
    dc.pass = dc.degree_ok && dc.derivative_ok;
    cert.pass = cert.pass && dc.pass;
    cert.orders.push_back(dc);
  }
  return cert;
}

bool quadrature_dominated(const NonRadiationCertificate& base,
                          const NonRadiationCertificate& refined) {
  const std::size_t n = std::min(base.orders.size(), refined.orders.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = base.orders[i];
    const auto& r = refined.orders[i];
    if (b.pass) continue;
    const double lo = std::min(b.derivative_residual, r.derivative_residual);
    const double hi = std::max(b.derivative_residual, r.derivative_residual);
    if (lo == 0.0 || hi / lo > 2.0) return true;
  }
  return false;
}

FarfieldSeries farfield_series(const MomentSeries& series, const ObservationGeometry& geom) {
  FarfieldSeries out;
  out.geom = geom;
  out.max_order = series.max_order;
  const double c = geom.light_speed;

  // Derivative series per order; intersect their valid interiors.
  std::vector<DerivativeSeries> deriv(std::size_t(series.max_order));
  int lo = 0, hi = series.times.n_samples - 1;
  for (int m = 1; m <= series.max_order; ++m) {
    deriv[std::size_t(m) - 1] = nth_time_derivative(series.order(m), m);
    const auto& d = deriv[std::size_t(m) - 1];
    lo = std::max(lo, d.first_index);
    hi = std::min(hi, d.first_index + int(d.series.values.size()) - 1);
  }
  if (hi < lo) throw NumericalRejection("farfield_series: window too short for the derivatives");

  out.first_source_index = lo;
  out.t_obs = TimeSampling{series.times.time(lo) + geom.R0 / c, series.times.dt, hi - lo + 1};
  out.term_max.assign(std::size_t(series.max_order), 0.0);
  out.B.resize(std::size_t(hi - lo + 1));
  out.E.resize(out.B.size());

  const double field_scale = 1.0 / (c * c * geom.R0);
  for (int i = lo; i <= hi; ++i) {
    Vec3 bracket{};
    double inv_c_pow = 1.0;  // (1/c)^(m-1)
    double inv_fact = 1.0;   // 1/(m-1)!
    for (int m = 1; m <= series.max_order; ++m) {
      const auto& d = deriv[std::size_t(m) - 1];
      const Vec3 term = d.series.values[std::size_t(i - d.first_index)] * (inv_c_pow * inv_fact);
      bracket += term;
      auto& tm = out.term_max[std::size_t(m) - 1];
      tm = std::max(tm, term.norm() * field_scale);
      inv_c_pow /= c;
      inv_fact /= m;
    }
    const Vec3 B = cross(geom.nhat, bracket) * (-field_scale);
    out.B[std::size_t(i - lo)] = B;
    out.E[std::size_t(i - lo)] = farfield_E(B, geom.nhat);
  }
  return out;
}

Vec3 farfield_E(const Vec3& B, const Vec3& nhat) { return cross(nhat, B) * -1.0; }

double radiated_power(const SphereQuadrature& sphere, const std::vector<Vec3>& E,
                      const std::vector<Vec3>& B, double light_speed) {
  const auto& nodes = sphere.nodes();
  if (E.size() != nodes.size() || B.size() != nodes.size())
    throw ConfigError("radiated_power: field arrays must match the sphere nodes");
  const double flux = pairwise_transform_sum<double>(nodes.size(), [&](std::size_t i) {
    return nodes[i].weight * dot(cross(E[i], B[i]), nodes[i].nhat);
  });
  return light_speed / (4.0 * M_PI) * flux;
}

double larmor_power(const Vec3& acceleration, double charge, double light_speed) {
  return (2.0 / 3.0) * charge * charge * acceleration.norm2() /
         (light_speed * light_speed * light_speed);
}

RadiationReport radiation_report(const CurrentSource& source, double R0, int max_order,
                                 const TimeSampling& times, int n_theta, int n_phi) {
  const SphereQuadrature sphere = SphereQuadrature::make(R0, n_theta, n_phi);
  std::vector<Vec3> directions;
  directions.reserve(sphere.nodes().size());
  for (const auto& n : sphere.nodes()) directions.push_back(n.nhat);

  const std::vector<MomentSeries> all =
      moment_series_multi(source, directions, max_order, times);

  RadiationReport rep;
  rep.R0 = R0;
  rep.max_order = max_order;
  rep.source_extent = all.front().source_extent;
  rep.n_theta = n_theta;
  rep.n_phi = n_phi;
  rep.term_max.assign(std::size_t(max_order), 0.0);

  // The geometry check needs the realized extent, hence after the sweep.
  (void)ObservationGeometry::make(directions.front(), R0, source.light_speed(),
                                  rep.source_extent);

  std::vector<FarfieldSeries> far;
  far.reserve(all.size());
  for (std::size_t di = 0; di < all.size(); ++di) {
    far.push_back(farfield_series(
        all[di], ObservationGeometry{directions[di], R0, source.light_speed()}));
    for (int m = 0; m < max_order; ++m)
      rep.term_max[std::size_t(m)] =
          std::max(rep.term_max[std::size_t(m)], far.back().term_max[std::size_t(m)]);
  }

  rep.t_obs = far.front().t_obs;
  rep.power.resize(std::size_t(rep.t_obs.n_samples));
  std::vector<Vec3> E(directions.size()), B(directions.size());
  for (int it = 0; it < rep.t_obs.n_samples; ++it) {
    for (std::size_t di = 0; di < directions.size(); ++di) {
      E[di] = far[di].E[std::size_t(it)];
      B[di] = far[di].B[std::size_t(it)];
    }
    rep.power[std::size_t(it)] = radiated_power(sphere, E, B, source.light_speed());
  }
  rep.max_power = 0.0;
  for (double p : rep.power) rep.max_power = std::max(rep.max_power, p);
  rep.mean_power =
      pairwise_transform_sum<double>(rep.power.size(), [&](std::size_t i) { return rep.power[i]; }) /
      double(rep.power.size());
  if (rep.t_obs.n_samples >= 32)
    rep.power_spectrum = spectrum(ScalarSeries{rep.t_obs, rep.power});
  return rep;
}

}  // namespace qrad
