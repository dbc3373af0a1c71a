#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "qrad/ensemble.hpp"
#include "qrad/errors.hpp"
#include "qrad/retarded.hpp"

using namespace qrad;

namespace {

double gaussian3(const Vec3& x, double sigma) {
  return std::pow(2.0 * M_PI * sigma * sigma, -1.5) * std::exp(-0.5 * x.norm2() / (sigma * sigma));
}

/// History whose every snapshot equals the given closed-form fields.
CurrentHistory constant_history(const UniformGrid3& g, const TimeSampling& ts, double sigma,
                                double light_speed, const Vec3& j_dir) {
  std::vector<Field<double>> rhos;
  std::vector<Field<Vec3>> currents;
  for (int s = 0; s < ts.n_samples; ++s) {
    Field<double> r = Field<double>::zero(g);
    Field<Vec3> j = Field<Vec3>::zero(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const double gv = gaussian3(g.position(i), sigma);
      r[i] = gv;
      j[i] = j_dir * gv;
    }
    rhos.push_back(std::move(r));
    currents.push_back(std::move(j));
  }
  return CurrentHistory::from_snapshots(g, ts, rhos, currents, light_speed);
}

}  // namespace

TEST_CASE("an empty history produces exactly zero fields everywhere") {
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {1, 1, 1}, {8, 8, 8});
  const TimeSampling ts = TimeSampling::make(0.0, 0.5, 6);
  std::vector<Field<double>> rhos(6, Field<double>::zero(g));
  std::vector<Field<Vec3>> currents(6, Field<Vec3>::zero(g));
  const CurrentHistory h = CurrentHistory::from_snapshots(g, ts, rhos, currents, 1.0);

  for (std::size_t i = 0; i < g.node_count(); ++i) CHECK_FALSE(h.node_contributes(i));

  const RetardedPotential pot = retarded_potential(h, {0, 0, 40}, 1.2);
  CHECK(pot.phi == 0.0);
  CHECK(pot.A.max_abs() == 0.0);
  CHECK(exact_farfield_B(h, {0, 0, 40}, 1.2).max_abs() == 0.0);

  const FluxScan scan = flux_scan(h, {10.0, 20.0}, 1.2);
  CHECK(std::isinf(scan.b_decay_exponent));
  for (const FluxScanRow& row : scan.rows) CHECK(row.power == 0.0);
}

TEST_CASE("a static gaussian charge reproduces the coulomb potential") {
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {1.2, 1.2, 1.2}, {24, 24, 24});
  const TimeSampling ts = TimeSampling::make(0.0, 1.0, 8);
  const CurrentHistory h = constant_history(g, ts, 0.2, 10.0, {0, 0, 0});

  const RetardedPotential pot = retarded_potential(h, {0, 0, 8}, 2.0);
  CHECK(pot.phi == doctest::Approx(1.0 / 8.0).epsilon(1e-6));
  CHECK(pot.A.max_abs() == 0.0);
  CHECK(exact_farfield_B(h, {0, 0, 8}, 2.0).max_abs() == 0.0);

  // off-axis observation sees the same monopole
  const RetardedPotential diag = retarded_potential(h, Vec3{4, 4, 4}, 2.0);
  CHECK(diag.phi == doctest::Approx(1.0 / std::sqrt(48.0)).epsilon(1e-6));
}

TEST_CASE("a steady current element gives a static 1/R^2 magnetic field") {
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {1.2, 1.2, 1.2}, {24, 24, 24});
  const TimeSampling ts = TimeSampling::make(0.0, 1.0, 8);
  const double c = 10.0;
  const CurrentHistory h = constant_history(g, ts, 0.2, c, {0, 0, 0.6});

  // vector potential is time independent
  const RetardedPotential a1 = retarded_potential(h, {6, 0, 0}, 1.3);
  const RetardedPotential a2 = retarded_potential(h, {6, 0, 0}, 1.9);
  CHECK((a1.A - a2.A).max_abs() < 1e-12 * a1.A.max_abs());
  CHECK(a1.A.z == doctest::Approx(0.6 / (c * 6.0)).epsilon(1e-5));

  // |B| ~ I sin(theta) / (c R^2), so the fitted decay exponent is 2 and the
  // sphere-integrated "flux" drops by 4x per radius doubling
  const FluxScan scan = flux_scan(h, {30.0, 42.0, 60.0}, 1.5);
  CHECK(scan.b_decay_exponent == doctest::Approx(2.0).epsilon(2e-3));
  REQUIRE(scan.rows.size() == 3);
  CHECK(scan.rows[0].power / scan.rows[2].power == doctest::Approx(4.0).epsilon(5e-3));
  CHECK(scan.p_decay_exponent == doctest::Approx(2.0).epsilon(5e-3));

  // Biot-Savart element: B = (I/c) (zhat x nhat) / R^2 points along +y here
  const Vec3 B = exact_farfield_B(h, {30, 0, 0}, 4.5);
  CHECK(B.y == doctest::Approx(0.6 / (c * 900.0)).epsilon(1e-4));
  CHECK(std::fabs(B.x) < 1e-10 * std::fabs(B.y));
  CHECK(std::fabs(B.z) < 1e-10 * std::fabs(B.y));
}

TEST_CASE("synthetic dipole history matches the closed-form point dipole") {
  const double p0 = 0.7, omega = 2.0, sigma = 0.08, c = 1.0;
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {0.96, 0.96, 0.96}, {24, 24, 24});
  const TimeSampling ts = TimeSampling::make(0.0, 0.05, 64);
  const CurrentHistory h = make_dipole_history(g, ts, p0, omega, sigma, c);
  CHECK(h.source_extent() < 0.9);

  for (const Vec3& x : {Vec3{2.4, 0, 0}, Vec3{0, 2.4, 0}, Vec3{1.7, -1.7, 1.0}}) {
    const double r = x.norm();
    const double t_obs = 1.4 + r / c;
    const Vec3 oracle = point_dipole_B(x, t_obs, p0, omega, c);
    const Vec3 brute = exact_farfield_B(h, x, t_obs);
    const double scale = (p0 * omega / c) * (1.0 / (r * r) + omega / (r * c));
    CHECK((brute - oracle).max_abs() < 0.03 * scale);
  }
}

TEST_CASE("wave-zone |B| of the dipole decays with exponent one") {
  const double p0 = 0.7, omega = 2.0, sigma = 0.08, c = 1.0;
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {0.96, 0.96, 0.96}, {24, 24, 24});
  const TimeSampling ts = TimeSampling::make(0.0, 0.05, 64);
  const CurrentHistory h = make_dipole_history(g, ts, p0, omega, sigma, c);

  const FluxScan scan = flux_scan(h, {8.0, 11.3, 16.0, 22.6, 32.0}, 1.3);
  CHECK(scan.b_decay_exponent == doctest::Approx(1.0).epsilon(0.05));
  // radiated power is radius independent in the wave zone
  REQUIRE(scan.rows.size() == 5);
  CHECK(scan.rows[4].power / scan.rows[0].power == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("retardation is causal to the width of the interpolation stencil") {
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {1, 1, 1}, {9, 9, 9});
  const TimeSampling ts = TimeSampling::make(0.0, 0.1, 64);
  const std::size_t center = g.node_count() / 2;
  REQUIRE(g.position(center).max_abs() < 1e-12);

  std::vector<Field<double>> rhos(64, Field<double>::zero(g));
  std::vector<Field<Vec3>> currents(64, Field<Vec3>::zero(g));
  for (int s = 0; s < 64; ++s)
    currents[std::size_t(s)][center] = {0.0, 0.0, std::sin(1.3 * ts.time(s))};
  CurrentHistory h = CurrentHistory::from_snapshots(g, ts, rhos, currents, 1.0);

  // only the poked node carries support
  for (std::size_t i = 0; i < g.node_count(); ++i)
    CHECK(h.node_contributes(i) == (i == center));

  const Vec3 x_obs{5, 0, 0};
  const double t_ret = 3.27;  // mid-interval: cubic stencil is samples 31..34
  const double t_obs = t_ret + 5.0;
  const Vec3 before = exact_farfield_B(h, x_obs, t_obs);
  CHECK(before.max_abs() > 0.0);

  // pokes outside the stencil leave the observation bitwise untouched
  h.poke(center, 37, 0.0, {0.0, 0.0, 100.0});
  h.poke(center, 29, 0.0, {0.0, 0.0, 100.0});
  const Vec3 untouched = exact_farfield_B(h, x_obs, t_obs);
  CHECK(untouched.x == before.x);
  CHECK(untouched.y == before.y);
  CHECK(untouched.z == before.z);

  // a poke inside the stencil must show up
  h.poke(center, 33, 0.0, {0.0, 0.0, 100.0});
  const Vec3 touched = exact_farfield_B(h, x_obs, t_obs);
  CHECK(touched.y != before.y);

  // interpolant derivative tracks the analytic one
  const CurrentHistory::NodeSample ns =
      CurrentHistory::from_snapshots(g, ts, rhos, currents, 1.0).at(center, 3.17);
  CHECK(std::fabs(ns.dcurrent_dt.z - 1.3 * std::cos(1.3 * 3.17)) < 5e-3);
  CHECK(std::fabs(ns.current.z - std::sin(1.3 * 3.17)) < 5e-4);
}

TEST_CASE("interpolation windows: cubic insets the valid range, linear does not") {
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {1, 1, 1}, {4, 4, 4});
  const TimeSampling ts = TimeSampling::make(1.0, 0.25, 8);
  std::vector<Field<double>> rhos(8, Field<double>::zero(g));
  std::vector<Field<Vec3>> currents(8, Field<Vec3>::zero(g));
  rhos[4][7] = 1.0;  // some support so windows matter

  const CurrentHistory cubic = CurrentHistory::from_snapshots(g, ts, rhos, currents, 1.0);
  CHECK(cubic.t_min_valid() == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(cubic.t_max_valid() == doctest::Approx(ts.t_end() - 0.5).epsilon(1e-12));

  const CurrentHistory lin = CurrentHistory::from_snapshots(g, ts, rhos, currents, 1.0,
                                                            CurrentHistory::Interp::linear);
  CHECK(lin.t_min_valid() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.t_max_valid() == doctest::Approx(ts.t_end()).epsilon(1e-12));

  CHECK_THROWS_AS(cubic.at(7, 1.05), NumericalRejection);
  CHECK_THROWS_AS(retarded_potential(cubic, {0, 0, 0.5}, 50.0), NumericalRejection);
  CHECK_NOTHROW(lin.at(7, 1.05));
}

TEST_CASE("history round-trips through the binary format bit for bit") {
  const UniformGrid3 g = UniformGrid3::centered({0.2, 0, -0.1}, {0.9, 0.9, 0.9}, {12, 12, 12});
  const TimeSampling ts = TimeSampling::make(0.5, 0.05, 28);
  const CurrentHistory h = make_dipole_history(g, ts, 0.4, 1.7, 0.1, 2.0);

  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "qrad_history_roundtrip.qradhist";
  h.save(path);
  const CurrentHistory back = CurrentHistory::load(path);
  std::filesystem::remove(path);

  CHECK(back.grid().same_layout(h.grid()));
  CHECK(back.times().t_start == h.times().t_start);
  CHECK(back.times().dt == h.times().dt);
  CHECK(back.times().n_samples == h.times().n_samples);
  CHECK(back.light_speed() == h.light_speed());
  CHECK(back.interp() == h.interp());
  CHECK(back.source_extent() == h.source_extent());

  for (std::size_t node : {std::size_t(0), std::size_t(700), g.node_count() - 1}) {
    CHECK(back.node_contributes(node) == h.node_contributes(node));
    for (int s : {0, 13, 27}) {
      CHECK(back.stored_rho(node, s) == h.stored_rho(node, s));
      const Vec3 a = back.stored_current(node, s), b = h.stored_current(node, s);
      CHECK(a.x == b.x);
      CHECK(a.y == b.y);
      CHECK(a.z == b.z);
    }
  }

  const Vec3 probe{3, 1, -2};
  const double t_obs = 2.87;  // retarded times land inside the recorded window
  const Vec3 b1 = exact_farfield_B(h, probe, t_obs);
  const Vec3 b2 = exact_farfield_B(back, probe, t_obs);
  CHECK(b1.x == b2.x);
  CHECK(b1.y == b2.y);
  CHECK(b1.z == b2.z);
}

TEST_CASE("sampling a source records the same history as explicit snapshots") {
  NewtonianBlob blob;
  blob.x0 = {0.3, 0.0, -0.2};
  blob.velocity = {0.05, -0.1, 0.08};
  blob.sigma_x = {0.5, 0.4, 0.45};
  const UniformGrid3 g = UniformGrid3::centered({0, 0, 0}, {4, 4, 4}, {20, 20, 20});
  NewtonianCurrentSource src(NewtonianEnsemble::make({blob}, 1.0, 1.0), g);
  const TimeSampling ts = TimeSampling::make(0.0, 0.2, 10);

  const CurrentHistory from_src = CurrentHistory::from_source(src, ts);

  std::vector<Field<double>> rhos;
  std::vector<Field<Vec3>> currents;
  SourceFields sf = SourceFields::shaped(g);
  for (int s = 0; s < ts.n_samples; ++s) {
    src.evaluate(ts.time(s), sf.rho, sf.current);
    rhos.push_back(sf.rho);
    currents.push_back(sf.current);
  }
  const CurrentHistory manual =
      CurrentHistory::from_snapshots(g, ts, rhos, currents, src.light_speed());

  for (std::size_t node : {std::size_t(11), std::size_t(4000), g.node_count() / 2}) {
    CHECK(from_src.node_contributes(node) == manual.node_contributes(node));
    for (int s : {0, 5, 9}) {
      CHECK(from_src.stored_rho(node, s) == manual.stored_rho(node, s));
      const Vec3 a = from_src.stored_current(node, s), b = manual.stored_current(node, s);
      CHECK((a - b).max_abs() == 0.0);
    }
  }
  CHECK(from_src.light_speed() == manual.light_speed());
}
