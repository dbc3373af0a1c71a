#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "qrad/errors.hpp"
#include "qrad/fourier.hpp"
#include "qrad/multipole.hpp"
#include "qrad/relativistic.hpp"
#include "qrad/spectrum.hpp"
#include "qrad/validation.hpp"

using namespace qrad;

namespace {

/// Small lab setup shared by the scalar-field tests: a position grid large
/// enough that an x-space tail never touches the escape guard, with the
/// wavenumber tail of a sigma_k ~ 0.33 gaussian buried below 1e-10 at the
/// k-grid edge.
struct KGLab {
  UniformGrid3 xgrid = UniformGrid3::centered({0, 0, 0}, {24, 24, 24}, {48, 48, 48});
  RelativisticParams params{};

  KGState make_state(std::vector<KGComponent> comps, const Vec3& k_grid_center = {}) const {
    const UniformGrid3 kgrid = conjugate_wavenumber_grid(xgrid, k_grid_center);
    return KGState::make(std::move(comps), params, kgrid);
  }
};

KGComponent kg_comp(int branch, const Vec3& k0, double sigma_k, cplx amp = {1.0, 0.0}) {
  KGComponent c;
  c.branch = branch;
  c.k_center = k0;
  c.sigma_k = {sigma_k, sigma_k, sigma_k};
  c.amplitude = amp;
  return c;
}

}  // namespace

TEST_CASE("relativistic dispersion: rest energy and known points") {
  RelativisticParams p;
  CHECK(relativistic_omega({0, 0, 0}, p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(relativistic_omega({0, 0, 1}, p) ==
        doctest::Approx(1.4142135623730951).epsilon(1e-15));

  p.hbar = 2.0;
  CHECK(relativistic_omega({0, 0, 0}, p) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(relativistic_omega({1, 0, 0}, p) ==
        doctest::Approx(std::sqrt(5.0) / 2.0).epsilon(1e-15));

  p = RelativisticParams{};
  p.mass = 2.0;
  p.light_speed = 3.0;
  p.hbar = 0.5;
  CHECK(relativistic_omega({0, 0, 0}, p) == doctest::Approx(36.0).epsilon(1e-14));
}

TEST_CASE("kg rest packet: positive charge, zero current, exact time derivative") {
  KGLab lab;
  const KGState st = lab.make_state({kg_comp(+1, {0, 0, 0}, 0.33)});
  CHECK(st.total_charge() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.charge_minus() == 0.0);
  CHECK(st.has_plus());
  CHECK_FALSE(st.has_minus());
  CHECK(st.omega_min() >= 1.0);

  const KGFields f = st.fields(0.4, lab.xgrid);
  SourceFields sf = SourceFields::shaped(lab.xgrid);
  kg_current(f, lab.params, sf.rho, sf.current);
  double max_rho = 0.0, max_j = 0.0;
  for (std::size_t i = 0; i < sf.rho.size(); ++i) {
    max_rho = std::max(max_rho, std::fabs(sf.rho[i]));
    max_j = std::max(max_j, sf.current[i].max_abs());
  }
  CHECK(max_rho > 0.0);
  CHECK(max_j < 1e-13 * max_rho);  // symmetric rest packet carries no current

  // dphi_dt against a centred difference of phi
  const double h = 1e-4;
  const KGFields fp = st.fields(0.4 + h, lab.xgrid);
  const KGFields fm = st.fields(0.4 - h, lab.xgrid);
  double max_err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.phi.size(); ++i) {
    max_err = std::max(max_err, std::abs((fp.phi[i] - fm.phi[i]) / (2.0 * h) - f.dphi_dt[i]));
    scale = std::max(scale, std::abs(f.dphi_dt[i]));
  }
  CHECK(max_err < 1e-7 * scale);
}

TEST_CASE("kg synthesis agrees with the brute-force point evaluation") {
  KGLab lab;
  const KGState st = lab.make_state({kg_comp(+1, {0, 0, 0.4}, 0.3)}, {0, 0, 0.4});
  const double t = 1.1;
  const KGFields f = st.fields(t, lab.xgrid);
  for (std::size_t idx :
       {lab.xgrid.index(24, 24, 24), lab.xgrid.index(20, 30, 25), lab.xgrid.index(10, 24, 38)}) {
    const KGSample s = st.sample_at(t, lab.xgrid.position(idx));
    CHECK(std::abs(s.phi - f.phi[idx]) < 1e-12);
    CHECK(std::abs(s.dphi_dt - f.dphi_dt[idx]) < 1e-12);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(s.grad[a] - f.grad[idx][a]) < 1e-12);
  }
}

TEST_CASE("kg branches: minus charge sign and balanced-mix normalisation") {
  KGLab lab;
  const KGState minus = lab.make_state({kg_comp(-1, {0, 0, 0}, 0.33)});
  CHECK(minus.total_charge() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(minus.charge_plus() == 0.0);

  const KGState mixed = lab.make_state(
      {kg_comp(+1, {0, 0, 0}, 0.33), kg_comp(-1, {0, 0, 0.05}, 0.33, {0.0, 1.0})});
  CHECK(mixed.charge_plus() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(mixed.charge_minus() == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::fabs(mixed.total_charge()) < 1e-9);
  CHECK(mixed.has_plus());
  CHECK(mixed.has_minus());

  // the branch beat pushes the configured bandwidth past the pair gap
  CHECK(mixed.max_angular_frequency() >= 2.0);

  CHECK_THROWS_AS(
      KGState::make_from_amplitudes(conjugate_wavenumber_grid(lab.xgrid, {}),
                                    std::vector<cplx>(std::size_t(48 * 48 * 48)),
                                    std::vector<cplx>(std::size_t(48 * 48 * 48)), lab.params),
      ConfigError);
}

TEST_CASE("kg total current matches the mode-diagonal velocity average") {
  KGLab lab;
  const Vec3 k0{0, 0, 0.5};
  const KGState st = lab.make_state({kg_comp(+1, k0, 0.33)}, k0);
  KGCurrentSource src(st, lab.xgrid);
  SourceFields sf = SourceFields::shaped(lab.xgrid);
  src.evaluate(0.0, sf.rho, sf.current);
  const Vec3 I1 = compute_moment(sf.current, {0, 0, 1}, 1);

  // Mode-diagonal identity: the net current of a one-branch state is
  // q c^2 <k_z> / <omega> with |amplitude|^2 weights, exact on the grid.
  const UniformGrid3& kg = st.kgrid();
  double wk = 0.0, ww = 0.0;
  for (std::size_t i = 0; i < kg.node_count(); ++i) {
    const double w = std::norm(st.plus_amplitudes()[i]);
    wk += w * kg.position(i).z;
    ww += w * relativistic_omega(kg.position(i), lab.params);
  }
  const double expected = lab.params.charge * wk / ww;  // c = 1
  CHECK(I1.z == doctest::Approx(expected).epsilon(1e-8));
  CHECK(std::fabs(I1.x) < 1e-10);
  // and the packet moves slower than light, near the central group velocity
  CHECK(expected == doctest::Approx(0.5 / std::sqrt(1.25)).epsilon(0.12));
  CHECK(src.kind() == "kg_plus");
}

TEST_CASE("single-branch kg certifies, balanced mix fails and beats at the gap") {
  KGLab lab;
  const TimeSampling ts = TimeSampling::make(0.0, 0.1, 48);

  const KGState plus = lab.make_state({kg_comp(+1, {0, 0, 0.3}, 0.33)}, {0, 0, 0.3});
  KGCurrentSource plus_src(plus, lab.xgrid);
  const MomentSeries ms = moment_series(plus_src, {0, 0, 1}, 4, TimeSampling::make(0.0, 0.1, 40));
  const NonRadiationCertificate cert = certify_nonradiation(ms, 1e-6);
  CHECK(cert.pass);
  for (const DegreeCertificate& d : cert.orders) {
    CHECK(d.pass);
    CHECK(d.fit.certified_degree <= d.m - 1);
  }
  CHECK(plus_src.kind() == "kg_plus");

  const KGState mixed = lab.make_state(
      {kg_comp(+1, {0, 0, 0}, 0.33), kg_comp(-1, {0, 0, 0.05}, 0.33, {0.0, 1.0})});
  KGCurrentSource mixed_src(mixed, lab.xgrid);
  CHECK(mixed_src.kind() == "kg_mixed");
  const MomentSeries mm = moment_series(mixed_src, {0, 0, 1}, 2, ts);
  CHECK_FALSE(certify_nonradiation(mm, 1e-6).pass);

  const ZitterReport zr = zitterbewegung_report(mm.order(1), lab.params);
  CHECK(zr.gap_frequency == doctest::Approx(2.0));
  CHECK(zr.peaks_at_gap);
  CHECK_FALSE(zr.quiet);
  CHECK(zr.lowest_peak_omega >= zr.gap_frequency - zr.spec.bin_width);
}

TEST_CASE("zitter report on synthetic series: gap peaks, quiet, sampling guard") {
  RelativisticParams p;
  const TimeSampling ts = TimeSampling::make(0.0, 0.1, 256);

  VecSeries osc;
  osc.times = ts;
  for (int i = 0; i < ts.n_samples; ++i)
    osc.values.push_back({0, 0, 0.3 * std::sin(2.3 * ts.time(i))});
  const ZitterReport zr = zitterbewegung_report(osc, p);
  CHECK(zr.peaks_at_gap);
  CHECK_FALSE(zr.quiet);
  CHECK(zr.lowest_peak_omega == doctest::Approx(2.3).epsilon(0.02));
  CHECK(zr.band_ratio < 1e-4);
  CHECK(zr.high_band_power > 0.0);

  VecSeries flat;
  flat.times = ts;
  flat.values.assign(std::size_t(ts.n_samples), Vec3{0, 0, 0.7});
  CHECK(zitterbewegung_report(flat, p).quiet);

  VecSeries slow;  // a sub-gap oscillation must be flagged, not excused
  slow.times = ts;
  for (int i = 0; i < ts.n_samples; ++i)
    slow.values.push_back({0, 0, std::sin(0.8 * ts.time(i))});
  const ZitterReport zs = zitterbewegung_report(slow, p);
  CHECK_FALSE(zs.peaks_at_gap);
  CHECK(zs.band_ratio > 1.0);

  VecSeries coarse;
  coarse.times = TimeSampling::make(0.0, 0.5, 64);  // ~6 samples per gap period
  coarse.values.assign(64, Vec3{});
  CHECK_THROWS_AS(zitterbewegung_report(coarse, p), NumericalRejection);
}

TEST_CASE("dirac branch basis: paired energies, orthonormal spinors") {
  RelativisticParams p;
  p.mass = 1.3;
  p.light_speed = 2.0;
  p.hbar = 0.7;
  const Vec3 k{0.3, -0.2, 0.5};
  const DiracBranchBasis b = dirac_branch_basis(k, p);

  const double E = p.hbar * relativistic_omega(k, p);
  CHECK(b.energy[0] == doctest::Approx(E).epsilon(1e-12));
  CHECK(b.energy[1] == doctest::Approx(E).epsilon(1e-12));
  CHECK(b.energy[2] == doctest::Approx(-E).epsilon(1e-12));
  CHECK(b.energy[3] == doctest::Approx(-E).epsilon(1e-12));

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx dot = 0.0;
      for (int a = 0; a < 4; ++a) dot += std::conj(b.spinor[i][a]) * b.spinor[j][a];
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-12);
    }

  // rest frame: the branch spinors reduce to the four unit spinors
  const DiracBranchBasis rest = dirac_branch_basis({0, 0, 0}, p);
  for (int bidx = 0; bidx < 4; ++bidx)
    for (int a = 0; a < 4; ++a)
      CHECK(std::abs(rest.spinor[bidx][a] - (a == bidx ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("single-mode dirac: rest branch is static, a pair mix beats at 2 m c^2 / hbar") {
  RelativisticParams p;
  const UniformGrid3 xg = UniformGrid3::centered({0, 0, 0}, {4.5, 4.5, 4.5}, {9, 9, 9});
  const UniformGrid3 kg = conjugate_wavenumber_grid(xg, {0, 0, 0});
  const std::size_t center = kg.node_count() / 2;  // odd counts: exact k = 0 node
  REQUIRE(kg.position(center).max_abs() < 1e-12);

  std::array<std::vector<cplx>, 4> amps;
  for (auto& a : amps) a.assign(kg.node_count(), cplx{});
  amps[0][center] = 1.0;
  const DiracState rest = DiracState::make_from_amplitudes(kg, amps, p);
  double rho = 0.0;
  Vec3 J;
  dirac_current_at(rest.sample_at(0.9, {0.3, -1.0, 0.2}), p, rho, J);
  CHECK(rho > 0.0);
  CHECK(J.max_abs() < 1e-15 * rho);

  amps[2][center] = 1.0;  // add the negative-energy partner
  const DiracState pair = DiracState::make_from_amplitudes(kg, amps, p);
  const TimeSampling ts = TimeSampling::make(0.0, 0.1, 128);
  ScalarSeries jx;
  jx.times = ts;
  for (int i = 0; i < ts.n_samples; ++i) {
    dirac_current_at(pair.sample_at(ts.time(i), {0.3, -1.0, 0.2}), p, rho, J);
    jx.values.push_back(J.x);
  }
  const Spectrum sp = spectrum(jx, Window::hann);
  REQUIRE(!sp.peaks.empty());
  const SpectrumPeak* top = &sp.peaks[0];
  for (const SpectrumPeak& pk : sp.peaks)
    if (pk.amplitude > top->amplitude) top = &pk;
  CHECK(top->omega == doctest::Approx(2.0).epsilon(0.01));  // 2 m c^2 / hbar
}

TEST_CASE("dirac synthesis agrees with the brute-force point evaluation") {
  RelativisticParams p;
  const UniformGrid3 xg = UniformGrid3::centered({0, 0, 0}, {17.3, 17.3, 17.3}, {32, 32, 32});
  const UniformGrid3 kg = conjugate_wavenumber_grid(xg, {0, 0, 0.25});
  DiracComponent c0, c1;
  c0.branch = 0;
  c0.k_center = {0, 0, 0.25};
  c0.sigma_k = {0.4, 0.4, 0.4};
  c1.branch = 1;
  c1.k_center = {0, 0, 0.25};
  c1.sigma_k = {0.4, 0.4, 0.4};
  c1.amplitude = {0.6, 0.0};
  const DiracState st = DiracState::make({c0, c1}, p, kg);
  CHECK(st.has_positive());
  CHECK_FALSE(st.has_negative());

  const double t = 1.3;
  const Field<Spinor4> psi = st.synthesize(t, xg);
  for (std::size_t idx : {xg.index(16, 16, 16), xg.index(10, 20, 17), xg.index(25, 12, 14)}) {
    const Spinor4 s = st.sample_at(t, xg.position(idx));
    for (int a = 0; a < 4; ++a) CHECK(std::abs(s[a] - psi[idx][a]) < 1e-12);
  }

  // the spinor current respects rho >= 0 and |J| <= c rho node by node
  SourceFields sf = SourceFields::shaped(xg);
  dirac_current(psi, p, sf.rho, sf.current);
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < sf.rho.size(); ++i) {
    CHECK(sf.rho[i] >= 0.0);
    if (sf.rho[i] > 0.0)
      worst_ratio = std::max(worst_ratio, sf.current[i].norm() / (p.light_speed * sf.rho[i]));
  }
  CHECK(worst_ratio <= 1.0 + 1e-12);

  DiracCurrentSource src(st, xg);
  const CurrentBoundReport cb = current_bound_scan(src, TimeSampling::make(0.0, 0.4, 4));
  CHECK(cb.pass);
  CHECK(cb.max_ratio <= 1.0 + 1e-12);
}

TEST_CASE("support growth stays inside the light cone") {
  KGLab lab;
  const KGState st = lab.make_state({kg_comp(+1, {0, 0, 0.4}, 0.3)}, {0, 0, 0.4});
  KGCurrentSource src(st, lab.xgrid);
  const SpreadingReport sp = subluminal_spreading_check(src, TimeSampling::make(0.0, 0.3, 8));
  CHECK(sp.pass);
  CHECK(sp.max_rate <= sp.light_speed * (1.0 + 1e-9));
}
