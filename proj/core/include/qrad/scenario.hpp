#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qrad/ensemble.hpp"
#include "qrad/grid.hpp"
#include "qrad/relativistic.hpp"
#include "qrad/schrodinger.hpp"
#include "qrad/source.hpp"
#include "qrad/validation.hpp"

namespace qrad {

/// Tolerances a scenario may override; all strictly positive.
struct ScenarioTolerances {
  double certify = 1e-6;        ///< degree / derivative certification
  double charge_rel = 1e-8;     ///< total-charge drift, relative to |q|
  double continuity_rel = 1e-6; ///< continuity residual vs max |d rho/dt|
  double larmor_band = 0.05;    ///< allowed deviation of P / P_larmor from 1
  double oracle_rel = 0.03;     ///< multipole vs oracle field comparison
  double zitter_band_ratio = 1e-4;  ///< low-band / high-band power bound
};

/// Far-field sphere radiated-power stage.  `expect`:
///   "report"  compute and record only;
///   "zero"    mean power must stay below the certification-implied floor,
///             and (with the oracle enabled) the exact flux must drop by at
///             least 3x from R0 to 2 R0;
///   "larmor"  mean power over larmor_power(F/m) must sit within the band.
struct RadiationSpec {
  bool enabled = false;
  double radius_over_extent = 100.0;
  int n_theta = 12;
  int n_phi = 24;
  std::string expect = "report";
};

/// Brute-force retarded-field stage: a separate (usually coarser) history
/// grid, a radius ladder in units of the source extent, and optionally a
/// field-level comparison against the multipole pipeline.
struct OracleSpec {
  bool enabled = false;
  Vec3 grid_center;
  Vec3 grid_half_extent;
  std::array<int, 3> grid_counts{24, 24, 24};
  TimeSampling times{0.0, 0.0, 0};
  std::vector<double> radii_over_extent;
  double anchor_time = 0.0;
  int n_theta = 12;
  int n_phi = 24;
  double min_b_exponent = 0.0;                ///< 0 disables the bound
  std::array<double, 2> b_exponent_range{0.0, 0.0};  ///< lo<hi enables range
  double compare_radius_over_extent = 0.0;    ///< >0 enables multipole diff
};

/// Pointwise density probe: records rho at a fixed position over a window and
/// checks the spectral peak location (the density may oscillate even when the
/// moments certify as polynomials).
struct DensityProbeSpec {
  bool enabled = false;
  Vec3 position;
  TimeSampling times{0.0, 0.0, 0};
  double expected_omega = 0.0;  ///< 0: derive from a two-component state
};

/// Conservation stage: continuity residual on a dense probe patch (4th-order
/// differences against the meshless sampler), charge constancy on the main
/// grid, the |J| <= c rho bound for spinor sources, and subluminal support
/// growth.
struct ConservationSpec {
  bool enabled = false;
  Vec3 probe_center;
  Vec3 probe_half_extent{1.0, 1.0, 1.0};
  std::array<int, 3> probe_counts{4, 4, 4};
  std::vector<double> probe_times;
  double space_step = 0.05;
  double time_step = 0.005;
};

/// I1 spectral stage.  `check`: "none" (emit the spectrum only), "gap" (all
/// non-DC peaks at or beyond 2 m c^2 / hbar and the band-power ratio bound),
/// "quiet" (no non-DC peak above the leakage floor).
struct SpectrumSpec {
  bool enabled = false;
  std::string check = "none";
  double peak_floor_rel = 1e-8;
};

/// One member of a statistical mixture; members may carry their own mass,
/// charge and hbar.
struct MixedMemberSpec {
  double weight = 1.0;
  double mass = 1.0;
  double charge = 1.0;
  double hbar = 1.0;
  std::vector<GaussianComponent> components;
};

/// Fully parsed scenario file (schema documented in docs/scenario_schema.md).
struct Scenario {
  int schema_version = 1;
  std::string id;
  std::string model;  ///< schrodinger | schrodinger_forced | mixed_state |
                      ///< newtonian | kg_plus | kg_minus | kg_mixed | dirac

  double mass = 1.0;
  double charge = 1.0;
  double hbar = 1.0;
  double light_speed = 1.0;
  double band_delta = 0.2;
  double n_sigma = 6.0;

  std::vector<GaussianComponent> components;   // schrodinger models
  Vec3 force;                                  // schrodinger_forced
  std::vector<MixedMemberSpec> members;        // mixed_state
  std::vector<NewtonianBlob> blobs;            // newtonian
  std::vector<KGComponent> kg_components;      // kg_*
  std::vector<DiracComponent> dirac_components;  // dirac
  Vec3 k_grid_center;                          // kg_* / dirac wavenumber grid

  Vec3 grid_center;
  Vec3 grid_half_extent;
  std::array<int, 3> grid_counts{48, 48, 48};
  std::size_t grid_node_budget = 0;    ///< 0 keeps UniformGrid3::default_node_budget
  TimeSampling times{0.0, 0.0, 0};
  int max_order = 4;
  std::vector<Vec3> directions;        ///< certification directions (>= 1)
  std::string expect_certify = "pass"; ///< "pass" | "fail" | "skip"

  ScenarioTolerances tol;
  RadiationSpec radiation;
  OracleSpec oracle;
  DensityProbeSpec density_probe;
  ConservationSpec conservation;
  SpectrumSpec spectrum;

  static Scenario from_file(const std::filesystem::path& path);
  static Scenario from_json_text(const std::string& text);
  std::string to_json_text() const;  ///< round-trips through from_json_text
};

/// Instantiated scenario: the grid-level source plus meshless point access.
struct ScenarioRuntime {
  std::unique_ptr<CurrentSource> source;
  PointSampler sampler;                         ///< closed-form / brute-force
  std::function<double(const Vec3&, double)> rho_at;
  bool supports_continuity = true;  ///< false for spinor sources (|J| bound instead)
  double derived_beat_omega = 0.0;  ///< two-component density beat, 0 if n/a
};

ScenarioRuntime build_runtime(const Scenario& sc);

/// Pipeline stage selection (CLI subcommands map onto these bits).
enum RunStage : unsigned {
  stage_validate = 1u << 0,
  stage_moments = 1u << 1,
  stage_certify = 1u << 2,
  stage_radiate = 1u << 3,
  stage_oracle = 1u << 4,
  stage_spectrum = 1u << 5,
  stage_conservation = 1u << 6,
  stage_probe = 1u << 7,
  stage_all = (1u << 8) - 1,
};

struct RunOptions {
  std::filesystem::path out_dir;
  unsigned stages = stage_all;
  int max_order_override = 0;          ///< 0: use the scenario's
  std::optional<bool> oracle_override; ///< force the oracle stage on/off
  int threads = 0;                     ///< 0: auto
};

struct RunResult {
  bool pass = true;
  std::vector<std::string> failed_checks;
  std::filesystem::path certificate_path;  ///< empty when no stage writes one
};

/// Execute the selected stages, write CSV artifacts and the certificate into
/// out_dir, and return the aggregate verdict.  Deterministic: reruns produce
/// byte-identical files.
RunResult run_scenario(const Scenario& sc, const RunOptions& opts);

/// Field-wise certificate comparison (regression / refinement harness).
struct DiffEntry {
  std::string path;
  std::string detail;
  double rel = 0.0;
};

struct DiffReport {
  std::vector<DiffEntry> entries;  ///< fields exceeding the tolerance
  bool pass = true;
};

/// Numeric leaves compare relatively at `tol` after an absolute `floor`
/// (values with |a|,|b| <= floor count as equal); bools and strings must
/// match exactly.  Certificates from different scenario ids are rejected.
DiffReport compare_certificates(const std::filesystem::path& a, const std::filesystem::path& b,
                                double tol, double floor = 1e-12);

}  // namespace qrad
