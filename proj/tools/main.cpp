#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qrad/errors.hpp"
#include "qrad/scenario.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_physics = 1;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct CommonOpts {
  std::string scenario;
  std::string out = ".";
  int max_order = 0;
  std::string oracle;  // "", "on", "off"
  int threads = 0;
};

void attach_common(CLI::App* cmd, CommonOpts& o, bool needs_out) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
  if (needs_out) cmd->add_option("--out", o.out, "Output directory (default: .)");
  cmd->add_option("--max-order", o.max_order, "Override the multipole truncation order");
  cmd->add_option("--oracle", o.oracle, "Force the retarded oracle on or off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threads", o.threads, "Worker thread count (0 = auto)");
}

int run_stages(const CommonOpts& o, unsigned stages) {
  const qrad::Scenario sc = qrad::Scenario::from_file(o.scenario);
  qrad::RunOptions opts;
  opts.out_dir = o.out;
  opts.stages = stages;
  opts.max_order_override = o.max_order;
  if (o.oracle == "on") opts.oracle_override = true;
  if (o.oracle == "off") opts.oracle_override = false;
  opts.threads = o.threads;
  const qrad::RunResult res = qrad::run_scenario(sc, opts);
  if (stages == qrad::stage_validate) {
    std::printf("[PASS] %s: scenario valid, state constructible\n", sc.id.c_str());
    return exit_pass;
  }
  for (const std::string& name : res.failed_checks)
    std::printf("[FAIL] %s\n", name.c_str());
  if (!res.certificate_path.empty())
    std::printf("certificate: %s\n", res.certificate_path.string().c_str());
  std::printf("%s %s\n", res.pass ? "[PASS]" : "[FAIL]", sc.id.c_str());
  return res.pass ? exit_pass : exit_physics;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrad: probability-current radiation laboratory"};
  app.require_subcommand(1);

  CommonOpts o;
  struct Cmd {
    const char* name;
    const char* help;
    unsigned stages;
    bool needs_out;
  };
  const Cmd cmds[] = {
      {"validate", "Parse a scenario and construct its state (no physics)", qrad::stage_validate,
       false},
      {"moments", "Write the multipole moment time series", qrad::stage_moments, true},
      {"certify", "Run the non-radiation degree certification",
       qrad::stage_moments | qrad::stage_certify, true},
      {"radiate", "Evaluate far-field power from the truncated multipole sum",
       qrad::stage_radiate, true},
      {"oracle", "Brute-force retarded-potential cross-check", qrad::stage_oracle, true},
      {"spectrum", "Spectral analysis of the dipole moment and density probes",
       qrad::stage_spectrum | qrad::stage_probe, true},
      {"run", "Full pipeline: all stages plus the verdict certificate", qrad::stage_all, true},
  };
  for (const Cmd& c : cmds) attach_common(app.add_subcommand(c.name, c.help), o, c.needs_out);

  CLI::App* cmp = app.add_subcommand("compare", "Diff two run certificates numerically");
  std::string cert_a, cert_b;
  double cmp_tol = 1e-9;
  cmp->add_option("a", cert_a, "First certificate.json")->required();
  cmp->add_option("b", cert_b, "Second certificate.json")->required();
  cmp->add_option("--tol", cmp_tol, "Relative tolerance for numeric leaves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_pass : exit_config;
  }

  try {
    if (cmp->parsed()) {
      const qrad::DiffReport rep = qrad::compare_certificates(cert_a, cert_b, cmp_tol);
      for (const qrad::DiffEntry& d : rep.entries)
        std::printf("[DIFF] %s: %s\n", d.path.c_str(), d.detail.c_str());
      std::printf("%s compare\n", rep.pass ? "[PASS]" : "[FAIL]");
      return rep.pass ? exit_pass : exit_physics;
    }
    for (const Cmd& c : cmds)
      if (app.get_subcommand(c.name)->parsed()) return run_stages(o, c.stages);
    return exit_config;
  } catch (const qrad::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return exit_config;
  } catch (const qrad::NumericalRejection& e) {
    std::fprintf(stderr, "numerical rejection: %s\n", e.what());
    return exit_numerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_config;
  }
}
