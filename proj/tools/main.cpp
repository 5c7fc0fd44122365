// Command-line front end: config-driven runs of the library's computations
// with CSV/JSON/plot-data outputs.
//
// Exit codes: 0 success, 1 usage or config error, 2 mathematical divergence
// (non-integrable Levy data), 3 numerical failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subkernel/config.hpp"
#include "subkernel/presets.hpp"

namespace {

using namespace subkernel;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::string format;
  std::string grid_decades;
  int points_per_decade = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = 0.0;
  bool tol_set = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "Path to a JSON experiment config");
  cmd->add_option("--preset", opt.preset_name, "Name of a built-in preset");
  cmd->add_option("--out", opt.out_dir, "Output directory");
  cmd->add_option("--format", opt.format, "Output format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--grid-decades", opt.grid_decades, "Radius grid as A:B decades, e.g. -3:3");
  cmd->add_option("--points-per-decade", opt.points_per_decade, "Grid density per decade");
  cmd->add_option("--seed", opt.seed, "RNG seed")->each([&](const std::string&) {
    opt.seed_set = true;
  });
  cmd->add_option("--tol", opt.tol, "Relative quadrature tolerance")
      ->each([&](const std::string&) { opt.tol_set = true; });
}

ExperimentConfig resolve_config(const CommonOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = load_config_file(opt.config_path);
  } else if (!opt.preset_name.empty()) {
    cfg = find_preset(opt.preset_name).config;
  } else {
    throw ConfigError("usage error: provide --config PATH or --preset NAME");
  }
  if (!opt.out_dir.empty()) cfg.output.dir = opt.out_dir;
  if (!opt.format.empty()) cfg.output.format = opt.format;
  if (!opt.grid_decades.empty()) {
    const auto pos = opt.grid_decades.find(':', 1);
    if (pos == std::string::npos)
      throw ConfigError("usage error: --grid-decades expects A:B");
    try {
      cfg.grid.decade_lo = std::stod(opt.grid_decades.substr(0, pos));
      cfg.grid.decade_hi = std::stod(opt.grid_decades.substr(pos + 1));
    } catch (const std::exception&) {
      throw ConfigError("usage error: --grid-decades expects numeric A:B");
    }
    if (!(cfg.grid.decade_hi > cfg.grid.decade_lo))
      throw ConfigError("usage error: --grid-decades needs A < B");
  }
  if (opt.points_per_decade > 0) cfg.grid.points_per_decade = opt.points_per_decade;
  if (opt.seed_set) cfg.seed = opt.seed;
  if (opt.tol_set) {
    if (!(opt.tol > 0.0)) throw ConfigError("usage error: --tol must be positive");
    cfg.tolerances.rel_tol = opt.tol;
  }
  return cfg;
}

void write_pair(const ExperimentConfig& cfg, const std::string& base, const json& j,
                const std::string& csv) {
  const fs::path dir(cfg.output.dir);
  if (cfg.output.format != "csv") {
    write_file_atomic(dir / (base + ".json"), j.dump(2) + "\n");
    std::cout << "wrote " << (dir / (base + ".json")).string() << "\n";
  }
  if (cfg.output.format != "json" && !csv.empty()) {
    write_file_atomic(dir / (base + ".csv"), csv);
    std::cout << "wrote " << (dir / (base + ".csv")).string() << "\n";
  }
}

void run_bernstein(const ExperimentConfig& cfg) {
  if (cfg.bernstein_lambdas.empty())
    throw ConfigError("usage error: bernstein needs a non-empty lambda grid "
                      "(config field bernstein.lambdas)");
  const HeatKernelEnvelope env = cfg.make_envelope();
  const BernsteinFunction phibar(LevySpec(env.phi(), cfg.psi()), cfg.tolerances);
  std::vector<BernsteinTableRow> rows;
  for (double lambda : cfg.bernstein_lambdas) {
    const double v = phibar.eval(lambda);
    rows.push_back({lambda, v,
                    std::max(cfg.tolerances.abs_tol, cfg.tolerances.rel_tol * v)});
  }
  write_pair(cfg, "bernstein", to_json(rows), bernstein_csv(rows));
}

void run_jump_kernel(const ExperimentConfig& cfg) {
  const SubordinationProblem problem = cfg.make_problem();
  const ComparabilityReport report =
      problem.comparability_verify(cfg.grid.radii(), cfg.target);
  write_pair(cfg, "jump_kernel", to_json(report), comparability_csv(report));
  write_file_atomic(fs::path(cfg.output.dir) / "jump_kernel_ratio.dat",
                    comparability_ratio_dat(report));
  std::cout << "wrote " << (fs::path(cfg.output.dir) / "jump_kernel_ratio.dat").string()
            << "\n";
  std::cout << "verdict: "
            << (report.verdict == Verdict::comparable ? "comparable" : "not_comparable");
  if (report.verdict == Verdict::comparable)
    std::cout << " (C = " << fmt_double(report.constant) << ")";
  else
    std::cout << " (diverging regime: " << report.diverging_regime << ")";
  std::cout << "\n";
}

void run_criterion(const ExperimentConfig& cfg) {
  const HeatKernelEnvelope env = cfg.make_envelope();
  const CriterionCertificate cert = criterion_check(env.phi(), cfg.psi(), cfg.tolerances);
  write_pair(cfg, "criterion", to_json(cert), "");
  if (cert.verdict == Finiteness::finite)
    std::cout << "finite\n";
  else if (cert.boundary)
    std::cout << "infinite (boundary)\n";
  else
    std::cout << "infinite\n";
}

void run_mc(const ExperimentConfig& cfg) {
  const HeatKernelEnvelope env = cfg.make_envelope();
  const SubordinatorSampler sampler(LevySpec(env.phi(), cfg.psi()), cfg.mc.epsilon, cfg.seed,
                                    cfg.tolerances);
  const LaplaceValidationReport report =
      sampler.validate_laplace(cfg.mc.horizon, cfg.mc.lambdas, cfg.mc.n_paths);
  write_pair(cfg, "mc_validation", to_json(report), "");
  if (cfg.output.format != "json") {
    const std::vector<double> samples = sampler.sample_paths(cfg.mc.horizon, cfg.mc.n_paths);
    std::string csv = "sample\n";
    for (double s : samples) {
      csv += fmt_double(s);
      csv += '\n';
    }
    write_file_atomic(fs::path(cfg.output.dir) / "mc_samples.csv", csv);
    std::cout << "wrote " << (fs::path(cfg.output.dir) / "mc_samples.csv").string() << "\n";
  }
  std::cout << (report.all_pass ? "pass" : "fail")
            << " (max |z| = " << fmt_double(report.max_abs_z) << ")\n";
}

void run_gallery(const CommonOptions& opt) {
  const std::string base_dir = opt.out_dir.empty() ? "out/gallery" : opt.out_dir;
  for (const Preset& preset : builtin_presets()) {
    CommonOptions local = opt;
    local.preset_name = preset.name;
    local.config_path.clear();
    local.out_dir = (fs::path(base_dir) / preset.name).string();
    // Round-trip through the ordinary serialization so gallery runs take the
    // same code path as user configs.
    ExperimentConfig cfg = config_from_json(to_json(resolve_config(local)));
    write_file_atomic(fs::path(cfg.output.dir) / "config.json", to_json(cfg).dump(2) + "\n");
    std::cout << "[" << preset.name << "] " << preset.description << "\n";
    run_criterion(cfg);
    run_jump_kernel(cfg);
    run_bernstein(cfg);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subordinate jump-kernel estimates: scale functions, Bernstein "
               "functions, model heat-kernel envelopes and comparability checks"};
  app.require_subcommand(1);

  CommonOptions bernstein_opt, jump_opt, criterion_opt, mc_opt, gallery_opt;
  CLI::App* cmd_bernstein =
      app.add_subcommand("bernstein", "Tabulate the Bernstein function over a lambda grid");
  add_common_flags(cmd_bernstein, bernstein_opt);
  CLI::App* cmd_jump = app.add_subcommand(
      "jump-kernel", "Subordinate jump-kernel bounds and comparability verdict");
  add_common_flags(cmd_jump, jump_opt);
  CLI::App* cmd_criterion =
      app.add_subcommand("criterion", "Scale criterion finiteness check with certificate");
  add_common_flags(cmd_criterion, criterion_opt);
  CLI::App* cmd_mc = app.add_subcommand(
      "mc", "Monte Carlo Laplace-transform validation of the subordinator sampler");
  add_common_flags(cmd_mc, mc_opt);
  CLI::App* cmd_gallery =
      app.add_subcommand("gallery", "Run every built-in preset into an output directory");
  add_common_flags(cmd_gallery, gallery_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_bernstein->parsed()) run_bernstein(resolve_config(bernstein_opt));
    if (cmd_jump->parsed()) run_jump_kernel(resolve_config(jump_opt));
    if (cmd_criterion->parsed()) run_criterion(resolve_config(criterion_opt));
    if (cmd_mc->parsed()) run_mc(resolve_config(mc_opt));
    if (cmd_gallery->parsed()) run_gallery(gallery_opt);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << to_json(e.certificate()).dump(2) << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
