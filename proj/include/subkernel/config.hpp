#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "subkernel/bernstein.hpp"
#include "subkernel/kernels.hpp"
#include "subkernel/montecarlo.hpp"
#include "subkernel/scales.hpp"
#include "subkernel/subordinate.hpp"

namespace subkernel {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace cfg {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError("config error at '" + where + "': missing field '" + key + "'");
  return j.at(key);
}

inline double require_positive(const json& j, const std::string& key,
                               const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number())
    throw ConfigError("config error at '" + where + "." + key + "': expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0))
    throw ConfigError("config error at '" + where + "." + key + "': must be positive");
  return x;
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Scale specs and volume profiles
// ---------------------------------------------------------------------------

inline json to_json(const ScaleSpec& s) {
  json j;
  switch (s.kind()) {
    case ScaleSpec::Kind::power:
      j["kind"] = "power";
      j["exponents"] = s.exponents();
      break;
    case ScaleSpec::Kind::piecewise_power:
      j["kind"] = "piecewise_power";
      j["exponents"] = s.exponents();
      break;
    case ScaleSpec::Kind::min_of_two:
      j["kind"] = "min_of_two";
      j["components"] = json::array({to_json(s.components()[0]), to_json(s.components()[1])});
      break;
  }
  j["normalization"] = s.normalization();
  return j;
}

inline ScaleSpec scale_from_json(const json& j, const std::string& where = "scale") {
  const std::string kind = cfg::require(j, "kind", where).get<std::string>();
  const double norm = j.value("normalization", 1.0);
  if (kind == "power") {
    const json& e = cfg::require(j, "exponents", where);
    if (!e.is_array() || e.size() != 1)
      throw ConfigError("config error at '" + where + "': power needs exponents=[beta]");
    return ScaleSpec::power(e[0].get<double>(), norm);
  }
  if (kind == "piecewise_power") {
    const json& e = cfg::require(j, "exponents", where);
    if (!e.is_array() || e.size() != 2)
      throw ConfigError("config error at '" + where +
                        "': piecewise_power needs exponents=[small, large]");
    return ScaleSpec::piecewise_power(e[0].get<double>(), e[1].get<double>(), norm);
  }
  if (kind == "min_of_two") {
    const json& c = cfg::require(j, "components", where);
    if (!c.is_array() || c.size() != 2)
      throw ConfigError("config error at '" + where + "': min_of_two needs two components");
    return ScaleSpec::min_of(scale_from_json(c[0], where + ".components[0]"),
                             scale_from_json(c[1], where + ".components[1]"), norm);
  }
  throw ConfigError("config error at '" + where + "': unknown kind '" + kind + "'");
}

inline json to_json(const LevySpec& levy) {
  return json{{"phi", to_json(levy.phi())}, {"psi", to_json(levy.psi())}};
}

inline LevySpec levy_from_json(const json& j, const std::string& where = "levy") {
  return LevySpec(scale_from_json(cfg::require(j, "phi", where), where + ".phi"),
                  scale_from_json(cfg::require(j, "psi", where), where + ".psi"));
}

inline json to_json(const VolumeProfile& v) {
  json j;
  j["ahlfors_exponent"] = v.ahlfors_exponent();
  if (v.is_piecewise())
    j["piecewise_exponents"] = json::array({v.exponent_zero(), v.exponent_inf()});
  j["constant"] = v.constant();
  return j;
}

inline VolumeProfile volume_from_json(const json& j, const std::string& where = "volume") {
  const double c = j.value("constant", 1.0);
  if (j.contains("piecewise_exponents")) {
    const json& e = j.at("piecewise_exponents");
    if (!e.is_array() || e.size() != 2)
      throw ConfigError("config error at '" + where + "': piecewise_exponents needs 2 values");
    return VolumeProfile::piecewise(e[0].get<double>(), e[1].get<double>(), c);
  }
  return VolumeProfile::ahlfors(
      cfg::require(j, "ahlfors_exponent", where).get<double>(), c);
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct GridSpec {
  double decade_lo = -3.0;
  double decade_hi = 3.0;
  int points_per_decade = 8;

  std::vector<double> radii() const {
    return log_grid(std::pow(10.0, decade_lo), std::pow(10.0, decade_hi), points_per_decade);
  }
};

struct McConfig {
  double epsilon = 1e-4;
  double horizon = 1.0;
  int n_paths = 100000;
  std::vector<double> lambdas{0.5, 1.0, 2.0};
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "both";  // csv | json | both
};

struct ExperimentConfig {
  std::map<std::string, ScaleSpec> scales;
  VolumeProfile volume = VolumeProfile::ahlfors(1.0);
  EnvelopeMode mode = EnvelopeMode::pure_jump;
  std::string phi_c_name;
  std::string phi_j_name;
  EnvelopeConstants constants;
  std::string psi_name;
  TargetKind target = TargetKind::full;
  GridSpec grid;
  quad::Settings tolerances;
  std::uint64_t seed = 20260809ull;
  std::vector<double> bernstein_lambdas;
  McConfig mc;
  OutputConfig output;

  const ScaleSpec& scale(const std::string& name) const {
    auto it = scales.find(name);
    if (it == scales.end())
      throw ConfigError("config error: scale name '" + name + "' does not resolve");
    return it->second;
  }

  HeatKernelEnvelope make_envelope() const {
    if (mode == EnvelopeMode::pure_jump)
      return HeatKernelEnvelope::pure_jump(scale(phi_j_name), volume, constants);
    return HeatKernelEnvelope::diffusion_plus_jump(scale(phi_c_name), scale(phi_j_name),
                                                   volume, constants);
  }
  const ScaleSpec& psi() const { return scale(psi_name); }
  SubordinationProblem make_problem() const {
    return SubordinationProblem(make_envelope(), psi(), tolerances);
  }
};

inline json to_json(const ExperimentConfig& c) {
  json scales = json::object();
  for (const auto& [name, spec] : c.scales) scales[name] = to_json(spec);
  json envelope = json::object();
  envelope["mode"] =
      c.mode == EnvelopeMode::pure_jump ? "pure_jump" : "diffusion_plus_jump";
  if (c.mode == EnvelopeMode::diffusion_plus_jump) envelope["phi_c"] = c.phi_c_name;
  envelope["phi_j"] = c.phi_j_name;
  envelope["constants"] = {{"c1", c.constants.c1},
                           {"c2", c.constants.c2},
                           {"c3", c.constants.c3},
                           {"c4", c.constants.c4}};
  json j;
  j["scales"] = scales;
  j["volume"] = to_json(c.volume);
  j["envelope"] = envelope;
  j["psi"] = c.psi_name;
  j["target"] = to_string(c.target);
  j["grid"] = {{"decades", json::array({c.grid.decade_lo, c.grid.decade_hi})},
               {"points_per_decade", c.grid.points_per_decade}};
  j["tolerances"] = {{"abs", c.tolerances.abs_tol},
                     {"rel", c.tolerances.rel_tol},
                     {"max_subdivisions", c.tolerances.max_subdivisions}};
  j["seed"] = c.seed;
  j["bernstein"] = {{"lambdas", c.bernstein_lambdas}};
  j["mc"] = {{"epsilon", c.mc.epsilon},
             {"horizon", c.mc.horizon},
             {"n_paths", c.mc.n_paths},
             {"lambdas", c.mc.lambdas}};
  j["output"] = {{"dir", c.output.dir}, {"format", c.output.format}};
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  const json& scales = cfg::require(j, "scales", "config");
  if (!scales.is_object() || scales.empty())
    throw ConfigError("config error at 'scales': expected a non-empty object");
  for (auto it = scales.begin(); it != scales.end(); ++it)
    c.scales.emplace(it.key(), scale_from_json(it.value(), "scales." + it.key()));
  c.volume = volume_from_json(cfg::require(j, "volume", "config"));

  const json& env = cfg::require(j, "envelope", "config");
  const std::string mode = cfg::require(env, "mode", "envelope").get<std::string>();
  if (mode == "pure_jump")
    c.mode = EnvelopeMode::pure_jump;
  else if (mode == "diffusion_plus_jump")
    c.mode = EnvelopeMode::diffusion_plus_jump;
  else
    throw ConfigError("config error at 'envelope.mode': unknown mode '" + mode + "'");
  c.phi_j_name = cfg::require(env, "phi_j", "envelope").get<std::string>();
  if (c.mode == EnvelopeMode::diffusion_plus_jump)
    c.phi_c_name = cfg::require(env, "phi_c", "envelope").get<std::string>();
  if (env.contains("constants")) {
    const json& k = env.at("constants");
    c.constants.c1 = k.value("c1", 1.0);
    c.constants.c2 = k.value("c2", 1.0);
    c.constants.c3 = k.value("c3", 1.0);
    c.constants.c4 = k.value("c4", 1.0);
  }
  c.psi_name = cfg::require(j, "psi", "config").get<std::string>();

  const std::string target = j.value("target", std::string("full"));
  if (target == "full")
    c.target = TargetKind::full;
  else if (target == "jump")
    c.target = TargetKind::jump;
  else if (target == "diffusion")
    c.target = TargetKind::diffusion;
  else
    throw ConfigError("config error at 'target': unknown target '" + target + "'");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.contains("decades")) {
      const json& d = g.at("decades");
      if (!d.is_array() || d.size() != 2)
        throw ConfigError("config error at 'grid.decades': expected [lo, hi]");
      c.grid.decade_lo = d[0].get<double>();
      c.grid.decade_hi = d[1].get<double>();
      if (!(c.grid.decade_hi > c.grid.decade_lo))
        throw ConfigError("config error at 'grid.decades': need lo < hi");
    }
    c.grid.points_per_decade = g.value("points_per_decade", c.grid.points_per_decade);
    if (c.grid.points_per_decade < 1)
      throw ConfigError("config error at 'grid.points_per_decade': must be >= 1");
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    c.tolerances.abs_tol = t.value("abs", c.tolerances.abs_tol);
    c.tolerances.rel_tol = t.value("rel", c.tolerances.rel_tol);
    c.tolerances.max_subdivisions = t.value("max_subdivisions", c.tolerances.max_subdivisions);
    if (!(c.tolerances.abs_tol > 0.0) || !(c.tolerances.rel_tol > 0.0))
      throw ConfigError("config error at 'tolerances': tolerances must be positive");
  }
  c.seed = j.value("seed", c.seed);
  if (j.contains("bernstein"))
    c.bernstein_lambdas =
        j.at("bernstein").value("lambdas", std::vector<double>{});
  if (j.contains("mc")) {
    const json& m = j.at("mc");
    c.mc.epsilon = m.value("epsilon", c.mc.epsilon);
    c.mc.horizon = m.value("horizon", c.mc.horizon);
    c.mc.n_paths = m.value("n_paths", c.mc.n_paths);
    c.mc.lambdas = m.value("lambdas", c.mc.lambdas);
    if (!(c.mc.epsilon > 0.0))
      throw ConfigError("config error at 'mc.epsilon': must be positive");
    if (c.mc.n_paths < 2) throw ConfigError("config error at 'mc.n_paths': must be >= 2");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    c.output.dir = o.value("dir", c.output.dir);
    c.output.format = o.value("format", c.output.format);
    if (c.output.format != "csv" && c.output.format != "json" && c.output.format != "both")
      throw ConfigError("config error at 'output.format': expected csv, json or both");
  }

  // Resolve references eagerly so bad names fail at load time.
  (void)c.psi();
  (void)c.scale(c.phi_j_name);
  if (c.mode == EnvelopeMode::diffusion_plus_jump) (void)c.scale(c.phi_c_name);
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config error in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json to_json(const IntegrabilityCertificate& c) {
  return json{{"verdict", c.verdict == Finiteness::finite ? "finite" : "infinite"},
              {"boundary", c.boundary},
              {"rho_zero", c.rho_zero},
              {"rho_inf", c.rho_inf},
              {"partial_small_t_from_1e-8", c.partial_small_t},
              {"partial_small_t_from_1e-4", c.partial_small_t_narrow},
              {"partial_large_t_to_1e8", c.partial_large_t},
              {"partial_large_t_to_1e4", c.partial_large_t_narrow},
              {"detail", c.detail}};
}

inline json to_json(const CriterionCertificate& c) {
  return json{{"verdict", c.verdict == Finiteness::finite ? "finite" : "infinite"},
              {"boundary", c.boundary},
              {"phi_exponent_zero", c.phi_exponent_zero},
              {"psi_exponent_zero", c.psi_exponent_zero},
              {"partial_integral_from_1e-8", c.partial_integral},
              {"partial_integral_from_1e-4", c.partial_integral_narrow},
              {"detail", c.detail}};
}

inline json to_json(const ComparabilityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"r", row.r},
                        {"J_lower", row.j_lower},
                        {"J_upper", row.j_upper},
                        {"target", row.target},
                        {"ratio_lo", row.ratio_lo},
                        {"ratio_hi", row.ratio_hi}});
  return json{
      {"target", to_string(r.target)},
      {"verdict", r.verdict == Verdict::comparable ? "comparable" : "not_comparable"},
      {"constant", r.constant},
      {"ratio_sup", r.ratio_sup},
      {"ratio_inf", r.ratio_inf},
      {"diverging_regime", r.diverging_regime},
      {"slopes",
       {{"j_upper", {{"small_r", r.upper_slopes.small_r}, {"large_r", r.upper_slopes.large_r}}},
        {"ratio_hi",
         {{"small_r", r.ratio_hi_slopes.small_r}, {"large_r", r.ratio_hi_slopes.large_r}}},
        {"ratio_lo",
         {{"small_r", r.ratio_lo_slopes.small_r}, {"large_r", r.ratio_lo_slopes.large_r}}}}},
      {"rows", rows}};
}

inline std::string comparability_csv(const ComparabilityReport& r) {
  std::ostringstream out;
  out << "r,J_lower,J_upper,target,ratio_lo,ratio_hi\n";
  for (const auto& row : r.rows)
    out << fmt_double(row.r) << ',' << fmt_double(row.j_lower) << ','
        << fmt_double(row.j_upper) << ',' << fmt_double(row.target) << ','
        << fmt_double(row.ratio_lo) << ',' << fmt_double(row.ratio_hi) << '\n';
  return out.str();
}

inline std::string comparability_ratio_dat(const ComparabilityReport& r) {
  std::ostringstream out;
  out << "# r ratio_hi\n";
  for (const auto& row : r.rows)
    out << fmt_double(row.r) << ' ' << fmt_double(row.ratio_hi) << '\n';
  return out.str();
}

struct BernsteinTableRow {
  double lambda;
  double value;
  double error_bound;
};

inline json to_json(const std::vector<BernsteinTableRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(
        json{{"lambda", r.lambda}, {"phibar", r.value}, {"error_bound", r.error_bound}});
  return json{{"rows", arr}};
}

inline std::string bernstein_csv(const std::vector<BernsteinTableRow>& rows) {
  std::ostringstream out;
  out << "lambda,phibar,error_bound\n";
  for (const auto& r : rows)
    out << fmt_double(r.lambda) << ',' << fmt_double(r.value) << ','
        << fmt_double(r.error_bound) << '\n';
  return out.str();
}

inline json to_json(const LaplaceValidationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"lambda", row.lambda},
                        {"empirical", row.empirical},
                        {"expected", row.expected},
                        {"std_error", row.std_error},
                        {"z_score", row.z_score},
                        {"bias_bound", row.bias_bound},
                        {"pass", row.pass}});
  return json{{"horizon", r.horizon},
              {"epsilon", r.epsilon},
              {"n_paths", r.n_paths},
              {"seed", r.seed},
              {"jump_rate", r.jump_rate},
              {"compensator_mean", r.compensator_mean},
              {"all_pass", r.all_pass},
              {"max_abs_z", r.max_abs_z},
              {"rows", rows}};
}

inline json to_json(const EquivalenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr;
    jr["name"] = row.name;
    jr["criterion"] = to_json(row.criterion);
    jr["integrability"] = to_json(row.integrability);
    jr["kernel_comparable"] = row.kernel_comparable;
    if (std::isfinite(row.comparability_constant))
      jr["comparability_constant"] = row.comparability_constant;
    jr["coincide"] = row.coincide;
    rows.push_back(jr);
  }
  return json{{"all_coincide", r.all_coincide}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Atomic file output
// ---------------------------------------------------------------------------

/// Writes via a temp file in the same directory plus rename, so partially
/// written outputs are never observable under the final name.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace subkernel
