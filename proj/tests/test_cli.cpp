#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "subkernel/config.hpp"
#include "subkernel/presets.hpp"

using namespace subkernel;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout
};

RunResult run_cli(const std::string& args, const fs::path& workdir) {
  const fs::path out_file = workdir / "stdout.txt";
  const std::string cmd = "cd " + workdir.string() + " && " + SUBKERNEL_CLI_PATH + " " +
                          args + " > " + out_file.string() + " 2> " +
                          (workdir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file);
  r.output.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("subkernel_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_config(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
}

json boundary_config() {
  ExperimentConfig c;
  c.scales.emplace("phi_j", ScaleSpec::power(1.5));
  c.scales.emplace("psi", ScaleSpec::power(1.5));
  c.volume = VolumeProfile::ahlfors(1.0);
  c.mode = EnvelopeMode::pure_jump;
  c.phi_j_name = "phi_j";
  c.psi_name = "psi";
  return to_json(c);
}

}  // namespace

TEST_CASE("usage errors exit with code 1", "[cli]") {
  const fs::path dir = fresh_dir("usage");
  CHECK(run_cli("", dir).exit_code == 1);
  CHECK(run_cli("frobnicate", dir).exit_code == 1);
  CHECK(run_cli("criterion", dir).exit_code == 1);  // neither --config nor --preset
  CHECK(run_cli("criterion --config missing.json", dir).exit_code == 1);
  CHECK(run_cli("criterion --preset no-such-preset", dir).exit_code == 1);
  CHECK(run_cli("jump-kernel --preset stable-rd --grid-decades 3", dir).exit_code == 1);
}

TEST_CASE("help exits cleanly", "[cli]") {
  const fs::path dir = fresh_dir("help");
  const auto r = run_cli("--help", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("jump-kernel") != std::string::npos);
}

TEST_CASE("criterion verdict lines", "[cli]") {
  const fs::path dir = fresh_dir("criterion");
  write_config(dir / "boundary.json", boundary_config());
  const auto r = run_cli("criterion --config boundary.json --out o", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("infinite (boundary)") != std::string::npos);
  const json cert = json::parse(slurp(dir / "o" / "criterion.json"));
  CHECK(cert.at("verdict") == "infinite");
  CHECK(cert.at("boundary") == true);

  const auto fine = run_cli("criterion --preset example-3-12 --out o2", dir);
  CHECK(fine.exit_code == 0);
  CHECK(fine.output.find("\nfinite\n") != std::string::npos);
  CHECK(fine.output.find("infinite") == std::string::npos);
}

TEST_CASE("divergent spec exits with code 2 and prints the certificate", "[cli]") {
  const fs::path dir = fresh_dir("divergent");
  write_config(dir / "boundary.json", boundary_config());
  const auto r = run_cli("jump-kernel --config boundary.json --out o", dir);
  CHECK(r.exit_code == 2);
  const json cert = json::parse(r.output);
  CHECK(cert.at("verdict") == "infinite");
  CHECK(cert.at("boundary") == true);
}

TEST_CASE("jump-kernel run produces the documented outputs", "[cli]") {
  const fs::path dir = fresh_dir("jump");
  const std::string args =
      "jump-kernel --preset example-3-12-vs-diffusion --points-per-decade 3 --out o";
  const auto r = run_cli(args, dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("not_comparable") != std::string::npos);

  const json rep = json::parse(slurp(dir / "o" / "jump_kernel.json"));
  CHECK(rep.at("verdict") == "not_comparable");
  CHECK(rep.at("diverging_regime") == "large_r");

  const std::string csv = slurp(dir / "o" / "jump_kernel.csv");
  CHECK(csv.rfind("r,J_lower,J_upper,target,ratio_lo,ratio_hi\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);

  const std::string dat = slurp(dir / "o" / "jump_kernel_ratio.dat");
  CHECK(dat.rfind("# r ratio_hi\n", 0) == 0);

  // Determinism: a second run reproduces every byte.
  const fs::path dir2 = fresh_dir("jump2");
  const auto r2 = run_cli(args, dir2);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(dir2 / "o" / "jump_kernel.json") == slurp(dir / "o" / "jump_kernel.json"));
  CHECK(slurp(dir2 / "o" / "jump_kernel.csv") == slurp(dir / "o" / "jump_kernel.csv"));
}

TEST_CASE("jump-kernel comparable preset", "[cli]") {
  const fs::path dir = fresh_dir("jump_ok");
  const auto r = run_cli(
      "jump-kernel --preset gasket-diffjump --points-per-decade 2 --out o", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verdict: comparable") != std::string::npos);
}

TEST_CASE("bernstein table", "[cli]") {
  const fs::path dir = fresh_dir("bernstein");
  const auto r = run_cli("bernstein --preset stable-rd --out o", dir);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "o" / "bernstein.csv");
  CHECK(csv.rfind("lambda,phibar,error_bound\n", 0) == 0);

  // Monotone value column, and the lambda = 1 row equals 2 sqrt(pi).
  double prev = 0.0;
  bool found_unit = false;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double lambda = std::stod(line.substr(0, c1));
    const double value = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(value >= prev);
    prev = value;
    if (lambda == 1.0) {
      found_unit = true;
      CHECK(value == Catch::Approx(3.5449077018110318).epsilon(1e-8));
    }
  }
  CHECK(found_unit);

  // An empty lambda grid is a usage error.
  json cfg = to_json(find_preset("stable-rd").config);
  cfg["bernstein"]["lambdas"] = json::array();
  write_config(dir / "empty.json", cfg);
  CHECK(run_cli("bernstein --config empty.json --out o2", dir).exit_code == 1);
}

TEST_CASE("mc validation is reproducible under a fixed seed", "[cli]") {
  const fs::path dir = fresh_dir("mc");
  json cfg = to_json(find_preset("stable-rd").config);
  cfg["mc"]["n_paths"] = 2000;
  cfg["mc"]["lambdas"] = json::array({0.0, 0.5, 1.0});
  write_config(dir / "mc.json", cfg);

  const std::string args = "mc --config mc.json --seed 424242 --out o";
  CHECK(run_cli(args, dir).exit_code == 0);
  const std::string first = slurp(dir / "o" / "mc_validation.json");
  const std::string first_samples = slurp(dir / "o" / "mc_samples.csv");

  const fs::path dir2 = fresh_dir("mc2");
  write_config(dir2 / "mc.json", cfg);
  CHECK(run_cli(args, dir2).exit_code == 0);
  CHECK(slurp(dir2 / "o" / "mc_validation.json") == first);
  CHECK(slurp(dir2 / "o" / "mc_samples.csv") == first_samples);

  // A different seed changes the sample bytes.
  const fs::path dir3 = fresh_dir("mc3");
  write_config(dir3 / "mc.json", cfg);
  CHECK(run_cli("mc --config mc.json --seed 7 --out o", dir3).exit_code == 0);
  CHECK(slurp(dir3 / "o" / "mc_samples.csv") != first_samples);

  const json rep = json::parse(first);
  CHECK(rep.at("all_pass") == true);
  CHECK(rep.at("seed") == 424242);
  // The lambda = 0 row is exact on both sides.
  CHECK(rep.at("rows")[0].at("lambda") == 0.0);
  CHECK(rep.at("rows")[0].at("empirical") == 1.0);
  CHECK(rep.at("rows")[0].at("expected") == 1.0);
  CHECK(rep.at("rows")[0].at("z_score") == 0.0);
}

TEST_CASE("gallery runs every preset through the ordinary pipeline", "[cli]") {
  const fs::path dir = fresh_dir("gallery");
  const auto r = run_cli("gallery --points-per-decade 2 --out g", dir);
  CHECK(r.exit_code == 0);

  int count = 0;
  for (const auto& preset : builtin_presets()) {
    const fs::path sub = dir / "g" / preset.name;
    INFO(preset.name);
    CHECK(fs::exists(sub / "config.json"));
    CHECK(fs::exists(sub / "criterion.json"));
    CHECK(fs::exists(sub / "jump_kernel.json"));
    CHECK(fs::exists(sub / "jump_kernel.csv"));
    CHECK(fs::exists(sub / "bernstein.csv"));
    ++count;
  }
  CHECK(count >= 6);

  const json carpet = json::parse(slurp(dir / "g" / "carpet-tiling" / "config.json"));
  CHECK(carpet.at("scales").at("phi_c").at("kind") == "piecewise_power");

  const json bad = json::parse(slurp(dir / "g" / "example-3-12-vs-diffusion" /
                                     "jump_kernel.json"));
  CHECK(bad.at("verdict") == "not_comparable");
  const json good = json::parse(slurp(dir / "g" / "gasket-diffjump" / "jump_kernel.json"));
  CHECK(good.at("verdict") == "comparable");

  // Deterministic across invocations.
  const fs::path dir2 = fresh_dir("gallery2");
  CHECK(run_cli("gallery --points-per-decade 2 --out g", dir2).exit_code == 0);
  CHECK(slurp(dir2 / "g" / "gasket-jump" / "jump_kernel.csv") ==
        slurp(dir / "g" / "gasket-jump" / "jump_kernel.csv"));
}

TEST_CASE("shipped preset files match the embedded catalogue", "[cli]") {
  for (const auto& preset : builtin_presets()) {
    const fs::path p =
        fs::path(SUBKERNEL_SOURCE_DIR) / "presets" / (preset.name + ".json");
    INFO(p.string());
    REQUIRE(fs::exists(p));
    const json on_disk = json::parse(slurp(p));
    CHECK(on_disk.dump() == to_json(preset.config).dump());
    // And they load through the ordinary config path.
    CHECK_NOTHROW(config_from_json(on_disk));
  }
}
