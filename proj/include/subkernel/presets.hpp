#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "subkernel/config.hpp"

namespace subkernel {

struct Preset {
  std::string name;
  std::string description;
  ExperimentConfig config;
};

/// Built-in experiment catalogue. Each entry is a complete config; the
/// gallery command simply runs them through the ordinary pipeline.
inline const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = [] {
    auto base = [] {
      ExperimentConfig c;
      c.grid = GridSpec{-3.0, 3.0, 8};
      // 15 log-spaced points over [1e-2, 1e2]
      c.bernstein_lambdas.clear();
      for (int i = 0; i < 15; ++i)
        c.bernstein_lambdas.push_back(std::pow(10.0, -2.0 + 4.0 * i / 14.0));
      c.mc = McConfig{};
      return c;
    };
    std::vector<Preset> out;

    {
      // Rotationally symmetric stable process in the plane.
      ExperimentConfig c = base();
      c.scales.emplace("phi_j", ScaleSpec::power(1.0));
      c.scales.emplace("psi", ScaleSpec::power(0.5));
      c.volume = VolumeProfile::ahlfors(2.0);
      c.mode = EnvelopeMode::pure_jump;
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::jump;
      out.push_back({"stable-rd", "alpha-stable process on Euclidean space (alpha = 1, d = 2)",
                     std::move(c)});
    }
    {
      // Stable-like jump process on the unbounded gasket.
      ExperimentConfig c = base();
      c.scales.emplace("phi_j", ScaleSpec::power(1.0));
      c.scales.emplace("psi", ScaleSpec::power(0.7));
      c.volume = VolumeProfile::ahlfors(std::log(3.0) / std::log(2.0));
      c.mode = EnvelopeMode::pure_jump;
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::jump;
      out.push_back({"gasket-jump",
                     "stable-like jump process on the unbounded Sierpinski gasket "
                     "(d = log3/log2, alpha = 1)",
                     std::move(c)});
    }
    {
      // Brownian motion plus an independent stable process on the line.
      ExperimentConfig c = base();
      c.scales.emplace("phi_c", ScaleSpec::power(2.0));
      c.scales.emplace("phi_j", ScaleSpec::power(1.0));
      c.scales.emplace("psi", ScaleSpec::power(1.5));
      c.volume = VolumeProfile::ahlfors(1.0);
      c.mode = EnvelopeMode::diffusion_plus_jump;
      c.phi_c_name = "phi_c";
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::full;
      out.push_back({"brownian-stable-rd",
                     "Brownian motion + independent stable process on the line "
                     "(phi_c = r^2, phi_j = r, psi = r^1.5)",
                     std::move(c)});
    }
    {
      // Sub-Gaussian diffusion with an added stable-like jump part on the gasket.
      ExperimentConfig c = base();
      const double d = std::log(3.0) / std::log(2.0);
      const double beta = std::log(5.0) / std::log(2.0);
      c.scales.emplace("phi_c", ScaleSpec::power(beta));
      c.scales.emplace("phi_j", ScaleSpec::power(1.0));
      c.scales.emplace("psi", ScaleSpec::power(1.2));
      c.volume = VolumeProfile::ahlfors(d);
      c.mode = EnvelopeMode::diffusion_plus_jump;
      c.phi_c_name = "phi_c";
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::full;
      out.push_back({"gasket-diffjump",
                     "diffusion + jump on the unbounded Sierpinski gasket "
                     "(d = log3/log2, beta = log5/log2, alpha = 1)",
                     std::move(c)});
    }
    {
      // Carpet tiling: anomalous below unit scale, Euclidean above it.
      ExperimentConfig c = base();
      c.scales.emplace("phi_c", ScaleSpec::piecewise_power(2.1, 2.0));
      c.scales.emplace("phi_j", ScaleSpec::power(1.0));
      c.scales.emplace("psi", ScaleSpec::power(0.9));
      c.volume = VolumeProfile::piecewise(std::log(8.0) / std::log(3.0), 2.0);
      c.mode = EnvelopeMode::diffusion_plus_jump;
      c.phi_c_name = "phi_c";
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::full;
      out.push_back({"carpet-tiling",
                     "diffusion + jump on the tiling of planar Sierpinski carpets "
                     "(piecewise walk scale, piecewise volume)",
                     std::move(c)});
    }
    {
      // Two-regime psi whose diffusion-type and jump-type scales separate.
      ExperimentConfig c = base();
      c.scales.emplace("phi_j", ScaleSpec::power(2.0));
      c.scales.emplace("psi", ScaleSpec::piecewise_power(1.0, 4.0));
      c.volume = VolumeProfile::ahlfors(2.0);
      c.mode = EnvelopeMode::pure_jump;
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::jump;
      out.push_back({"example-3-12",
                     "two-regime psi (beta = 2, gamma1 = 0.5, gamma2 = 2): jump-type "
                     "scale against its own target",
                     std::move(c)});
    }
    {
      ExperimentConfig c = base();
      c.scales.emplace("phi_j", ScaleSpec::power(2.0));
      c.scales.emplace("psi", ScaleSpec::piecewise_power(1.0, 4.0));
      c.volume = VolumeProfile::ahlfors(2.0);
      c.mode = EnvelopeMode::pure_jump;
      c.phi_j_name = "phi_j";
      c.psi_name = "psi";
      c.target = TargetKind::diffusion;
      out.push_back({"example-3-12-vs-diffusion",
                     "same spec checked against the diffusion-type target; the ratio "
                     "drifts with a positive power of r, so the verdict is "
                     "not_comparable",
                     std::move(c)});
    }
    return out;
  }();
  return presets;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : builtin_presets())
    if (p.name == name) return p;
  std::string names;
  for (const auto& p : builtin_presets()) names += (names.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + name + "'; available: " + names);
}

}  // namespace subkernel
