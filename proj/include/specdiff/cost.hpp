// SPDX-License-Identifier: Apache-2.0
//
// Analytic transformer FLOP model. One multiply-accumulate counts as 2 FLOPs.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specdiff/schedule.hpp"

namespace specdiff {

struct ArchSpec {
  std::string name = "custom";
  std::size_t hidden_dim = 0;
  std::size_t n_blocks = 0;
  double mlp_ratio = 4.0;
  std::size_t patch = 1;
  std::size_t extra_tokens = 0;

  void validate() const;
};

/// n_blocks · (8·N·d² + 4·N²·d + 4·mlp_ratio·N·d²), N = tokens + extra_tokens.
double step_flops(const ArchSpec& arch, std::size_t tokens);
/// The quadratic attention part alone: n_blocks · 4·N²·d.
double step_attention_flops(const ArchSpec& arch, std::size_t tokens);

/// Tokens of a latent grid after patchification.
std::size_t tokens_for(const ArchSpec& arch, Grid grid);

struct StageCost {
  double scale = 1.0;
  std::size_t tokens = 0;
  std::size_t steps = 0;
  double flops = 0.0;
  double attention_flops = 0.0;
};

struct CostReport {
  std::vector<StageCost> stages;
  double total_flops = 0.0;
  double attention_flops = 0.0;
  double baseline_flops = 0.0;            // single-resolution, same total steps
  double baseline_attention_flops = 0.0;
  double speedup = 1.0;                   // baseline_flops / total_flops
  double attention_speedup = 1.0;
  double ratio() const { return total_flops / baseline_flops; }
};

CostReport trajectory_cost(const ArchSpec& arch, const Schedule& schedule);

/// Loads a named preset from a versioned JSON preset file.
ArchSpec load_arch_preset(const std::string& path, const std::string& name);
std::vector<std::string> list_arch_presets(const std::string& path);

std::string cost_to_csv(const CostReport& report);
std::string cost_table(const CostReport& report);

}  // namespace specdiff
