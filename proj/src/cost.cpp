// SPDX-License-Identifier: Apache-2.0
#include "specdiff/cost.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace specdiff {

void ArchSpec::validate() const {
  if (hidden_dim == 0 || n_blocks == 0 || patch == 0 || !(mlp_ratio > 0.0)) {
    throw Error("cost", "architecture '" + name + "' needs positive dims, blocks, patch and mlp ratio");
  }
}

double step_flops(const ArchSpec& arch, std::size_t tokens) {
  arch.validate();
  if (tokens == 0) throw Error("cost", "step cost needs at least one token");
  const double n = static_cast<double>(tokens + arch.extra_tokens);
  const double d = static_cast<double>(arch.hidden_dim);
  const double per_block = 8.0 * n * d * d + 4.0 * n * n * d + 4.0 * arch.mlp_ratio * n * d * d;
  return static_cast<double>(arch.n_blocks) * per_block;
}

double step_attention_flops(const ArchSpec& arch, std::size_t tokens) {
  arch.validate();
  const double n = static_cast<double>(tokens + arch.extra_tokens);
  return static_cast<double>(arch.n_blocks) * 4.0 * n * n * static_cast<double>(arch.hidden_dim);
}

std::size_t tokens_for(const ArchSpec& arch, Grid grid) {
  if (grid.h % arch.patch != 0 || grid.w % arch.patch != 0) {
    throw Error("cost", "grid " + to_string(grid) + " is not divisible by patch " +
                            std::to_string(arch.patch));
  }
  return (grid.h / arch.patch) * (grid.w / arch.patch);
}

CostReport trajectory_cost(const ArchSpec& arch, const Schedule& schedule) {
  arch.validate();
  CostReport report;
  const auto steps = schedule.steps_per_stage();
  for (std::size_t i = 0; i < schedule.stages(); ++i) {
    StageCost stage;
    stage.scale = schedule.scales[i];
    stage.tokens = tokens_for(arch, schedule.stage_grid(i));
    stage.steps = steps[i];
    stage.flops = static_cast<double>(stage.steps) * step_flops(arch, stage.tokens);
    stage.attention_flops =
        static_cast<double>(stage.steps) * step_attention_flops(arch, stage.tokens);
    report.total_flops += stage.flops;
    report.attention_flops += stage.attention_flops;
    report.stages.push_back(stage);
  }
  const std::size_t full_tokens = tokens_for(arch, schedule.full_grid);
  const double n = static_cast<double>(schedule.solver.n_steps);
  report.baseline_flops = n * step_flops(arch, full_tokens);
  report.baseline_attention_flops = n * step_attention_flops(arch, full_tokens);
  report.speedup = report.baseline_flops / report.total_flops;
  report.attention_speedup = report.baseline_attention_flops / report.attention_flops;
  return report;
}

ArchSpec load_arch_preset(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Error("cost", "cannot open preset file " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& presets = j.at("presets");
    if (!presets.contains(name)) {
      throw Error("cost", "unknown architecture preset '" + name + "' in " + path);
    }
    const auto& p = presets.at(name);
    ArchSpec arch;
    arch.name = name;
    arch.hidden_dim = p.at("hidden_dim").get<std::size_t>();
    arch.n_blocks = p.at("n_blocks").get<std::size_t>();
    arch.mlp_ratio = p.at("mlp_ratio").get<double>();
    arch.patch = p.at("patch").get<std::size_t>();
    arch.extra_tokens = p.value("extra_tokens", std::size_t{0});
    arch.validate();
    return arch;
  } catch (const nlohmann::json::exception& e) {
    throw Error("cost", "malformed preset file " + path + ": " + e.what());
  }
}

std::vector<std::string> list_arch_presets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cost", "cannot open preset file " + path);
  std::vector<std::string> names;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& presets = j.at("presets");
    for (auto it = presets.begin(); it != presets.end(); ++it) names.push_back(it.key());
  } catch (const nlohmann::json::exception& e) {
    throw Error("cost", "malformed preset file " + path + ": " + e.what());
  }
  return names;
}

std::string cost_to_csv(const CostReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "stage,scale,tokens,steps,flops,attention_flops\n";
  for (std::size_t i = 0; i < report.stages.size(); ++i) {
    const auto& s = report.stages[i];
    out << i + 1 << ',' << s.scale << ',' << s.tokens << ',' << s.steps << ',' << s.flops << ','
        << s.attention_flops << '\n';
  }
  out << "total,,,," << report.total_flops << ',' << report.attention_flops << '\n';
  out << "baseline,,,," << report.baseline_flops << ',' << report.baseline_attention_flops
      << '\n';
  return out.str();
}

std::string cost_table(const CostReport& report) {
  std::ostringstream out;
  char line[160];
  out << "stage  scale  tokens  steps  TFLOPs\n";
  for (std::size_t i = 0; i < report.stages.size(); ++i) {
    const auto& s = report.stages[i];
    std::snprintf(line, sizeof line, "%5zu  %5.3f  %6zu  %5zu  %10.2f\n", i + 1, s.scale,
                  s.tokens, s.steps, s.flops / 1e12);
    out << line;
  }
  std::snprintf(line, sizeof line,
                "total %.2f TFLOPs vs baseline %.2f TFLOPs: ratio %.4f, speedup %.3fx "
                "(attention-only %.3fx)\n",
                report.total_flops / 1e12, report.baseline_flops / 1e12, report.ratio(),
                report.speedup, report.attention_speedup);
  out << line;
  return out.str();
}

}  // namespace specdiff
