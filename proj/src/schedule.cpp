// SPDX-License-Identifier: Apache-2.0
#include "specdiff/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace specdiff {
namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error("schedule", "delta must lie in (0, 1), got " + std::to_string(delta));
  }
}

std::size_t scaled_dim(double scale, std::size_t dim) {
  const double v = scale * static_cast<double>(dim);
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || r < 1.0) {
    throw Error("schedule", "scale " + std::to_string(scale) + " of dimension " +
                                std::to_string(dim) + " is not a positive integer");
  }
  return static_cast<std::size_t>(r);
}

// Fills the per-index time tables by walking the solver grid and re-deriving
// it after each transition. Returns the snap index chosen for each target.
// With `targets` empty the snap indices in `s` are used as given.
void build_timeline(Schedule& s, const std::vector<double>& targets) {
  const std::size_t n = s.solver.n_steps;
  const double sigma = s.solver.shift;
  std::vector<double> grid = s.solver.times;
  const std::size_t n_trans = s.scales.size() - 1;
  const bool snapping = !targets.empty();
  if (snapping) s.snap_indices.assign(n_trans, 0);

  s.transitions.clear();
  s.aligned_times.clear();
  s.rescales.clear();
  s.arrival_times = grid;
  s.departure_times = grid;
  s.stage_of_step.assign(n + 1, 0);

  std::size_t start = 0;
  for (std::size_t i = 0; i < n_trans; ++i) {
    std::size_t k = 0;
    if (snapping) {
      // Without a grid time at or above t_i* past the previous transition,
      // the target falls onto the previous index (a collision).
      k = start == 0 ? 0 : start - 1;
      for (std::size_t j = start; j <= n; ++j) {
        if (grid[j] >= targets[i]) k = j;
      }
    } else {
      k = s.snap_indices[i];
    }
    if (k >= n) {
      throw Error("schedule", "transition " + std::to_string(i + 1) +
                                  " snaps to the terminal index; no steps remain");
    }
    if (i > 0 && k <= s.snap_indices[i - 1]) {
      throw Error("schedule", "transitions " + std::to_string(i) + " and " +
                                  std::to_string(i + 1) + " collide at solver index " +
                                  std::to_string(k) +
                                  " (scales too close for this delta or step count)");
    }
    if (!snapping && k < start) throw Error("schedule", "snap indices must increase");
    s.snap_indices[i] = k;

    const double t = grid[k];
    if (!s.transitions.empty() && !(t < s.transitions.back())) {
      throw Error("schedule", "snapped transitions are not strictly decreasing at transition " +
                                  std::to_string(i + 1));
    }
    const Alignment a = align(t, s.ratio(i));
    s.transitions.push_back(t);
    s.aligned_times.push_back(a.time);
    s.rescales.push_back(a.kappa);

    for (std::size_t j = start; j <= k; ++j) s.arrival_times[j] = grid[j];
    for (std::size_t j = start; j < k; ++j) {
      s.departure_times[j] = grid[j];
      s.stage_of_step[j] = i;
    }
    s.departure_times[k] = a.time;
    s.stage_of_step[k] = i + 1;

    const double u0 = unshift_time(a.time, sigma);
    for (std::size_t j = k + 1; j <= n; ++j) {
      grid[j] = shift_time(u0 * static_cast<double>(n - j) / static_cast<double>(n - k), sigma);
    }
    grid[k] = a.time;
    start = k + 1;
  }
  for (std::size_t j = start; j <= n; ++j) {
    s.arrival_times[j] = grid[j];
    s.departure_times[j] = grid[j];
    s.stage_of_step[j] = n_trans;
  }
  s.arrival_times[n] = 0.0;
  s.departure_times[n] = 0.0;
}

}  // namespace

double shift_time(double u, double shift) {
  return shift * u / (1.0 + (shift - 1.0) * u);
}

double unshift_time(double t, double shift) { return t / (shift - (shift - 1.0) * t); }

SolverGrid SolverGrid::shifted(std::size_t n_steps, double shift) {
  if (n_steps == 0) throw Error("schedule", "solver needs at least one step");
  if (!(shift > 0.0)) throw Error("schedule", "solver shift must be positive");
  SolverGrid g;
  g.n_steps = n_steps;
  g.shift = shift;
  g.times.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double u = 1.0 - static_cast<double>(k) / static_cast<double>(n_steps);
    g.times[k] = shift_time(u, shift);
  }
  g.times.front() = 1.0;
  g.times.back() = 0.0;
  return g;
}

double activation_time(double power, double delta) {
  check_delta(delta);
  if (!(power > 0.0)) throw Error("schedule", "activation time needs power > 0");
  return 1.0 / (1.0 + std::sqrt(delta / (power * (1.0 + power - delta))));
}

double activation_time(const PowerLaw& law, double omega, double delta) {
  if (!(omega > 0.0)) throw Error("schedule", "activation time needs omega > 0");
  return activation_time(law.evaluate(omega), delta);
}

double boundary_frequency(double scale, Grid full_grid, TransformKind kind) {
  const double omega = scale * nyquist_cap(full_grid) * indices_per_cycle(kind);
  if (!(omega > 0.0)) throw Error("schedule", "boundary frequency must be positive");
  return omega;
}

double transition_time(const PowerLaw& law, double scale, Grid full_grid, double delta,
                       TransformKind kind) {
  if (!(scale > 0.0 && scale < 1.0)) {
    throw Error("schedule", "transition scale must lie in (0, 1)");
  }
  return activation_time(law, boundary_frequency(scale, full_grid, kind), delta);
}

Alignment align(double t, double ratio) {
  if (!(ratio > 1.0)) throw Error("schedule", "alignment needs resolution ratio r > 1");
  if (!(t >= 0.0 && t <= 1.0)) throw Error("schedule", "alignment needs t in [0, 1]");
  const double denom = 1.0 + (ratio - 1.0) * t;
  return {ratio * t / denom, ratio / denom};
}

Grid Schedule::stage_grid(std::size_t stage) const {
  if (stage >= scales.size()) throw Error("schedule", "stage index out of range");
  return {scaled_dim(scales[stage], full_grid.h), scaled_dim(scales[stage], full_grid.w)};
}

double Schedule::ratio(std::size_t i) const {
  return static_cast<double>(stage_grid(i + 1).h) / static_cast<double>(stage_grid(i).h);
}

std::vector<std::size_t> Schedule::steps_per_stage() const {
  std::vector<std::size_t> steps(scales.size(), 0);
  for (std::size_t k = 0; k < solver.n_steps; ++k) ++steps[stage_of_step[k]];
  return steps;
}

int Schedule::transition_at(std::size_t k) const {
  for (std::size_t i = 0; i < snap_indices.size(); ++i)
    if (snap_indices[i] == k) return static_cast<int>(i);
  return -1;
}

void validate_scales(const std::vector<double>& scales, Grid full_grid, TransformKind kind) {
  if (scales.empty()) throw Error("schedule", "at least one scale is required");
  if (std::abs(scales.back() - 1.0) > 1e-12) throw Error("schedule", "last scale must be 1");
  std::vector<Grid> grids;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw Error("schedule", "scales must be positive");
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw Error("schedule", "scales must be strictly increasing");
    }
    grids.push_back({scaled_dim(scales[i], full_grid.h), scaled_dim(scales[i], full_grid.w)});
  }
  for (std::size_t i = 0; i + 1 < grids.size(); ++i) {
    try {
      spectral::check_nesting(grids[i], grids[i + 1], kind);
    } catch (const Error& e) {
      throw Error("schedule", std::string("invalid scales: ") + e.what());
    }
  }
}

Schedule plan(const PowerLaw& law, const std::vector<double>& scales, Grid full_grid,
              double delta, const SolverGrid& solver, TransformKind kind) {
  check_delta(delta);
  validate_scales(scales, full_grid, kind);
  if (scales.size() > 1) law.require_decreasing();
  Schedule s;
  s.delta = delta;
  s.scales = scales;
  s.full_grid = full_grid;
  s.kind = kind;
  s.solver = solver;
  for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
    s.optimal_transitions.push_back(transition_time(law, scales[i], full_grid, delta, kind));
  }
  if (s.optimal_transitions.empty()) {
    build_timeline(s, {});
  } else {
    build_timeline(s, s.optimal_transitions);
  }
  return s;
}

Schedule make_schedule(const std::vector<double>& scales,
                       const std::vector<std::size_t>& snap_indices, Grid full_grid,
                       const SolverGrid& solver, double delta, TransformKind kind) {
  check_delta(delta);
  validate_scales(scales, full_grid, kind);
  if (snap_indices.size() + 1 != scales.size()) {
    throw Error("schedule", "need exactly one snap index per transition");
  }
  Schedule s;
  s.delta = delta;
  s.scales = scales;
  s.full_grid = full_grid;
  s.kind = kind;
  s.solver = solver;
  s.snap_indices = snap_indices;
  build_timeline(s, {});
  return s;
}

std::string schedule_to_json(const Schedule& s) {
  nlohmann::json j;
  j["delta"] = s.delta;
  j["scales"] = s.scales;
  j["full_grid"] = {s.full_grid.h, s.full_grid.w};
  j["transform"] = std::string(to_string(s.kind));
  j["optimal_transitions"] = s.optimal_transitions;
  j["transitions"] = s.transitions;
  j["snap_indices"] = s.snap_indices;
  j["aligned_times"] = s.aligned_times;
  j["rescales"] = s.rescales;
  j["steps_per_stage"] = s.steps_per_stage();
  j["solver"] = {{"n_steps", s.solver.n_steps}, {"shift", s.solver.shift}};
  j["arrival_times"] = s.arrival_times;
  j["departure_times"] = s.departure_times;
  return j.dump(2) + "\n";
}

std::string schedule_table(const Schedule& s) {
  std::ostringstream out;
  char line[160];
  out << "delta " << s.delta << ", " << s.solver.n_steps << " steps, shift " << s.solver.shift
      << ", grid " << to_string(s.full_grid) << ", " << to_string(s.kind) << "\n";
  out << "stage  scale   grid        steps\n";
  const auto steps = s.steps_per_stage();
  for (std::size_t i = 0; i < s.stages(); ++i) {
    std::snprintf(line, sizeof line, "%5zu  %5.3f   %-10s  %5zu\n", i + 1, s.scales[i],
                  to_string(s.stage_grid(i)).c_str(), steps[i]);
    out << line;
  }
  if (!s.transitions.empty()) {
    out << "transition  t*        step  t         t_aligned  kappa\n";
    for (std::size_t i = 0; i < s.transitions.size(); ++i) {
      const double opt = i < s.optimal_transitions.size() ? s.optimal_transitions[i] : NAN;
      std::snprintf(line, sizeof line, "%10zu  %.6f  %4zu  %.6f  %.6f   %.6f\n", i + 1, opt,
                    s.snap_indices[i], s.transitions[i], s.aligned_times[i], s.rescales[i]);
      out << line;
    }
  }
  return out.str();
}

}  // namespace specdiff
