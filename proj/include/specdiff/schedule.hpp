// SPDX-License-Identifier: Apache-2.0
//
// Activation and transition times, timestep alignment, and snapping of
// resolution transitions onto a discrete solver grid.
//
// Time runs from t = 1 (pure noise) to t = 0 (clean data).
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specdiff/field.hpp"
#include "specdiff/power_spectrum.hpp"
#include "specdiff/spectral.hpp"

namespace specdiff {

/// t = σu / (1 + (σ−1)u).
double shift_time(double u, double shift);
/// Inverse of shift_time: u = t / (σ − (σ−1)t).
double unshift_time(double t, double shift);

struct SolverGrid {
  std::size_t n_steps = 0;
  double shift = 3.0;
  std::vector<double> times;  // n_steps + 1 entries, 1 → 0

  /// times[k] = shift_time(1 − k/n, σ).
  static SolverGrid shifted(std::size_t n_steps, double shift = 3.0);
};

/// Earliest-in-denoising time at which a frequency with power P keeps the
/// Bayes velocity error within δ: 1 / (1 + sqrt(δ / (P(1 + P − δ)))).
double activation_time(double power, double delta);
double activation_time(const PowerLaw& law, double omega, double delta);

/// Boundary frequency of scale s in index units: s · min(H, W)/2 cycles,
/// converted by the transform's indices per cycle.
double boundary_frequency(double scale, Grid full_grid, TransformKind kind);

double transition_time(const PowerLaw& law, double scale, Grid full_grid, double delta,
                       TransformKind kind = TransformKind::DCT);

struct Alignment {
  double time = 1.0;   // t̃ = r t / (1 + (r−1) t)
  double kappa = 1.0;  // κ = r / (1 + (r−1) t)
};

Alignment align(double t, double ratio);

struct Schedule {
  double delta = 0.01;
  std::vector<double> scales;
  Grid full_grid;
  TransformKind kind = TransformKind::DCT;
  SolverGrid solver;

  std::vector<double> optimal_transitions;  // t_i* before snapping (empty if manual)
  std::vector<std::size_t> snap_indices;    // solver index of each transition
  std::vector<double> transitions;          // snapped t_i
  std::vector<double> aligned_times;        // t̃_i
  std::vector<double> rescales;             // κ_i

  // Per solver index k in [0, n]: time on arrival, time on departure (the
  // aligned time at a transition, otherwise equal to arrival), and the stage
  // of the state leaving index k.
  std::vector<double> arrival_times;
  std::vector<double> departure_times;
  std::vector<std::size_t> stage_of_step;

  std::size_t stages() const { return scales.size(); }
  Grid stage_grid(std::size_t stage) const;
  /// Linear resolution ratio between stage i+1 and stage i.
  double ratio(std::size_t i) const;
  /// Euler steps taken at each stage.
  std::vector<std::size_t> steps_per_stage() const;
  /// Index of the transition at solver index k, or -1.
  int transition_at(std::size_t k) const;
};

/// Validates scales against the full grid and transform: strictly
/// increasing, last = 1, integral stage grids, and nesting.
void validate_scales(const std::vector<double>& scales, Grid full_grid, TransformKind kind);

/// Plans transitions from the power law and snaps each to the latest grid
/// index whose time is still ≥ t_i*. After a transition the remaining grid is
/// re-derived from the aligned time in the shift family.
Schedule plan(const PowerLaw& law, const std::vector<double>& scales, Grid full_grid,
              double delta, const SolverGrid& solver, TransformKind kind = TransformKind::DCT);

/// Builds a schedule from explicit snap indices.
Schedule make_schedule(const std::vector<double>& scales,
                       const std::vector<std::size_t>& snap_indices, Grid full_grid,
                       const SolverGrid& solver, double delta = 0.01,
                       TransformKind kind = TransformKind::DCT);

std::string schedule_to_json(const Schedule& schedule);
std::string schedule_table(const Schedule& schedule);

}  // namespace specdiff
