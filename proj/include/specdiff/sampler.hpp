// SPDX-License-Identifier: Apache-2.0
//
// Explicit-Euler probability-flow sampling, progressive across resolution
// stages or at a single resolution.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specdiff/expansion.hpp"
#include "specdiff/oracle.hpp"
#include "specdiff/schedule.hpp"
#include "specdiff/velocity_model.hpp"

namespace specdiff {

struct TrajectoryPoint {
  double t = 1.0;
  std::size_t stage = 0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Recorded after the initial draw and after every Euler step. Times
/// decrease strictly within a stage; at a transition they jump up to t̃.
struct Trajectory {
  std::vector<TrajectoryPoint> points;
  Field initial_noise;
  Field final;
  std::uint64_t seed = 0;
  Schedule schedule;
};

enum class NoiseMode {
  /// Fresh noise per transition, independent of the initial draw.
  Independent,
  /// One full-resolution spectral draw; the initial state is its low band
  /// and each transition reads its new-band slots.
  Shared,
};

struct SamplerOptions {
  NoiseMode noise = NoiseMode::Independent;
  bool record = true;
};

/// Called after each Euler step with the solver index reached.
using StepHook = std::function<void(FlowState&, std::size_t index)>;

Trajectory sample_progressive(const VelocityModel& model, const Schedule& schedule,
                              TransformKind kind, std::uint64_t seed, Shape full_shape,
                              const SamplerOptions& options = {});

/// Single-resolution Euler flow over `solver`; the same code path as a
/// one-stage progressive schedule.
Trajectory sample_baseline(const VelocityModel& model, Shape full_shape,
                           const SolverGrid& solver, TransformKind kind, std::uint64_t seed,
                           const SamplerOptions& options = {});

/// Resumes integration from `state`, which departs solver index `start`
/// (any transition at `start` with state.stage past it counts as done).
/// Transition noise uses the same per-transition seed streams as
/// sample_progressive.
Trajectory sample_from(const VelocityModel& model, const FlowState& state,
                       const Schedule& schedule, std::size_t start, TransformKind kind,
                       std::uint64_t seed, const SamplerOptions& options = {},
                       const StepHook& hook = {});

/// Baseline loop with the passthrough filter applied after every step.
Trajectory run_passthrough(const VelocityModel& model, const PowerLaw& law, double delta,
                           const SolverGrid& solver, TransformKind kind, std::uint64_t seed,
                           Shape full_shape, std::optional<double> dc_power = std::nullopt);

struct PassthroughPoint {
  double delta = 0.0;
  /// sqrt(Σ‖filtered − baseline‖² / Σ‖baseline‖²) over the seeds.
  double distortion = 0.0;
};

/// Oracle-world passthrough runs against unfiltered baselines that share
/// each seed's initial noise.
std::vector<PassthroughPoint> passthrough_sweep(const GaussianModel& model,
                                                const std::vector<double>& deltas,
                                                const SolverGrid& solver, std::uint64_t seed,
                                                std::size_t n_seeds, std::size_t threads = 1);

/// Spatial white noise for the initial state of stage 0.
Field initial_noise(Shape shape, std::uint64_t seed);

std::string trajectory_to_csv(const Trajectory& trajectory);

}  // namespace specdiff
