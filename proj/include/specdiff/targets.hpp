// SPDX-License-Identifier: Apache-2.0
//
// Stage-wise flow-matching targets for progressive fine-tuning and a toy
// per-coefficient gain model trained on them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "specdiff/oracle.hpp"
#include "specdiff/schedule.hpp"
#include "specdiff/velocity_model.hpp"

namespace specdiff {

/// One training example at stage `stage` (0-based). The stage runs on a
/// straight path from x_tilde at t_start (the aligned time of the previous
/// transition, 1 for the first stage) to x_end at t_end (the next transition
/// time, 0 for the last stage). Both endpoints share `noise`.
struct StageSample {
  Field input;   // x_t
  double t = 0.5;
  Field target;  // (x_tilde − x_end) / (t_start − t_end)
  std::size_t stage = 0;
  Field x_tilde;
  Field x_end;
  Field clean;   // x0 at the stage grid
  Field noise;   // ε at the stage grid
  double t_start = 1.0;
  double t_end = 0.0;
};

/// Upper (aligned) and lower time bounds of a stage.
double stage_start_time(const Schedule& schedule, std::size_t stage);
double stage_end_time(const Schedule& schedule, std::size_t stage);

/// Stage owning time t on the snapped timeline: stage i for t in
/// [t_{i+1}, t_i) with t_0 = 1 included in the first stage.
std::size_t assign_stage(double t, const Schedule& schedule);

/// Spectral restriction of a full-resolution clean field to a stage grid,
/// divided by the resolution ratio.
Field downsample_clean(const Field& x0, Grid grid, TransformKind kind);

StageSample make_stage_sample(const Field& x0, double t, const Schedule& schedule,
                              TransformKind kind, std::uint64_t seed);
/// As make_stage_sample with an explicit stage; t may be anywhere in
/// [t_end, t_start] except exactly 0 or 1.
StageSample make_stage_sample_in_stage(const Field& x0, double t, std::size_t stage,
                                       const Schedule& schedule, TransformKind kind,
                                       std::uint64_t seed);

/// Bayes-optimal per-coefficient gain for stage targets at time t under the
/// Gaussian model (row-major over the stage grid).
std::vector<double> analytic_stage_gain(const GaussianModel& model, const Schedule& schedule,
                                        std::size_t stage, double t);

/// Per-stage diagonal spectral gain with a piecewise-linear time embedding.
/// Knots sit at the solver times each stage evaluates; gains are shared by
/// all channel/frame planes.
class ToyNet final : public VelocityModel {
 public:
  ToyNet(const Schedule& schedule, TransformKind kind);

  Field evaluate(const Field& x, double t) const override;
  std::string id() const override { return "toynet"; }

  std::size_t stages() const { return knots_.size(); }
  const std::vector<double>& knots(std::size_t stage) const { return knots_.at(stage); }
  Grid grid(std::size_t stage) const { return grids_.at(stage); }
  std::vector<double>& gains(std::size_t stage) { return gains_.at(stage); }
  const std::vector<double>& gains(std::size_t stage) const { return gains_.at(stage); }
  /// Interpolated gains of `stage` at time t.
  std::vector<double> gains_at(std::size_t stage, double t) const;
  /// (knot, weight) pairs of the time embedding.
  std::vector<std::pair<std::size_t, double>> embedding(std::size_t stage, double t) const;
  std::size_t stage_of_grid(Grid grid) const;

  TransformKind kind() const { return kind_; }
  bool frozen = false;

 private:
  TransformKind kind_;
  std::vector<Grid> grids_;
  std::vector<std::vector<double>> knots_;  // descending
  std::vector<std::vector<double>> gains_;  // knots × coefficients
};

enum class Optimizer { Adam, SGD };
enum class TimeSampling { Grid, Uniform };

struct TrainOptions {
  std::size_t steps = 500;
  double lr = 0.05;
  std::size_t batch = 32;
  Optimizer optimizer = Optimizer::Adam;
  TimeSampling sampling = TimeSampling::Grid;
  /// Fixed dataset size; 0 draws fresh samples every step.
  std::size_t dataset_size = 0;
  std::size_t threads = 1;
};

struct TrainResult {
  std::vector<double> loss_curve;  // minibatch MSE before each update
};

TrainResult train_toy(ToyNet& net, const GaussianModel& data, const Schedule& schedule,
                      const TrainOptions& options, std::uint64_t seed);

std::string loss_curve_to_csv(const TrainResult& result);

}  // namespace specdiff
