// SPDX-License-Identifier: Apache-2.0
#include "specdiff/sampler.hpp"

#include <cmath>
#include <sstream>

namespace specdiff {
namespace {

TrajectoryPoint summarize(const FlowState& state) {
  return {state.t, state.stage, state.field.mean(), state.field.variance()};
}

void check_velocity(const Field& v, const FlowState& state, std::size_t step) {
  bool finite = true;
  double max_abs = 0.0;
  for (double x : v.values()) {
    if (!std::isfinite(x)) {
      finite = false;
    } else {
      max_abs = std::max(max_abs, std::abs(x));
    }
  }
  if (!finite) {
    throw Error("sampler", "non-finite velocity at stage " + std::to_string(state.stage + 1) +
                               ", step " + std::to_string(step) + " (t = " +
                               std::to_string(state.t) + "), max finite |v| = " +
                               std::to_string(max_abs));
  }
}

// New-band noise source for transition i: either a fresh seeded draw or the
// shared full-resolution realization restricted to the next stage grid.
struct NoiseSource {
  std::optional<Spectrum> shared;

  FlowState transition(const FlowState& state, const Schedule& schedule, TransformKind kind,
                       std::uint64_t seed) const {
    const std::size_t i = state.stage;
    if (!shared) return expand(state, schedule, kind, derive_seed(seed, 1 + i));
    const Grid next = schedule.stage_grid(i + 1);
    if (next == shared->grid()) return expand_with_noise(state, schedule, kind, *shared);
    return expand_with_noise(state, schedule, kind, spectral::extract(*shared, next));
  }
};

Trajectory integrate(const VelocityModel& model, FlowState state, const Schedule& schedule,
                     std::size_t start, TransformKind kind, std::uint64_t seed,
                     const NoiseSource& noise, const SamplerOptions& options,
                     const StepHook& hook) {
  const std::size_t n = schedule.solver.n_steps;
  if (schedule.arrival_times.size() != n + 1 || start > n) {
    throw Error("sampler", "schedule is not laid out on its solver grid");
  }
  Trajectory traj;
  traj.seed = seed;
  traj.schedule = schedule;
  if (options.record) traj.points.push_back(summarize(state));

  for (std::size_t k = start; k < n; ++k) {
    const int i = schedule.transition_at(k);
    if (i >= 0 && state.stage == static_cast<std::size_t>(i)) {
      state = noise.transition(state, schedule, kind, seed);
      if (options.record) traj.points.push_back(summarize(state));
    }
    if (state.stage != schedule.stage_of_step[k]) {
      throw Error("sampler", "state stage " + std::to_string(state.stage + 1) +
                                 " does not match the schedule at solver index " +
                                 std::to_string(k));
    }
    const double t = schedule.departure_times[k];
    const double t_next = schedule.arrival_times[k + 1];
    state.t = t;
    const Field v = model.evaluate(state.field, t);
    check_velocity(v, state, k);
    state.field.axpy(t_next - t, v);
    state.t = t_next;
    if (hook) hook(state, k + 1);
    if (options.record) traj.points.push_back(summarize(state));
  }
  if (state.stage + 1 != schedule.stages()) {
    throw Error("sampler", "trajectory ended before the final stage");
  }
  traj.final = std::move(state.field);
  return traj;
}

}  // namespace

Field initial_noise(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Field f(shape);
  for (double& v : f.values()) v = rng.normal();
  return f;
}

Trajectory sample_progressive(const VelocityModel& model, const Schedule& schedule,
                              TransformKind kind, std::uint64_t seed, Shape full_shape,
                              const SamplerOptions& options) {
  if (!(full_shape.grid() == schedule.full_grid)) {
    throw Error("sampler", "shape " + to_string(full_shape) + " does not match schedule grid " +
                               to_string(schedule.full_grid));
  }
  const Shape stage0 = full_shape.with_grid(schedule.stage_grid(0));
  NoiseSource noise;
  Field start;
  if (options.noise == NoiseMode::Shared) {
    Rng rng(derive_seed(seed, 0));
    noise.shared = spectral::white_noise(full_shape, kind, rng);
    start = schedule.stages() == 1
                ? spectral::inverse(*noise.shared)
                : spectral::inverse(spectral::extract(*noise.shared, stage0.grid()));
  } else {
    start = initial_noise(stage0, derive_seed(seed, 0));
  }
  Trajectory traj = integrate(model, FlowState{start, 1.0, 0}, schedule, 0, kind, seed, noise,
                              options, {});
  traj.initial_noise = std::move(start);
  return traj;
}

Trajectory sample_baseline(const VelocityModel& model, Shape full_shape,
                           const SolverGrid& solver, TransformKind kind, std::uint64_t seed,
                           const SamplerOptions& options) {
  const Schedule single = make_schedule({1.0}, {}, full_shape.grid(), solver, 0.01, kind);
  return sample_progressive(model, single, kind, seed, full_shape, options);
}

Trajectory sample_from(const VelocityModel& model, const FlowState& state,
                       const Schedule& schedule, std::size_t start, TransformKind kind,
                       std::uint64_t seed, const SamplerOptions& options,
                       const StepHook& hook) {
  Trajectory traj = integrate(model, state, schedule, start, kind, seed, NoiseSource{}, options,
                              hook);
  traj.initial_noise = state.field;
  return traj;
}

Trajectory run_passthrough(const VelocityModel& model, const PowerLaw& law, double delta,
                           const SolverGrid& solver, TransformKind kind, std::uint64_t seed,
                           Shape full_shape, std::optional<double> dc_power) {
  const Schedule single = make_schedule({1.0}, {}, full_shape.grid(), solver, 0.01, kind);
  const Field noise = initial_noise(full_shape, derive_seed(seed, 0));
  const StepHook filter = [&](FlowState& state, std::size_t) {
    state = passthrough_filter(state, noise, law, delta, kind, dc_power);
  };
  Trajectory traj = integrate(model, FlowState{noise, 1.0, 0}, single, 0, kind, seed,
                              NoiseSource{}, SamplerOptions{}, filter);
  traj.initial_noise = noise;
  return traj;
}

std::vector<PassthroughPoint> passthrough_sweep(const GaussianModel& model,
                                                const std::vector<double>& deltas,
                                                const SolverGrid& solver, std::uint64_t seed,
                                                std::size_t n_seeds, std::size_t threads) {
  if (n_seeds == 0) throw Error("sampler", "passthrough sweep needs at least one seed");
  const OracleVelocity velocity(model);
  const SamplerOptions quiet{NoiseMode::Independent, false};
  std::vector<std::vector<double>> diff(deltas.size(), std::vector<double>(n_seeds, 0.0));
  std::vector<double> base_energy(n_seeds, 0.0);
  parallel_for(n_seeds, threads, [&](std::size_t n) {
    const std::uint64_t s = derive_seed(seed, n);
    const Field base = sample_baseline(velocity, model.shape(), solver, model.kind(), s, quiet).final;
    base_energy[n] = base.sum_squares();
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      const Field filtered = run_passthrough(velocity, model.power_law(), deltas[d], solver,
                                             model.kind(), s, model.shape(), model.dc_power())
                                 .final;
      diff[d][n] = (filtered - base).sum_squares();
    }
  });
  double energy = 0.0;
  for (double e : base_energy) energy += e;
  std::vector<PassthroughPoint> out;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    double acc = 0.0;
    for (double v : diff[d]) acc += v;
    out.push_back({deltas[d], std::sqrt(acc / energy)});
  }
  return out;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  out.precision(17);
  out << "t,stage,mean,var\n";
  for (const auto& p : trajectory.points)
    out << p.t << ',' << p.stage + 1 << ',' << p.mean << ',' << p.variance << '\n';
  return out.str();
}

}  // namespace specdiff
