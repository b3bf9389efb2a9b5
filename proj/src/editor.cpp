// SPDX-License-Identifier: Apache-2.0
#include "specdiff/editor.hpp"

#include <cmath>

namespace specdiff {

EditResult edit(const Field& input, const Schedule& schedule, std::size_t k,
                const VelocityModel& model, TransformKind kind, std::uint64_t seed,
                const EditOptions& options) {
  if (k < 1 || k >= schedule.stages()) {
    throw Error("editor", "transition index k = " + std::to_string(k) + " outside [1, " +
                              std::to_string(schedule.stages() - 1) + "]");
  }
  if (!(input.grid() == schedule.full_grid)) {
    throw Error("editor", "input grid " + to_string(input.grid()) +
                              " does not match the schedule's full grid " +
                              to_string(schedule.full_grid));
  }
  const std::size_t i = k - 1;
  const Grid low_grid = schedule.stage_grid(i);
  const Grid next_grid = schedule.stage_grid(i + 1);
  const double t_k = schedule.transitions[i];

  Spectrum low = spectral::extract(spectral::forward(input, kind), low_grid);
  low *= static_cast<double>(low_grid.h) / static_cast<double>(input.grid().h);

  Rng rng(derive_seed(seed, 0));
  if (options.renoise_low_band) {
    const Spectrum eps = spectral::white_noise(input.shape().with_grid(low_grid), kind, rng);
    auto dst = low.coeffs();
    const auto src = eps.coeffs();
    for (std::size_t c = 0; c < dst.size(); ++c)
      dst[c] = (1.0 - t_k) * dst[c] + t_k * options.noise_scale * src[c];
  }
  Spectrum fill = spectral::white_noise(input.shape().with_grid(next_grid), kind, rng);
  fill *= options.noise_scale;

  const FlowState start{spectral::inverse(low), t_k, i};
  const FlowState expanded = expand_with_noise(start, schedule, kind, fill);

  const std::size_t snap = schedule.snap_indices[i];
  EditResult result;
  result.trajectory = sample_from(model, expanded, schedule, snap, kind, seed);
  result.output = result.trajectory.final;
  result.start_time = t_k;
  result.aligned_time = expanded.t;
  result.skipped_steps = snap;
  result.remaining_steps = schedule.solver.n_steps - snap;

  double skipped = 0.0;
  for (std::size_t j = 0; j < snap; ++j)
    skipped += schedule.departure_times[j] - schedule.arrival_times[j + 1];
  for (std::size_t m = 0; m < i; ++m)
    skipped -= schedule.aligned_times[m] - schedule.transitions[m];
  result.skipped_time = skipped;
  return result;
}

EditResult sdedit_baseline(const Field& input, const SolverGrid& solver, std::size_t start_index,
                           const VelocityModel& model, TransformKind kind, std::uint64_t seed) {
  if (start_index >= solver.n_steps) throw Error("editor", "start index beyond the solver grid");
  const Schedule single = make_schedule({1.0}, {}, input.grid(), solver, 0.01, kind);
  const double t = solver.times[start_index];
  Field x = (1.0 - t) * input;
  x.axpy(t, initial_noise(input.shape(), derive_seed(seed, 0)));

  EditResult result;
  result.trajectory = sample_from(model, FlowState{x, t, 0}, single, start_index, kind, seed);
  result.output = result.trajectory.final;
  result.start_time = t;
  result.aligned_time = t;
  result.skipped_steps = start_index;
  result.remaining_steps = solver.n_steps - start_index;
  double skipped = 0.0;
  for (std::size_t j = 0; j < start_index; ++j) skipped += solver.times[j] - solver.times[j + 1];
  result.skipped_time = skipped;
  return result;
}

double correlation(const Field& a, const Field& b) {
  if (!(a.shape() == b.shape())) throw Error("editor", "correlation of mismatched fields");
  const double ma = a.mean();
  const double mb = b.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    sab += (va[i] - ma) * (vb[i] - mb);
    saa += (va[i] - ma) * (va[i] - ma);
    sbb += (vb[i] - mb) * (vb[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace specdiff
