// SPDX-License-Identifier: Apache-2.0
#include "specdiff/expansion.hpp"

#include <cmath>

namespace specdiff {
namespace {

constexpr double kTimeTolerance = 1e-12;

void check_transition(const FlowState& state, const Schedule& schedule) {
  if (state.stage + 1 >= schedule.stages()) {
    throw Error("expansion", "state is already at the final stage " +
                                 std::to_string(state.stage));
  }
  const Grid expected = schedule.stage_grid(state.stage);
  if (!(state.field.grid() == expected)) {
    throw Error("expansion", "state grid " + to_string(state.field.grid()) +
                                 " does not match stage grid " + to_string(expected));
  }
  const double t_i = schedule.transitions[state.stage];
  if (std::abs(state.t - t_i) > kTimeTolerance) {
    throw Error("expansion", "state time " + std::to_string(state.t) +
                                 " is not the transition time " + std::to_string(t_i));
  }
}

}  // namespace

FlowState expand_with_noise(const FlowState& state, const Schedule& schedule,
                            TransformKind kind, const Spectrum& noise) {
  check_transition(state, schedule);
  const std::size_t i = state.stage;
  const Grid next = schedule.stage_grid(i + 1);
  if (!(noise.grid() == next) || noise.kind() != kind ||
      noise.shape().planes() != state.field.shape().planes()) {
    throw Error("expansion", "noise spectrum does not match the next stage grid " +
                                 to_string(next));
  }
  const double t_i = schedule.transitions[i];

  Spectrum expanded = spectral::embed(spectral::forward(state.field, kind), next);
  const auto mask = spectral::low_band_mask(state.field.grid(), next, kind);
  for (std::size_t p = 0; p < expanded.shape().planes(); ++p) {
    auto dst = expanded.plane(p);
    const auto src = noise.plane(p);
    for (std::size_t k = 0; k < dst.size(); ++k) {
      if (!mask[k]) dst[k] = t_i * src[k];
    }
  }
  FlowState out{spectral::inverse(expanded), schedule.aligned_times[i], i + 1};
  out.field *= schedule.rescales[i];
  return out;
}

FlowState expand(const FlowState& state, const Schedule& schedule, TransformKind kind,
                 std::uint64_t seed) {
  check_transition(state, schedule);
  Rng rng(seed);
  const Shape next = state.field.shape().with_grid(schedule.stage_grid(state.stage + 1));
  return expand_with_noise(state, schedule, kind, spectral::white_noise(next, kind, rng));
}

std::vector<double> activation_map(Grid grid, const PowerLaw& law, double delta,
                                   TransformKind kind, std::optional<double> dc_power) {
  const FrequencyGeometry geometry(grid, kind);
  const double dc = dc_power.value_or(law.evaluate(1.0));
  std::vector<double> out(grid.area());
  for (std::size_t y = 0; y < grid.h; ++y) {
    for (std::size_t x = 0; x < grid.w; ++x) {
      const double omega = geometry.radial(y, x);
      out[y * grid.w + x] = activation_time(omega > 0.0 ? law.evaluate(omega) : dc, delta);
    }
  }
  return out;
}

FlowState passthrough_filter(const FlowState& state, const Field& initial_noise,
                             const PowerLaw& law, double delta, TransformKind kind,
                             std::optional<double> dc_power) {
  if (!(initial_noise.shape() == state.field.shape())) {
    throw Error("expansion", "initial noise shape " + to_string(initial_noise.shape()) +
                                 " does not match state " + to_string(state.field.shape()));
  }
  const auto t_active = activation_map(state.field.grid(), law, delta, kind, dc_power);
  bool any = false;
  for (double ta : t_active) any = any || state.t > ta;
  if (!any) return state;

  Spectrum spec = spectral::forward(state.field, kind);
  const Spectrum noise = spectral::forward(initial_noise, kind);
  for (std::size_t p = 0; p < spec.shape().planes(); ++p) {
    auto dst = spec.plane(p);
    const auto src = noise.plane(p);
    for (std::size_t k = 0; k < dst.size(); ++k) {
      if (state.t > t_active[k]) dst[k] = state.t * src[k];
    }
  }
  return {spectral::inverse(spec), state.t, state.stage};
}

}  // namespace specdiff
