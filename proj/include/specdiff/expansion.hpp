// SPDX-License-Identifier: Apache-2.0
//
// Resolution transition operator: spectral noise expansion followed by
// timestep alignment, plus the passthrough filter used to probe activation.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "specdiff/field.hpp"
#include "specdiff/power_spectrum.hpp"
#include "specdiff/schedule.hpp"
#include "specdiff/spectral.hpp"

namespace specdiff {

struct FlowState {
  Field field;
  double t = 1.0;
  std::size_t stage = 0;
};

/// Moves `state` from stage i to i+1. The state must sit at the snapped
/// transition time t_i. The low band is embedded, new slots get t_i·ε with
/// ε drawn from `seed`, the result is scaled by κ_i and re-timed to t̃_i.
FlowState expand(const FlowState& state, const Schedule& schedule, TransformKind kind,
                 std::uint64_t seed);

/// As expand, with new-band noise read from `noise`, a spectrum on the next
/// stage grid. Only its new-band slots are used.
FlowState expand_with_noise(const FlowState& state, const Schedule& schedule,
                            TransformKind kind, const Spectrum& noise);

/// Replaces every coefficient whose activation time lies below the current t
/// (not yet activated) with t·T(ε), ε the trajectory's initial noise. The
/// state is returned untouched when nothing qualifies.
FlowState passthrough_filter(const FlowState& state, const Field& initial_noise,
                             const PowerLaw& law, double delta, TransformKind kind,
                             std::optional<double> dc_power = std::nullopt);

/// Activation time of every coefficient on `grid` (row-major).
std::vector<double> activation_map(Grid grid, const PowerLaw& law, double delta,
                                   TransformKind kind,
                                   std::optional<double> dc_power = std::nullopt);

}  // namespace specdiff
