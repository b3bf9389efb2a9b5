// SPDX-License-Identifier: Apache-2.0
//
// Frequency-domain editing: keep the low band of an input at scale s_k,
// re-noise it to the transition level t_k, expand, and resume sampling.
#pragma once

#include <cstddef>
#include <cstdint>

#include "specdiff/sampler.hpp"

namespace specdiff {

struct EditOptions {
  /// Blend the kept low band to (1−t_k)·low + t_k·ε before expansion. When
  /// false the clean low band is expanded as is.
  bool renoise_low_band = true;
  /// Multiplies every injected noise draw; 0 gives a deterministic edit.
  double noise_scale = 1.0;
};

struct EditResult {
  Field output;
  double start_time = 1.0;    // t_k
  double aligned_time = 1.0;  // t̃_k, where integration resumes
  std::size_t skipped_steps = 0;
  /// Denoising time the edit does not integrate: the skipped steps' time
  /// minus earlier alignment jumps. Equals 1 − t_k.
  double skipped_time = 0.0;
  std::size_t remaining_steps = 0;
  Trajectory trajectory;
};

/// k is the 1-based transition index, 1 ≤ k ≤ S−1.
EditResult edit(const Field& input, const Schedule& schedule, std::size_t k,
                const VelocityModel& model, TransformKind kind, std::uint64_t seed,
                const EditOptions& options = {});

/// Spatial-domain comparison: corrupt the whole field to the noise level of
/// solver index `start_index` and resume full-resolution sampling.
EditResult sdedit_baseline(const Field& input, const SolverGrid& solver, std::size_t start_index,
                           const VelocityModel& model, TransformKind kind, std::uint64_t seed);

/// Pearson correlation of two equally shaped fields.
double correlation(const Field& a, const Field& b);

}  // namespace specdiff
