// SPDX-License-Identifier: Apache-2.0
//
// Linear-Gaussian world: spectral coefficients x0(ω) ~ N(0, P(ω))
// independently, for which the Bayes-optimal velocity is a per-coefficient
// linear gain.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specdiff/power_spectrum.hpp"
#include "specdiff/spectral.hpp"
#include "specdiff/velocity_model.hpp"

namespace specdiff {

class GaussianModel {
 public:
  /// dc_power defaults to P(1).
  GaussianModel(PowerLaw law, Shape full_shape, TransformKind kind,
                std::optional<double> dc_power = std::nullopt);

  const PowerLaw& power_law() const { return law_; }
  const Shape& shape() const { return shape_; }
  Grid grid() const { return shape_.grid(); }
  TransformKind kind() const { return kind_; }
  double dc_power() const { return dc_power_; }

  /// Per-coefficient power on `grid`, a downscaled copy of the full grid.
  /// At linear scale s = grid.h / H the power is s²·P at the same index.
  std::vector<double> power_map(Grid grid) const;
  std::vector<double> power_map() const { return power_map(grid()); }

  std::string to_json() const;

 private:
  PowerLaw law_;
  Shape shape_;
  TransformKind kind_;
  double dc_power_;
};

/// Draws a clean field with independent N(0, P) coefficients on `grid`
/// (defaults to the full grid).
Field sample_clean(const GaussianModel& model, std::uint64_t seed,
                   std::optional<Grid> grid = std::nullopt);

/// Gain A with E[ε − x0 | x_t] = A·x_t for a coefficient of power P.
/// Endpoints use the analytic limits 1 (t = 1) and −1 (t = 0).
double optimal_gain(double power, double t);

/// E|v* − ε|² = SNR(1 + P) / (1 + SNR), SNR = ((1−t)/t)²·P.
double velocity_error(double power, double t);

Field optimal_velocity(const GaussianModel& model, const Field& x_t, double t);

/// velocity_error averaged over every coefficient of the full grid.
double flow_matching_loss_optimal(const GaussianModel& model, double t);

/// Oracle velocity usable by the sampler at any stage grid.
class OracleVelocity final : public VelocityModel {
 public:
  explicit OracleVelocity(GaussianModel model) : model_(std::move(model)) {}

  Field evaluate(const Field& x, double t) const override;
  std::string id() const override;
  const GaussianModel& model() const { return model_; }

 private:
  const std::vector<double>& powers(Grid grid) const;

  GaussianModel model_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<std::vector<double>>>
      cache_;
};

}  // namespace specdiff
