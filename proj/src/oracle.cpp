// SPDX-License-Identifier: Apache-2.0
#include "specdiff/oracle.hpp"

#include <cmath>

#include <json.hpp>

namespace specdiff {

GaussianModel::GaussianModel(PowerLaw law, Shape full_shape, TransformKind kind,
                             std::optional<double> dc_power)
    : law_(law), shape_(full_shape), kind_(kind), dc_power_(dc_power.value_or(law.evaluate(1.0))) {
  if (full_shape.size() == 0) throw Error("oracle", "model shape must be nonempty");
  if (!(dc_power_ > 0.0)) throw Error("oracle", "dc_power must be positive");
}

std::vector<double> GaussianModel::power_map(Grid g) const {
  const Grid full = grid();
  if (!(g == full)) {
    if (g.h > full.h || g.w > full.w || g.h * full.w != g.w * full.h) {
      throw Error("oracle", "grid " + to_string(g) + " is not a downscaled copy of " +
                                to_string(full));
    }
  }
  const double s = static_cast<double>(g.h) / static_cast<double>(full.h);
  const FrequencyGeometry geometry(g, kind_);
  std::vector<double> out(g.area());
  for (std::size_t y = 0; y < g.h; ++y) {
    for (std::size_t x = 0; x < g.w; ++x) {
      const double omega = geometry.radial(y, x);
      const double p = omega > 0.0 ? law_.evaluate(omega) : dc_power_;
      out[y * g.w + x] = s * s * p;
    }
  }
  return out;
}

std::string GaussianModel::to_json() const {
  nlohmann::json j;
  j["A"] = law_.A();
  j["beta"] = law_.beta();
  j["r_squared"] = law_.r_squared();
  j["grid"] = {shape_.h, shape_.w};
  j["channels"] = shape_.channels;
  j["frames"] = shape_.frames;
  j["transform"] = std::string(to_string(kind_));
  j["dc_power"] = dc_power_;
  return j.dump(2) + "\n";
}

Field sample_clean(const GaussianModel& model, std::uint64_t seed, std::optional<Grid> grid) {
  const Grid g = grid.value_or(model.grid());
  const auto power = model.power_map(g);
  Rng rng(seed);
  Spectrum spec = spectral::white_noise(model.shape().with_grid(g), model.kind(), rng);
  for (std::size_t p = 0; p < spec.shape().planes(); ++p) {
    auto plane = spec.plane(p);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] *= std::sqrt(power[i]);
  }
  return spectral::inverse(spec);
}

double optimal_gain(double power, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("oracle", "gain needs t in [0, 1]");
  if (t == 1.0) return 1.0;
  if (t == 0.0) return -1.0;
  const double s = 1.0 - t;
  return (t - s * power) / (s * s * power + t * t);
}

double velocity_error(double power, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("oracle", "velocity error needs t in [0, 1]");
  if (t == 1.0) return 0.0;
  if (t == 0.0) return 1.0 + power;
  const double ratio = (1.0 - t) / t;
  const double snr = ratio * ratio * power;
  return snr * (1.0 + power) / (1.0 + snr);
}

Field optimal_velocity(const GaussianModel& model, const Field& x_t, double t) {
  const auto power = model.power_map(x_t.grid());
  Spectrum spec = spectral::forward(x_t, model.kind());
  for (std::size_t p = 0; p < spec.shape().planes(); ++p) {
    auto plane = spec.plane(p);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] *= optimal_gain(power[i], t);
  }
  return spectral::inverse(spec);
}

double flow_matching_loss_optimal(const GaussianModel& model, double t) {
  const auto power = model.power_map();
  double acc = 0.0;
  for (double p : power) acc += velocity_error(p, t);
  return acc / static_cast<double>(power.size());
}

const std::vector<double>& OracleVelocity::powers(Grid grid) const {
  std::lock_guard lock(mutex_);
  auto& slot = cache_[{grid.h, grid.w}];
  if (!slot) slot = std::make_shared<std::vector<double>>(model_.power_map(grid));
  return *slot;
}

Field OracleVelocity::evaluate(const Field& x, double t) const {
  const auto& power = powers(x.grid());
  Spectrum spec = spectral::forward(x, model_.kind());
  for (std::size_t p = 0; p < spec.shape().planes(); ++p) {
    auto plane = spec.plane(p);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] *= optimal_gain(power[i], t);
  }
  return spectral::inverse(spec);
}

std::string OracleVelocity::id() const {
  return "oracle(A=" + std::to_string(model_.power_law().A()) +
         ",beta=" + std::to_string(model_.power_law().beta()) + "," +
         std::string(to_string(model_.kind())) + ")";
}

}  // namespace specdiff
