// SPDX-License-Identifier: Apache-2.0
#include "specdiff/targets.hpp"

#include <cmath>
#include <sstream>

#include "specdiff/expansion.hpp"

namespace specdiff {
namespace {

constexpr double kTimeSlack = 1e-12;

// Training example in coefficient space; gains act per coefficient.
struct SpectralExample {
  std::size_t stage = 0;
  double t = 0.0;
  Spectrum input;
  Spectrum target;
};

SpectralExample to_spectral(const StageSample& s, TransformKind kind) {
  return {s.stage, s.t, spectral::forward(s.input, kind), spectral::forward(s.target, kind)};
}

}  // namespace

double stage_start_time(const Schedule& schedule, std::size_t stage) {
  if (stage >= schedule.stages()) throw Error("targets", "stage index out of range");
  return stage == 0 ? 1.0 : schedule.aligned_times[stage - 1];
}

double stage_end_time(const Schedule& schedule, std::size_t stage) {
  if (stage >= schedule.stages()) throw Error("targets", "stage index out of range");
  return stage + 1 == schedule.stages() ? 0.0 : schedule.transitions[stage];
}

std::size_t assign_stage(double t, const Schedule& schedule) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("targets", "time must lie in [0, 1]");
  for (std::size_t i = 0; i < schedule.transitions.size(); ++i) {
    if (t >= schedule.transitions[i]) return i;
  }
  return schedule.stages() - 1;
}

Field downsample_clean(const Field& x0, Grid grid, TransformKind kind) {
  if (grid == x0.grid()) return x0;
  const double r = static_cast<double>(x0.grid().h) / static_cast<double>(grid.h);
  Spectrum low = spectral::extract(spectral::forward(x0, kind), grid);
  low *= 1.0 / r;
  return spectral::inverse(low);
}

StageSample make_stage_sample_in_stage(const Field& x0, double t, std::size_t stage,
                                       const Schedule& schedule, TransformKind kind,
                                       std::uint64_t seed) {
  if (!(x0.grid() == schedule.full_grid)) {
    throw Error("targets", "clean field grid " + to_string(x0.grid()) +
                               " is not the schedule's full grid " +
                               to_string(schedule.full_grid));
  }
  if (!(t > 0.0 && t < 1.0)) throw Error("targets", "sample time must lie strictly in (0, 1)");
  const double t_start = stage_start_time(schedule, stage);
  const double t_end = stage_end_time(schedule, stage);
  if (!(t_start > t_end)) throw Error("targets", "degenerate stage interval");
  if (t < t_end - kTimeSlack || t > t_start + kTimeSlack) {
    throw Error("targets", "time " + std::to_string(t) + " lies outside stage " +
                               std::to_string(stage + 1) + " interval [" +
                               std::to_string(t_end) + ", " + std::to_string(t_start) + "]");
  }

  const Grid grid = schedule.stage_grid(stage);
  const Shape shape = x0.shape().with_grid(grid);
  StageSample s;
  s.stage = stage;
  s.t = t;
  s.t_start = t_start;
  s.t_end = t_end;
  s.clean = downsample_clean(x0, grid, kind);

  Rng rng(seed);
  const Spectrum eps = spectral::white_noise(shape, kind, rng);
  s.noise = spectral::inverse(eps);

  s.x_end = (1.0 - t_end) * s.clean;
  s.x_end.axpy(t_end, s.noise);

  if (stage == 0) {
    s.x_tilde = s.noise;
  } else {
    // Previous stage state at its transition, built from the same ε, then
    // expanded with that ε's new-band slots.
    const Grid prev = schedule.stage_grid(stage - 1);
    const double t_prev = schedule.transitions[stage - 1];
    Spectrum low = spectral::extract(spectral::forward(s.clean, kind), prev);
    low *= (1.0 - t_prev) * static_cast<double>(prev.h) / static_cast<double>(grid.h);
    const Spectrum eps_low = spectral::extract(eps, prev);
    auto dst = low.coeffs();
    const auto src = eps_low.coeffs();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += t_prev * src[k];
    const FlowState before{spectral::inverse(low), t_prev, stage - 1};
    s.x_tilde = expand_with_noise(before, schedule, kind, eps).field;
  }

  s.target = s.x_tilde - s.x_end;
  s.target *= 1.0 / (t_start - t_end);
  s.input = s.x_end;
  s.input.axpy(t - t_end, s.target);
  return s;
}

StageSample make_stage_sample(const Field& x0, double t, const Schedule& schedule,
                              TransformKind kind, std::uint64_t seed) {
  if (!(t > 0.0 && t < 1.0)) throw Error("targets", "sample time must lie strictly in (0, 1)");
  return make_stage_sample_in_stage(x0, t, assign_stage(t, schedule), schedule, kind, seed);
}

std::vector<double> analytic_stage_gain(const GaussianModel& model, const Schedule& schedule,
                                        std::size_t stage, double t) {
  const Grid grid = schedule.stage_grid(stage);
  const auto power = model.power_map(grid);
  const double t_s = stage_start_time(schedule, stage);
  const double t_e = stage_end_time(schedule, stage);
  std::vector<bool> shared(grid.area(), true);
  if (stage > 0) shared = spectral::low_band_mask(schedule.stage_grid(stage - 1), grid, model.kind());

  // New band: x_t = a·x0 + t·ε and v = ε − b·x0.
  const double b = (1.0 - t_e) / (t_s - t_e);
  const double a = (1.0 - t_e) * (t_s - t) / (t_s - t_e);
  std::vector<double> gain(grid.area());
  for (std::size_t k = 0; k < gain.size(); ++k) {
    if (shared[k]) {
      gain[k] = optimal_gain(power[k], t);
    } else {
      const double p = power[k];
      gain[k] = (t - a * b * p) / (a * a * p + t * t);
    }
  }
  return gain;
}

ToyNet::ToyNet(const Schedule& schedule, TransformKind kind) : kind_(kind) {
  const std::size_t n = schedule.solver.n_steps;
  for (std::size_t j = 0; j < schedule.stages(); ++j) {
    grids_.push_back(schedule.stage_grid(j));
    std::vector<double> knots;
    for (std::size_t k = 0; k < n; ++k) {
      if (schedule.stage_of_step[k] == j && schedule.departure_times[k] < 1.0) {
        knots.push_back(schedule.departure_times[k]);
      }
    }
    if (knots.empty()) {
      knots.push_back(0.5 * (stage_start_time(schedule, j) + stage_end_time(schedule, j)));
    }
    gains_.emplace_back(knots.size() * grids_.back().area(), 0.0);
    knots_.push_back(std::move(knots));
  }
}

std::size_t ToyNet::stage_of_grid(Grid grid) const {
  for (std::size_t j = 0; j < grids_.size(); ++j)
    if (grids_[j] == grid) return j;
  throw Error("targets", "toy model has no stage on grid " + to_string(grid));
}

std::vector<std::pair<std::size_t, double>> ToyNet::embedding(std::size_t stage,
                                                              double t) const {
  const auto& k = knots_.at(stage);
  if (t >= k.front()) return {{0, 1.0}};
  if (t <= k.back()) return {{k.size() - 1, 1.0}};
  std::size_t m = 0;
  while (!(k[m] >= t && t > k[m + 1])) ++m;
  const double w = (t - k[m + 1]) / (k[m] - k[m + 1]);
  return {{m, w}, {m + 1, 1.0 - w}};
}

std::vector<double> ToyNet::gains_at(std::size_t stage, double t) const {
  const std::size_t area = grids_.at(stage).area();
  std::vector<double> g(area, 0.0);
  for (const auto& [m, w] : embedding(stage, t)) {
    const double* row = gains_[stage].data() + m * area;
    for (std::size_t c = 0; c < area; ++c) g[c] += w * row[c];
  }
  return g;
}

Field ToyNet::evaluate(const Field& x, double t) const {
  const std::size_t stage = stage_of_grid(x.grid());
  const auto g = gains_at(stage, t);
  Spectrum spec = spectral::forward(x, kind_);
  for (std::size_t p = 0; p < spec.shape().planes(); ++p) {
    auto plane = spec.plane(p);
    for (std::size_t c = 0; c < plane.size(); ++c) plane[c] *= g[c];
  }
  return spectral::inverse(spec);
}

TrainResult train_toy(ToyNet& net, const GaussianModel& data, const Schedule& schedule,
                      const TrainOptions& options, std::uint64_t seed) {
  if (options.steps == 0) throw Error("targets", "training needs a positive step count");
  if (!(options.lr > 0.0)) throw Error("targets", "learning rate must be positive");
  if (!(data.grid() == schedule.full_grid)) {
    throw Error("targets", "data grid does not match the schedule");
  }
  const TransformKind kind = net.kind();

  std::vector<std::pair<std::size_t, double>> grid_times;
  for (std::size_t j = 0; j < net.stages(); ++j)
    for (double k : net.knots(j)) grid_times.emplace_back(j, k);

  auto make_example = [&](std::uint64_t example_seed) {
    Rng rng(derive_seed(example_seed, 0));
    const Field x0 = sample_clean(data, derive_seed(example_seed, 1));
    const std::uint64_t noise_seed = derive_seed(example_seed, 2);
    if (options.sampling == TimeSampling::Grid) {
      const auto [stage, t] = grid_times[rng.index(grid_times.size())];
      return to_spectral(make_stage_sample_in_stage(x0, t, stage, schedule, kind, noise_seed),
                         kind);
    }
    double t = 0.0;
    while (!(t > 0.0 && t < 1.0)) t = rng.uniform();
    return to_spectral(make_stage_sample(x0, t, schedule, kind, noise_seed), kind);
  };
  auto make_examples = [&](std::size_t count, std::uint64_t stream) {
    std::vector<SpectralExample> out(count);
    parallel_for(count, options.threads, [&](std::size_t e) {
      out[e] = make_example(derive_seed(seed, stream * 1'000'003ULL + e));
    });
    return out;
  };

  std::vector<SpectralExample> dataset;
  if (options.dataset_size > 0) dataset = make_examples(options.dataset_size, 1);

  std::vector<std::vector<double>> m1(net.stages()), m2(net.stages()), grad(net.stages());
  for (std::size_t j = 0; j < net.stages(); ++j) {
    m1[j].assign(net.gains(j).size(), 0.0);
    m2[j].assign(net.gains(j).size(), 0.0);
    grad[j].assign(net.gains(j).size(), 0.0);
  }

  Rng batch_rng(derive_seed(seed, 7));
  TrainResult result;
  for (std::size_t step = 0; step < options.steps; ++step) {
    std::vector<SpectralExample> fresh;
    std::vector<const SpectralExample*> batch;
    if (dataset.empty()) {
      fresh = make_examples(std::max<std::size_t>(options.batch, 1), 2 + step);
      for (const auto& e : fresh) batch.push_back(&e);
    } else if (options.batch == 0 || options.batch >= dataset.size()) {
      for (const auto& e : dataset) batch.push_back(&e);
    } else {
      for (std::size_t b = 0; b < options.batch; ++b)
        batch.push_back(&dataset[batch_rng.index(dataset.size())]);
    }

    for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
    double loss = 0.0;
    double count = 0.0;
    for (const SpectralExample* ex : batch) {
      const std::size_t j = ex->stage;
      const std::size_t area = net.grid(j).area();
      const auto emb = net.embedding(j, ex->t);
      const auto g = net.gains_at(j, ex->t);
      for (std::size_t p = 0; p < ex->input.shape().planes(); ++p) {
        const auto x = ex->input.plane(p);
        const auto v = ex->target.plane(p);
        for (std::size_t c = 0; c < area; ++c) {
          const std::complex<double> r = g[c] * x[c] - v[c];
          loss += std::norm(r);
          const double d = 2.0 * (std::conj(x[c]) * r).real();
          for (const auto& [m, w] : emb) grad[j][m * area + c] += w * d;
        }
      }
      count += static_cast<double>(area * ex->input.shape().planes());
    }
    loss /= count;
    if (!std::isfinite(loss)) {
      throw Error("targets", "training diverged at step " + std::to_string(step) +
                                 " (loss " + std::to_string(loss) + ", lr " +
                                 std::to_string(options.lr) + ")");
    }
    result.loss_curve.push_back(loss);
    if (net.frozen) continue;

    const double b1 = 0.9, b2 = 0.999;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step + 1));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step + 1));
    for (std::size_t j = 0; j < net.stages(); ++j) {
      auto& params = net.gains(j);
      for (std::size_t q = 0; q < params.size(); ++q) {
        const double gq = grad[j][q] / count;
        if (options.optimizer == Optimizer::SGD) {
          params[q] -= options.lr * gq;
        } else {
          m1[j][q] = b1 * m1[j][q] + (1.0 - b1) * gq;
          m2[j][q] = b2 * m2[j][q] + (1.0 - b2) * gq * gq;
          params[q] -= options.lr * (m1[j][q] / c1) / (std::sqrt(m2[j][q] / c2) + 1e-8);
        }
      }
    }
  }
  return result;
}

std::string loss_curve_to_csv(const TrainResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "step,loss\n";
  for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
    out << i << ',' << result.loss_curve[i] << '\n';
  return out.str();
}

}  // namespace specdiff
