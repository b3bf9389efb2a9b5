// SPDX-License-Identifier: Apache-2.0
#include "specdiff/power_spectrum.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace specdiff {

PowerLaw::PowerLaw(double A, double beta, double r_squared)
    : A_(A), beta_(beta), r_squared_(r_squared) {
  if (!(A > 0.0) || !std::isfinite(A) || !std::isfinite(beta)) {
    throw Error("spectrum", "power law needs finite A > 0 and finite beta");
  }
}

double PowerLaw::evaluate(double omega) const {
  if (!(omega > 0.0)) throw Error("spectrum", "power law evaluated at omega <= 0");
  return std::max(A_ * std::pow(omega, -beta_), 1e-12);
}

const PowerLaw& PowerLaw::require_decreasing() const {
  if (!is_decreasing()) {
    throw Error("spectrum", "power law must be strictly decreasing (beta > 0), got beta = " +
                                std::to_string(beta_));
  }
  return *this;
}

RadialSpectrum estimate_radial_spectrum(const std::vector<Field>& batch, TransformKind kind,
                                        std::size_t threads) {
  if (batch.empty()) throw Error("spectrum", "empty batch");
  const Shape shape = batch.front().shape();
  for (const auto& f : batch) {
    if (!(f.shape() == shape)) {
      throw Error("spectrum", "dimension mismatch in batch: " + to_string(f.shape()) +
                                  " vs " + to_string(shape));
    }
  }
  const Grid g = shape.grid();
  const FrequencyGeometry geometry(g, kind);
  const auto radial = geometry.radial_map();
  std::vector<std::size_t> bin_of(radial.size());
  std::size_t n_bins = 0;
  for (std::size_t i = 0; i < radial.size(); ++i) {
    bin_of[i] = static_cast<std::size_t>(std::floor(radial[i] + 0.5));
    n_bins = std::max(n_bins, bin_of[i] + 1);
  }

  std::vector<std::vector<double>> partial(batch.size(), std::vector<double>(n_bins, 0.0));
  parallel_for(batch.size(), threads, [&](std::size_t s) {
    Field centered = batch[s];
    const std::size_t area = g.area();
    for (std::size_t c = 0; c < shape.channels; ++c) {
      double mean = 0.0;
      for (std::size_t f = 0; f < shape.frames; ++f)
        for (double v : centered.plane(c * shape.frames + f)) mean += v;
      mean /= static_cast<double>(area * shape.frames);
      for (std::size_t f = 0; f < shape.frames; ++f)
        for (double& v : centered.plane(c * shape.frames + f)) v -= mean;
    }
    const Spectrum spec = spectral::forward(centered, kind);
    for (std::size_t p = 0; p < shape.planes(); ++p) {
      const auto plane = spec.plane(p);
      for (std::size_t i = 0; i < area; ++i) partial[s][bin_of[i]] += std::norm(plane[i]);
    }
  });

  std::vector<double> total(n_bins, 0.0);
  for (const auto& row : partial)
    for (std::size_t b = 0; b < n_bins; ++b) total[b] += row[b];
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t b : bin_of) ++count[b];

  RadialSpectrum out;
  out.grid = g;
  out.n_samples = batch.size();
  out.kind = kind;
  const double per_slot = static_cast<double>(batch.size() * shape.planes());
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    out.bins.push_back({static_cast<double>(b),
                        total[b] / (per_slot * static_cast<double>(count[b])), count[b],
                        b == 0});
  }
  return out;
}

PowerLaw fit_power_law(const RadialSpectrum& spectrum, const FitOptions& options) {
  std::vector<double> xs, ys, ws;
  for (const auto& bin : spectrum.bins) {
    if (bin.excluded_from_fit || bin.omega <= 0.0) continue;
    if (options.omega_min && bin.omega < *options.omega_min) continue;
    if (options.omega_max && bin.omega > *options.omega_max) continue;
    if (!(bin.power > 0.0)) {
      throw Error("spectrum", "nonpositive power " + std::to_string(bin.power) +
                                  " at omega = " + std::to_string(bin.omega) +
                                  " inside the fit range");
    }
    xs.push_back(std::log(bin.omega));
    ys.push_back(std::log(bin.power));
    ws.push_back(options.weighting == FitWeighting::Count ? static_cast<double>(bin.count)
                                                          : 1.0);
  }
  if (xs.size() < 2) {
    throw Error("spectrum", "power-law fit needs at least 2 non-DC bins, got " +
                                std::to_string(xs.size()));
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    syy += ws[i] * (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw Error("spectrum", "fit bins share a single frequency");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += ws[i] * r * r;
  }
  const double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return PowerLaw(std::exp(intercept), -slope, r2);
}

double snr(const PowerLaw& law, double omega, double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error("spectrum", "snr needs t in (0, 1)");
  if (!(omega > 0.0)) throw Error("spectrum", "snr needs omega > 0");
  const double ratio = (1.0 - t) / t;
  return ratio * ratio * law.evaluate(omega);
}

std::string spectrum_to_csv(const RadialSpectrum& spectrum) {
  std::ostringstream out;
  out.precision(17);
  out << "omega,power,count\n";
  for (const auto& bin : spectrum.bins)
    out << bin.omega << ',' << bin.power << ',' << bin.count << '\n';
  return out.str();
}

std::string power_law_to_json(const PowerLaw& law, std::optional<Grid> grid) {
  nlohmann::json j;
  j["A"] = law.A();
  j["beta"] = law.beta();
  j["r_squared"] = law.r_squared();
  if (grid) j["grid"] = {grid->h, grid->w};
  return j.dump(2) + "\n";
}

PowerLaw power_law_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return PowerLaw(j.at("A").get<double>(), j.at("beta").get<double>(),
                    j.value("r_squared", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw Error("spectrum", std::string("malformed power-law record: ") + e.what());
  }
}

}  // namespace specdiff
