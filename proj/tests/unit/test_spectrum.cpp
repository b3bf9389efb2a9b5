// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "specdiff/oracle.hpp"
#include "specdiff/power_spectrum.hpp"

using namespace specdiff;

namespace {

RadialSpectrum synthetic(const std::vector<std::pair<double, double>>& bins) {
  RadialSpectrum s;
  s.bins.push_back({0.0, 5.0, 1, true});
  for (auto [omega, power] : bins) s.bins.push_back({omega, power, 4, false});
  return s;
}

}  // namespace

TEST_CASE("all-zero and constant batches give zero power") {
  std::vector<Field> zeros(3, Field(Shape{1, 1, 8, 8}));
  for (const auto& bin : estimate_radial_spectrum(zeros, TransformKind::DCT).bins)
    CHECK(bin.power == 0.0);
  Field c(Shape{2, 1, 8, 8});
  for (double& v : c.values()) v = 4.5;
  for (const auto& bin : estimate_radial_spectrum({c}, TransformKind::FFT).bins)
    CHECK(bin.power < 1e-24);
}

TEST_CASE("white noise has a flat spectrum") {
  std::vector<Field> batch;
  for (std::uint64_t i = 0; i < 1000; ++i) batch.push_back(testing::random_field(Shape{1, 1, 32, 32}, i));
  const auto spec = estimate_radial_spectrum(batch, TransformKind::DCT);
  CHECK(spec.bins.front().excluded_from_fit);
  for (const auto& bin : spec.bins) {
    if (bin.omega == 0.0) continue;
    CHECK(bin.power == doctest::Approx(1.0).epsilon(0.05));
  }
  for (std::size_t i = 1; i < spec.bins.size(); ++i) CHECK(spec.bins[i].omega > spec.bins[i - 1].omega);
}

TEST_CASE("exact power law is recovered") {
  std::vector<std::pair<double, double>> bins;
  for (double w = 1; w <= 20; ++w) bins.emplace_back(w, 100.0 * std::pow(w, -2.0));
  const PowerLaw law = fit_power_law(synthetic(bins));
  CHECK(std::abs(law.A() - 100.0) < 1e-9);
  CHECK(std::abs(law.beta() - 2.0) < 1e-9);
  CHECK(std::abs(law.r_squared() - 1.0) < 1e-9);

  const PowerLaw two = fit_power_law(synthetic({{1, 8}, {2, 1}}));
  CHECK(two.beta() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(two.A() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("fit is scale-equivariant and honours windows and weighting") {
  std::vector<std::pair<double, double>> bins, scaled;
  Rng rng(1);
  for (double w = 1; w <= 30; ++w) {
    const double p = 7.0 * std::pow(w, -1.5) * std::exp(0.1 * rng.normal());
    bins.emplace_back(w, p);
    scaled.emplace_back(w, 3.0 * p);
  }
  const PowerLaw a = fit_power_law(synthetic(bins));
  const PowerLaw b = fit_power_law(synthetic(scaled));
  CHECK(b.A() == doctest::Approx(3.0 * a.A()).epsilon(1e-10));
  CHECK(b.beta() == doctest::Approx(a.beta()).epsilon(1e-10));

  FitOptions window;
  window.omega_min = 5;
  window.omega_max = 10;
  CHECK_NOTHROW(fit_power_law(synthetic(bins), window));
  window.omega_min = 9.5;
  CHECK_THROWS_AS(fit_power_law(synthetic(bins), window), Error);
  FitOptions weighted;
  weighted.weighting = FitWeighting::Count;
  CHECK(fit_power_law(synthetic(bins), weighted).beta() == doctest::Approx(a.beta()));
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_power_law(synthetic({{1, 1}})), Error);
  CHECK_THROWS_AS(fit_power_law(synthetic({{1, 1}, {2, 0}})), Error);
  CHECK_THROWS_AS(estimate_radial_spectrum({}, TransformKind::DCT), Error);
  CHECK_THROWS_AS(estimate_radial_spectrum({Field(Shape{1, 1, 4, 4}), Field(Shape{1, 1, 4, 8})},
                                           TransformKind::DCT),
                  Error);
}

TEST_CASE("snr closed form") {
  const PowerLaw law(4.0, 1.0);
  CHECK(snr(law, 1.0, 0.5) == doctest::Approx(4.0));
  CHECK(snr(law, 1.0, 1.0 / 3.0) == doctest::Approx(16.0));
  CHECK(snr(law, 1.0, 1.0 - 1e-9) < 1e-15);
  CHECK_THROWS_AS(snr(law, 1.0, 1.0), Error);
  CHECK_THROWS_AS(snr(law, 0.0, 0.5), Error);
  CHECK(law.evaluate(1e30) == 1e-12);
  CHECK_THROWS_AS(PowerLaw(1.0, 0.0).require_decreasing(), Error);
}

TEST_CASE("oracle samples reproduce the generating spectrum within 3 sigma") {
  const PowerLaw law(50.0, 1.5);
  const GaussianModel model(law, Shape{1, 1, 16, 16}, TransformKind::DCT);
  std::vector<Field> batch;
  for (std::uint64_t i = 0; i < 1000; ++i) batch.push_back(sample_clean(model, i));
  const auto spec = estimate_radial_spectrum(batch, TransformKind::DCT);
  const auto power = model.power_map();
  const FrequencyGeometry geom({16, 16}, TransformKind::DCT);
  for (const auto& bin : spec.bins) {
    if (bin.omega == 0.0) continue;
    // Expected bin mean and its standard error (|c|^2 of N(0, P) has variance 2P^2).
    double mean = 0.0, var = 0.0;
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x)
        if (std::floor(geom.radial(y, x) + 0.5) == bin.omega) {
          mean += power[y * 16 + x];
          var += 2.0 * power[y * 16 + x] * power[y * 16 + x];
        }
    mean /= bin.count;
    const double se = std::sqrt(var / 1000.0) / bin.count;
    CHECK(std::abs(bin.power - mean) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("records") {
  RadialSpectrum s = synthetic({{1, 2}, {2, 0.5}});
  const std::string csv = spectrum_to_csv(s);
  CHECK(csv.rfind("omega,power,count\n", 0) == 0);
  const PowerLaw law(203.62, 1.9155, 0.978);
  const PowerLaw back = power_law_from_json(power_law_to_json(law, Grid{128, 128}));
  CHECK(back.A() == law.A());
  CHECK(back.beta() == law.beta());
  CHECK(back.r_squared() == law.r_squared());
  CHECK_THROWS_AS(power_law_from_json("{\"A\": 1}"), Error);
}
