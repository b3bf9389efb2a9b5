// SPDX-License-Identifier: Apache-2.0
//
// Radially averaged power spectra and power-law fits P(ω) = A·|ω|^(−β).
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "specdiff/field.hpp"
#include "specdiff/spectral.hpp"

namespace specdiff {

struct RadialBin {
  double omega = 0.0;  // bin center, index units
  double power = 0.0;  // mean |coeff|^2
  std::size_t count = 0;
  bool excluded_from_fit = false;
};

struct RadialSpectrum {
  std::vector<RadialBin> bins;
  Grid grid;
  std::size_t n_samples = 0;
  TransformKind kind = TransformKind::DCT;
};

class PowerLaw {
 public:
  PowerLaw() = default;
  PowerLaw(double A, double beta, double r_squared = 1.0);

  double A() const { return A_; }
  double beta() const { return beta_; }
  double r_squared() const { return r_squared_; }

  /// A·ω^(−β), clamped below at 1e-12. Requires ω > 0.
  double evaluate(double omega) const;
  bool is_decreasing() const { return beta_ > 0.0; }

  /// Throws unless A > 0 and β > 0, as required for scheduling.
  const PowerLaw& require_decreasing() const;

 private:
  double A_ = 1.0;
  double beta_ = 0.0;
  double r_squared_ = 1.0;
};

enum class FitWeighting { Unweighted, Count };

struct FitOptions {
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  FitWeighting weighting = FitWeighting::Unweighted;
};

/// Centers each sample per channel, transforms, and averages |coeff|^2 over
/// channels, frames, samples and unit-width radial bins [k−½, k+½).
RadialSpectrum estimate_radial_spectrum(const std::vector<Field>& batch, TransformKind kind,
                                        std::size_t threads = 1);

/// Log-log least squares over the non-DC bins inside the window.
PowerLaw fit_power_law(const RadialSpectrum& spectrum, const FitOptions& options = {});

/// ((1−t)²/t²)·P(ω).
double snr(const PowerLaw& law, double omega, double t);

std::string spectrum_to_csv(const RadialSpectrum& spectrum);
std::string power_law_to_json(const PowerLaw& law, std::optional<Grid> grid = std::nullopt);
PowerLaw power_law_from_json(const std::string& text);

}  // namespace specdiff
