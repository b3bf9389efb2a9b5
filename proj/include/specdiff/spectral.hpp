// SPDX-License-Identifier: Apache-2.0
//
// Orthonormal 2D spectral transforms over the spatial axes of a Field.
//
// Layout conventions, per transform:
//   DCT  type-II, orthonormal. Coefficient (ky, kx) stored at row ky, column
//        kx; low frequencies occupy the top-left corner.
//   DWT  Haar with 1/sqrt(2) filters, Mallat layout, decomposed while both
//        dimensions stay even. The approximation band sits top-left, so a
//        grid's full decomposition is the top-left block of the decomposition
//        of any power-of-two multiple of it.
//   FFT  unitary DFT (1/sqrt(hw)) shifted so DC sits at (h/2, w/2). Row r
//        holds frequency r - h/2.
//
// Frequencies are measured in index units: the l2 norm of the per-axis
// integer frequency indices. One cycle over the grid spans two DCT/DWT
// indices and one FFT index.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "specdiff/common.hpp"
#include "specdiff/field.hpp"

namespace specdiff {

enum class TransformKind { DCT, DWT, FFT };

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view text);

/// Spectral coefficients of a Field. DCT and DWT coefficients are real (zero
/// imaginary part); FFT coefficients are Hermitian-symmetric.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(TransformKind kind, Shape shape);

  TransformKind kind() const { return kind_; }
  const Shape& shape() const { return shape_; }
  Grid grid() const { return shape_.grid(); }

  std::span<std::complex<double>> coeffs() { return coeffs_; }
  std::span<const std::complex<double>> coeffs() const { return coeffs_; }
  std::span<std::complex<double>> plane(std::size_t p);
  std::span<const std::complex<double>> plane(std::size_t p) const;

  Spectrum& operator*=(double s);
  double energy() const;

 private:
  TransformKind kind_ = TransformKind::DCT;
  Shape shape_{};
  std::vector<std::complex<double>> coeffs_;
};

/// Maps coefficient positions of one grid/transform to frequencies.
class FrequencyGeometry {
 public:
  FrequencyGeometry(Grid grid, TransformKind kind);

  Grid grid() const { return grid_; }
  TransformKind kind() const { return kind_; }

  /// Signed per-axis frequency indices of the coefficient at (row, col).
  std::pair<int, int> frequency_index(std::size_t row, std::size_t col) const;
  /// |ω| in index units. Throws on an out-of-range position.
  double radial(std::size_t row, std::size_t col) const;
  /// Radial frequency of every coefficient position, row-major.
  std::vector<double> radial_map() const;

  /// Index units per cycle over the grid: 2 for DCT/DWT, 1 for FFT.
  double indices_per_cycle() const;
  /// Maximum fully representable radial frequency, min(h, w)/2 cycles.
  double nyquist_cap() const;
  double nyquist_cap_index() const { return nyquist_cap() * indices_per_cycle(); }

 private:
  Grid grid_;
  TransformKind kind_;
};

double nyquist_cap(Grid grid);
double indices_per_cycle(TransformKind kind);

namespace spectral {

Spectrum forward(const Field& field, TransformKind kind);
Field inverse(const Spectrum& spectrum);

/// |ω| of a coefficient position; same as geometry.radial.
double radial_frequency(const FrequencyGeometry& geometry, std::size_t row,
                        std::size_t col);

/// Places `low` in the low-frequency band of `target`; every other slot is 0.
Spectrum embed(const Spectrum& low, Grid target);
/// Adjoint of embed: reads the low-frequency band of `spectrum` on `target`.
/// extract(embed(x, g), x.grid()) == x.
Spectrum extract(const Spectrum& spectrum, Grid target);

/// Slots of `large` written by embed from `small` (row-major, true = shared
/// band). Everything else is the newly exposed band.
std::vector<bool> low_band_mask(Grid small, Grid large, TransformKind kind);

/// Throws unless `small` nests in `large` for this transform: strictly
/// smaller in both dimensions, equal aspect ratio, and for DWT a
/// power-of-two ratio.
void check_nesting(Grid small, Grid large, TransformKind kind);

/// Number of Haar levels used on this grid (0 if a dimension is odd).
std::size_t dwt_levels(Grid grid);

/// Spectrum of i.i.d. standard-normal spatial noise: unit-variance
/// coefficients, Hermitian for FFT.
Spectrum white_noise(Shape shape, TransformKind kind, Rng& rng);

/// Throws if an FFT spectrum is not Hermitian within `tolerance` relative to
/// its largest coefficient.
void check_hermitian(const Spectrum& spectrum, double tolerance = 1e-9);

}  // namespace spectral
}  // namespace specdiff
