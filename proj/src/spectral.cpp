// SPDX-License-Identifier: Apache-2.0
#include "specdiff/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace specdiff {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// FFTW's planner is not thread-safe; execution with the new-array interface
// is. Plans are created once per (transform, grid) and live for the process.
class PlanCache {
 public:
  enum class Op { DctForward, DctInverse, DftForward, DftBackward };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Op op, std::size_t h, std::size_t w) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(op, h, w);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const int n0 = static_cast<int>(h);
    const int n1 = static_cast<int>(w);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (op == Op::DctForward || op == Op::DctInverse) {
      std::vector<double> in(h * w), out(h * w);
      const fftw_r2r_kind kind = op == Op::DctForward ? FFTW_REDFT10 : FFTW_REDFT01;
      plan = fftw_plan_r2r_2d(n0, n1, in.data(), out.data(), kind, kind, flags);
    } else {
      std::vector<fftw_complex> in(h * w), out(h * w);
      const int sign = op == Op::DftForward ? FFTW_FORWARD : FFTW_BACKWARD;
      plan = fftw_plan_dft_2d(n0, n1, in.data(), out.data(), sign, flags);
    }
    if (plan == nullptr) throw Error("spectral", "FFTW failed to plan a transform");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Op, std::size_t, std::size_t>, fftw_plan> plans_;
};

// Orthonormal scale for DCT-II output index k on an axis of length n, applied
// to FFTW's unnormalized REDFT10 (which carries a factor 2 per axis).
double dct_forward_scale(std::size_t k, std::size_t n) {
  return k == 0 ? std::sqrt(1.0 / (4.0 * static_cast<double>(n)))
                : std::sqrt(1.0 / (2.0 * static_cast<double>(n)));
}

// Pre-scale turning orthonormal coefficients into REDFT01 input.
double dct_inverse_scale(std::size_t k, std::size_t n) {
  return k == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                : std::sqrt(1.0 / (2.0 * static_cast<double>(n)));
}

void dct_forward_plane(std::span<const double> in, std::span<std::complex<double>> out,
                       Grid g) {
  fftw_plan plan = PlanCache::instance().get(PlanCache::Op::DctForward, g.h, g.w);
  std::vector<double> src(in.begin(), in.end());
  std::vector<double> dst(g.area());
  fftw_execute_r2r(plan, src.data(), dst.data());
  for (std::size_t y = 0; y < g.h; ++y) {
    const double sy = dct_forward_scale(y, g.h);
    for (std::size_t x = 0; x < g.w; ++x) {
      out[y * g.w + x] = dst[y * g.w + x] * sy * dct_forward_scale(x, g.w);
    }
  }
}

void dct_inverse_plane(std::span<const std::complex<double>> in, std::span<double> out,
                       Grid g) {
  fftw_plan plan = PlanCache::instance().get(PlanCache::Op::DctInverse, g.h, g.w);
  std::vector<double> src(g.area());
  for (std::size_t y = 0; y < g.h; ++y) {
    const double sy = dct_inverse_scale(y, g.h);
    for (std::size_t x = 0; x < g.w; ++x) {
      src[y * g.w + x] = in[y * g.w + x].real() * sy * dct_inverse_scale(x, g.w);
    }
  }
  std::vector<double> dst(g.area());
  fftw_execute_r2r(plan, src.data(), dst.data());
  std::copy(dst.begin(), dst.end(), out.begin());
}

std::size_t shift_index(std::size_t k, std::size_t n) { return (k + n / 2) % n; }
std::size_t unshift_index(std::size_t r, std::size_t n) { return (r + n - n / 2) % n; }

void dft_forward_plane(std::span<const double> in, std::span<std::complex<double>> out,
                       Grid g) {
  fftw_plan plan = PlanCache::instance().get(PlanCache::Op::DftForward, g.h, g.w);
  std::vector<std::complex<double>> src(in.begin(), in.end());
  std::vector<std::complex<double>> dst(g.area());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(dst.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.area()));
  for (std::size_t ky = 0; ky < g.h; ++ky) {
    const std::size_t ry = shift_index(ky, g.h);
    for (std::size_t kx = 0; kx < g.w; ++kx) {
      out[ry * g.w + shift_index(kx, g.w)] = dst[ky * g.w + kx] * scale;
    }
  }
}

void dft_inverse_plane(std::span<const std::complex<double>> in, std::span<double> out,
                       Grid g) {
  fftw_plan plan = PlanCache::instance().get(PlanCache::Op::DftBackward, g.h, g.w);
  std::vector<std::complex<double>> src(g.area());
  for (std::size_t ry = 0; ry < g.h; ++ry) {
    const std::size_t ky = unshift_index(ry, g.h);
    for (std::size_t rx = 0; rx < g.w; ++rx) {
      src[ky * g.w + unshift_index(rx, g.w)] = in[ry * g.w + rx];
    }
  }
  std::vector<std::complex<double>> dst(g.area());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(dst.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.area()));
  for (std::size_t i = 0; i < g.area(); ++i) out[i] = dst[i].real() * scale;
}

// One Haar analysis step over `n` entries spaced by `stride`.
void haar_step(double* data, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  const std::size_t half = n / 2;
  tmp.resize(n);
  for (std::size_t k = 0; k < half; ++k) {
    const double a = data[(2 * k) * stride];
    const double b = data[(2 * k + 1) * stride];
    tmp[k] = (a + b) * kInvSqrt2;
    tmp[half + k] = (a - b) * kInvSqrt2;
  }
  for (std::size_t k = 0; k < n; ++k) data[k * stride] = tmp[k];
}

void haar_step_inverse(double* data, std::size_t n, std::size_t stride,
                       std::vector<double>& tmp) {
  const std::size_t half = n / 2;
  tmp.resize(n);
  for (std::size_t k = 0; k < half; ++k) {
    const double a = data[k * stride];
    const double d = data[(half + k) * stride];
    tmp[2 * k] = (a + d) * kInvSqrt2;
    tmp[2 * k + 1] = (a - d) * kInvSqrt2;
  }
  for (std::size_t k = 0; k < n; ++k) data[k * stride] = tmp[k];
}

void dwt_forward_plane(std::span<const double> in, std::span<std::complex<double>> out,
                       Grid g) {
  std::vector<double> buf(in.begin(), in.end());
  std::vector<double> tmp;
  const std::size_t levels = spectral::dwt_levels(g);
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t hh = g.h >> l;
    const std::size_t ww = g.w >> l;
    for (std::size_t y = 0; y < hh; ++y) haar_step(&buf[y * g.w], ww, 1, tmp);
    for (std::size_t x = 0; x < ww; ++x) haar_step(&buf[x], hh, g.w, tmp);
  }
  std::copy(buf.begin(), buf.end(), out.begin());
}

void dwt_inverse_plane(std::span<const std::complex<double>> in, std::span<double> out,
                       Grid g) {
  std::vector<double> buf(g.area());
  for (std::size_t i = 0; i < g.area(); ++i) buf[i] = in[i].real();
  std::vector<double> tmp;
  const std::size_t levels = spectral::dwt_levels(g);
  for (std::size_t l = levels; l-- > 0;) {
    const std::size_t hh = g.h >> l;
    const std::size_t ww = g.w >> l;
    for (std::size_t x = 0; x < ww; ++x) haar_step_inverse(&buf[x], hh, g.w, tmp);
    for (std::size_t y = 0; y < hh; ++y) haar_step_inverse(&buf[y * g.w], ww, 1, tmp);
  }
  std::copy(buf.begin(), buf.end(), out.begin());
}

// Rows of the large centered-FFT grid that receive small-grid row `r`, with
// the Nyquist row of an even small grid split over the ±n/2 pair.
std::vector<std::size_t> fft_targets(std::size_t r, std::size_t n, std::size_t big) {
  const long f = static_cast<long>(r) - static_cast<long>(n / 2);
  const long center = static_cast<long>(big / 2);
  std::vector<std::size_t> rows{static_cast<std::size_t>(f + center)};
  if (n % 2 == 0 && f == -static_cast<long>(n / 2)) {
    rows.push_back(static_cast<std::size_t>(-f + center));
  }
  return rows;
}

void validate_field(const Field& field) {
  if (field.shape().h == 0 || field.shape().w == 0 || field.shape().planes() == 0) {
    throw Error("spectral", "field must have at least one 1x1 plane, got " +
                                to_string(field.shape()));
  }
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::DCT: return "dct";
    case TransformKind::DWT: return "dwt";
    case TransformKind::FFT: return "fft";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dct") return TransformKind::DCT;
  if (lower == "dwt") return TransformKind::DWT;
  if (lower == "fft") return TransformKind::FFT;
  throw Error("spectral", "unknown transform '" + std::string(text) +
                              "' (expected dct, dwt or fft)");
}

Spectrum::Spectrum(TransformKind kind, Shape shape)
    : kind_(kind), shape_(shape), coeffs_(shape.size()) {}

std::span<std::complex<double>> Spectrum::plane(std::size_t p) {
  const std::size_t n = shape_.h * shape_.w;
  return std::span<std::complex<double>>(coeffs_).subspan(p * n, n);
}

std::span<const std::complex<double>> Spectrum::plane(std::size_t p) const {
  const std::size_t n = shape_.h * shape_.w;
  return std::span<const std::complex<double>>(coeffs_).subspan(p * n, n);
}

Spectrum& Spectrum::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

double Spectrum::energy() const {
  double acc = 0.0;
  for (const auto& c : coeffs_) acc += std::norm(c);
  return acc;
}

FrequencyGeometry::FrequencyGeometry(Grid grid, TransformKind kind)
    : grid_(grid), kind_(kind) {
  if (grid.h == 0 || grid.w == 0) throw Error("spectral", "empty frequency grid");
}

std::pair<int, int> FrequencyGeometry::frequency_index(std::size_t row,
                                                       std::size_t col) const {
  if (row >= grid_.h || col >= grid_.w) {
    throw Error("spectral", "frequency index (" + std::to_string(row) + ", " +
                                std::to_string(col) + ") outside grid " +
                                to_string(grid_));
  }
  if (kind_ == TransformKind::FFT) {
    return {static_cast<int>(row) - static_cast<int>(grid_.h / 2),
            static_cast<int>(col) - static_cast<int>(grid_.w / 2)};
  }
  return {static_cast<int>(row), static_cast<int>(col)};
}

double FrequencyGeometry::radial(std::size_t row, std::size_t col) const {
  const auto [fy, fx] = frequency_index(row, col);
  return std::hypot(static_cast<double>(fy), static_cast<double>(fx));
}

std::vector<double> FrequencyGeometry::radial_map() const {
  std::vector<double> out(grid_.area());
  for (std::size_t y = 0; y < grid_.h; ++y)
    for (std::size_t x = 0; x < grid_.w; ++x) out[y * grid_.w + x] = radial(y, x);
  return out;
}

double FrequencyGeometry::indices_per_cycle() const {
  return specdiff::indices_per_cycle(kind_);
}

double FrequencyGeometry::nyquist_cap() const { return specdiff::nyquist_cap(grid_); }

double nyquist_cap(Grid grid) { return static_cast<double>(std::min(grid.h, grid.w)) / 2.0; }

double indices_per_cycle(TransformKind kind) {
  return kind == TransformKind::FFT ? 1.0 : 2.0;
}

namespace spectral {

std::size_t dwt_levels(Grid grid) {
  std::size_t levels = 0;
  std::size_t h = grid.h;
  std::size_t w = grid.w;
  while (h > 0 && w > 0 && h % 2 == 0 && w % 2 == 0) {
    h /= 2;
    w /= 2;
    ++levels;
  }
  return levels;
}

Spectrum forward(const Field& field, TransformKind kind) {
  validate_field(field);
  const Grid g = field.grid();
  if (kind == TransformKind::DWT && dwt_levels(g) == 0) {
    throw Error("spectral", "Haar DWT needs even grid dimensions, got " + to_string(g));
  }
  Spectrum out(kind, field.shape());
  for (std::size_t p = 0; p < field.shape().planes(); ++p) {
    switch (kind) {
      case TransformKind::DCT: dct_forward_plane(field.plane(p), out.plane(p), g); break;
      case TransformKind::DWT: dwt_forward_plane(field.plane(p), out.plane(p), g); break;
      case TransformKind::FFT: dft_forward_plane(field.plane(p), out.plane(p), g); break;
    }
  }
  return out;
}

Field inverse(const Spectrum& spectrum) {
  const Grid g = spectrum.grid();
  if (g.h == 0 || g.w == 0 || spectrum.shape().planes() == 0) {
    throw Error("spectral", "empty spectrum");
  }
  if (spectrum.kind() == TransformKind::DWT && dwt_levels(g) == 0) {
    throw Error("spectral", "Haar DWT needs even grid dimensions, got " + to_string(g));
  }
  if (spectrum.kind() == TransformKind::FFT) check_hermitian(spectrum);
  Field out(spectrum.shape());
  for (std::size_t p = 0; p < spectrum.shape().planes(); ++p) {
    switch (spectrum.kind()) {
      case TransformKind::DCT: dct_inverse_plane(spectrum.plane(p), out.plane(p), g); break;
      case TransformKind::DWT: dwt_inverse_plane(spectrum.plane(p), out.plane(p), g); break;
      case TransformKind::FFT: dft_inverse_plane(spectrum.plane(p), out.plane(p), g); break;
    }
  }
  return out;
}

double radial_frequency(const FrequencyGeometry& geometry, std::size_t row,
                        std::size_t col) {
  return geometry.radial(row, col);
}

void check_nesting(Grid small, Grid large, TransformKind kind) {
  if (small.h == 0 || small.w == 0) throw Error("spectral", "empty source grid");
  if (!(small.h < large.h && small.w < large.w)) {
    throw Error("spectral", "grid " + to_string(small) + " does not nest strictly inside " +
                                to_string(large));
  }
  if (small.h * large.w != small.w * large.h) {
    throw Error("spectral", "aspect ratio mismatch between " + to_string(small) + " and " +
                                to_string(large) + " (anisotropic scaling unsupported)");
  }
  if (kind == TransformKind::DWT) {
    const bool divisible = large.h % small.h == 0 && large.w % small.w == 0;
    const std::size_t ratio = divisible ? large.h / small.h : 0;
    if (!divisible || (ratio & (ratio - 1)) != 0) {
      throw Error("spectral", "Haar DWT embedding needs a power-of-two ratio between " +
                                  to_string(small) + " and " + to_string(large));
    }
    if (dwt_levels(small) == 0) {
      throw Error("spectral", "Haar DWT needs even grid dimensions, got " + to_string(small));
    }
  }
}

std::vector<bool> low_band_mask(Grid small, Grid large, TransformKind kind) {
  check_nesting(small, large, kind);
  std::vector<bool> mask(large.area(), false);
  for (std::size_t y = 0; y < small.h; ++y) {
    for (std::size_t x = 0; x < small.w; ++x) {
      if (kind == TransformKind::FFT) {
        for (std::size_t ty : fft_targets(y, small.h, large.h))
          for (std::size_t tx : fft_targets(x, small.w, large.w)) mask[ty * large.w + tx] = true;
      } else {
        mask[y * large.w + x] = true;
      }
    }
  }
  return mask;
}

Spectrum embed(const Spectrum& low, Grid target) {
  const Grid g = low.grid();
  check_nesting(g, target, low.kind());
  Spectrum out(low.kind(), low.shape().with_grid(target));
  for (std::size_t p = 0; p < low.shape().planes(); ++p) {
    const auto src = low.plane(p);
    auto dst = out.plane(p);
    for (std::size_t y = 0; y < g.h; ++y) {
      for (std::size_t x = 0; x < g.w; ++x) {
        const std::complex<double> c = src[y * g.w + x];
        if (low.kind() == TransformKind::FFT) {
          const auto rows = fft_targets(y, g.h, target.h);
          const auto cols = fft_targets(x, g.w, target.w);
          const double share = 1.0 / std::sqrt(static_cast<double>(rows.size() * cols.size()));
          for (std::size_t ty : rows)
            for (std::size_t tx : cols) dst[ty * target.w + tx] = c * share;
        } else {
          dst[y * target.w + x] = c;
        }
      }
    }
  }
  return out;
}

Spectrum extract(const Spectrum& spectrum, Grid target) {
  const Grid g = spectrum.grid();
  check_nesting(target, g, spectrum.kind());
  Spectrum out(spectrum.kind(), spectrum.shape().with_grid(target));
  for (std::size_t p = 0; p < spectrum.shape().planes(); ++p) {
    const auto src = spectrum.plane(p);
    auto dst = out.plane(p);
    for (std::size_t y = 0; y < target.h; ++y) {
      for (std::size_t x = 0; x < target.w; ++x) {
        if (spectrum.kind() == TransformKind::FFT) {
          const auto rows = fft_targets(y, target.h, g.h);
          const auto cols = fft_targets(x, target.w, g.w);
          const double share = 1.0 / std::sqrt(static_cast<double>(rows.size() * cols.size()));
          std::complex<double> acc = 0.0;
          for (std::size_t ty : rows)
            for (std::size_t tx : cols) acc += src[ty * g.w + tx];
          dst[y * target.w + x] = acc * share;
        } else {
          dst[y * target.w + x] = src[y * g.w + x];
        }
      }
    }
  }
  return out;
}

Spectrum white_noise(Shape shape, TransformKind kind, Rng& rng) {
  if (kind == TransformKind::FFT) {
    // Hermitian structure comes for free by transforming real noise.
    Field noise(shape);
    for (double& v : noise.values()) v = rng.normal();
    return forward(noise, kind);
  }
  Spectrum out(kind, shape);
  for (auto& c : out.coeffs()) c = rng.normal();
  return out;
}

void check_hermitian(const Spectrum& spectrum, double tolerance) {
  if (spectrum.kind() != TransformKind::FFT) return;
  const Grid g = spectrum.grid();
  double scale = 0.0;
  for (const auto& c : spectrum.coeffs()) scale = std::max(scale, std::abs(c));
  const double limit = tolerance * std::max(scale, 1e-300);
  for (std::size_t p = 0; p < spectrum.shape().planes(); ++p) {
    const auto plane = spectrum.plane(p);
    for (std::size_t ry = 0; ry < g.h; ++ry) {
      const std::size_t py = shift_index((g.h - unshift_index(ry, g.h)) % g.h, g.h);
      for (std::size_t rx = 0; rx < g.w; ++rx) {
        const std::size_t px = shift_index((g.w - unshift_index(rx, g.w)) % g.w, g.w);
        const auto a = plane[ry * g.w + rx];
        const auto b = plane[py * g.w + px];
        if (std::abs(a - std::conj(b)) > limit) {
          throw Error("spectral", "FFT spectrum is not Hermitian at (" + std::to_string(ry) +
                                      ", " + std::to_string(rx) + ")");
        }
      }
    }
  }
}

}  // namespace spectral
}  // namespace specdiff
