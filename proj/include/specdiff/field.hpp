// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace specdiff {

/// Spatial grid (rows × columns).
struct Grid {
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t area() const { return h * w; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

std::string to_string(const Grid& grid);

/// channels × frames × h × w. Spatial transforms act on each (channel, frame)
/// plane independently.
struct Shape {
  std::size_t channels = 1;
  std::size_t frames = 1;
  std::size_t h = 0;
  std::size_t w = 0;

  Grid grid() const { return {h, w}; }
  std::size_t planes() const { return channels * frames; }
  std::size_t size() const { return channels * frames * h * w; }
  Shape with_grid(Grid g) const { return {channels, frames, g.h, g.w}; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// Real-valued spatial tensor, row-major over (channel, frame, y, x).
class Field {
 public:
  Field() = default;
  explicit Field(Shape shape);
  Field(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  Grid grid() const { return shape_.grid(); }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// h*w slice for plane index p = channel * frames + frame.
  std::span<double> plane(std::size_t p);
  std::span<const double> plane(std::size_t p) const;

  double& at(std::size_t c, std::size_t f, std::size_t y, std::size_t x);
  double at(std::size_t c, std::size_t f, std::size_t y, std::size_t x) const;

  Field& operator*=(double s);
  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);

  /// this += s * other
  void axpy(double s, const Field& other);

  double sum_squares() const;
  double mean() const;
  double variance() const;
  double max_abs() const;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  Shape shape_{};
  std::vector<double> values_;
};

Field operator*(double s, Field f);
Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);

}  // namespace specdiff
