// SPDX-License-Identifier: Apache-2.0
#include "specdiff/field.hpp"

#include <cmath>

#include "specdiff/common.hpp"

namespace specdiff {

std::string to_string(const Grid& grid) {
  return std::to_string(grid.h) + "x" + std::to_string(grid.w);
}

std::string to_string(const Shape& shape) {
  return std::to_string(shape.channels) + "x" + std::to_string(shape.frames) +
         "x" + std::to_string(shape.h) + "x" + std::to_string(shape.w);
}

Field::Field(Shape shape) : shape_(shape), values_(shape.size(), 0.0) {}

Field::Field(Shape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw Error("field", "value count " + std::to_string(values_.size()) +
                             " does not match shape " + to_string(shape_));
  }
}

std::span<double> Field::plane(std::size_t p) {
  const std::size_t n = shape_.h * shape_.w;
  return std::span<double>(values_).subspan(p * n, n);
}

std::span<const double> Field::plane(std::size_t p) const {
  const std::size_t n = shape_.h * shape_.w;
  return std::span<const double>(values_).subspan(p * n, n);
}

double& Field::at(std::size_t c, std::size_t f, std::size_t y, std::size_t x) {
  return values_[((c * shape_.frames + f) * shape_.h + y) * shape_.w + x];
}

double Field::at(std::size_t c, std::size_t f, std::size_t y, std::size_t x) const {
  return values_[((c * shape_.frames + f) * shape_.h + y) * shape_.w + x];
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::operator+=(const Field& other) {
  axpy(1.0, other);
  return *this;
}

Field& Field::operator-=(const Field& other) {
  axpy(-1.0, other);
  return *this;
}

void Field::axpy(double s, const Field& other) {
  if (other.shape_ != shape_) {
    throw Error("field", "shape mismatch " + to_string(shape_) + " vs " +
                             to_string(other.shape_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
}

double Field::sum_squares() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return acc;
}

double Field::mean() const {
  if (values_.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values_) acc += v;
  return acc / static_cast<double>(values_.size());
}

double Field::variance() const {
  if (values_.empty()) return 0.0;
  const double m = mean();
  double acc = 0.0;
  for (double v : values_) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values_.size());
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field operator*(double s, Field f) {
  f *= s;
  return f;
}

Field operator+(Field a, const Field& b) {
  a += b;
  return a;
}

Field operator-(Field a, const Field& b) {
  a -= b;
  return a;
}

}  // namespace specdiff
