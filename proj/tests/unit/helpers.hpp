// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "specdiff/field.hpp"
#include "specdiff/common.hpp"

namespace testing {

inline specdiff::Field random_field(specdiff::Shape shape, std::uint64_t seed) {
  specdiff::Rng rng(seed);
  specdiff::Field f(shape);
  for (double& v : f.values()) v = rng.normal();
  return f;
}

inline double max_diff(const specdiff::Field& a, const specdiff::Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

inline std::string tmp_path(const std::string& name) {
  return std::string(SPECDIFF_TEST_TMPDIR) + "/" + name;
}

}  // namespace testing
