// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "specdiff/field.hpp"

namespace specdiff {

/// Velocity field v(x, t) of the probability-flow ODE dx/dt = v. The grid is
/// taken from x. Implementations must be deterministic and safe for
/// concurrent calls.
class VelocityModel {
 public:
  virtual ~VelocityModel() = default;
  virtual Field evaluate(const Field& x, double t) const = 0;
  virtual std::string id() const = 0;
};

}  // namespace specdiff
