// SPDX-License-Identifier: Apache-2.0
//
// SPDT tensor files: "SPDT", u32 version (1), u8 dtype (1 = f32, 2 = f64),
// u8 ndim, ndim × u64 dims, then the row-major payload. All little-endian.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specdiff/field.hpp"

namespace specdiff {

enum class DType : std::uint8_t { F32 = 1, F64 = 2 };

struct Tensor {
  DType dtype = DType::F64;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::uint64_t element_count() const;
};

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::string& path, const Tensor& tensor);
Tensor read_tensor(const std::string& path);

/// 2D (h, w), 3D (c, h, w) or 4D (c, f, h, w) tensor to a Field.
Field tensor_to_field(const Tensor& tensor);
/// 5D (n, c, f, h, w) tensor to n Fields; lower ranks give a single Field.
std::vector<Field> tensor_to_batch(const Tensor& tensor);
/// Field to a 4D (c, f, h, w) tensor.
Tensor field_to_tensor(const Field& field, DType dtype = DType::F64);
Tensor batch_to_tensor(const std::vector<Field>& batch, DType dtype = DType::F64);

}  // namespace specdiff
