// SPDX-License-Identifier: Apache-2.0
#include "specdiff/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "specdiff/common.hpp"

namespace specdiff {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'D', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw Error("cli", std::string("truncated tensor file while reading ") + what);
    }
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

Shape shape_from_dims(const std::vector<std::uint64_t>& d) {
  switch (d.size()) {
    case 2: return {1, 1, d[0], d[1]};
    case 3: return {d[0], 1, d[1], d[2]};
    case 4: return {d[0], d[1], d[2], d[3]};
    default:
      throw Error("cli", "tensor rank " + std::to_string(d.size()) +
                             " cannot be read as a field (expected 2, 3 or 4)");
  }
}

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.size() > 255) throw Error("cli", "tensor rank exceeds 255");
  if (t.element_count() != t.data.size()) {
    throw Error("cli", "tensor payload does not match its dims");
  }
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put(out, kVersion);
  put(out, static_cast<std::uint8_t>(t.dtype));
  put(out, static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put(out, d);
  for (double v : t.data) {
    if (t.dtype == DType::F32) {
      put(out, static_cast<float>(v));
    } else {
      put(out, v);
    }
  }
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error("cli", "not an SPDT tensor file (bad magic)");
  }
  Reader r(bytes);
  r.get<std::uint32_t>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) {
    throw Error("cli", "unsupported tensor file version " + std::to_string(version));
  }
  Tensor t;
  const auto code = r.get<std::uint8_t>("dtype");
  if (code != 1 && code != 2) throw Error("cli", "unknown dtype code " + std::to_string(code));
  t.dtype = static_cast<DType>(code);
  const auto ndim = r.get<std::uint8_t>("ndim");
  std::uint64_t count = 1;
  for (std::uint8_t i = 0; i < ndim; ++i) {
    t.dims.push_back(r.get<std::uint64_t>("dims"));
    count *= t.dims.back();
  }
  const std::size_t width = t.dtype == DType::F32 ? 4 : 8;
  if (count > r.remaining() / width) throw Error("cli", "truncated tensor payload");
  if (r.remaining() != count * width) {
    throw Error("cli", "tensor file has " + std::to_string(r.remaining() - count * width) +
                           " trailing bytes");
  }
  t.data.resize(count);
  for (auto& v : t.data) {
    v = t.dtype == DType::F32 ? static_cast<double>(r.get<float>("payload"))
                              : r.get<double>("payload");
  }
  return t;
}

void write_tensor(const std::string& path, const Tensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cli", "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cli", "failed writing " + path);
}

Tensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error("cli", path + ": " + std::string(e.what()).substr(e.module().size() + 2));
  }
}

Field tensor_to_field(const Tensor& tensor) {
  if (tensor.dims.size() == 5) {
    if (tensor.dims[0] != 1) {
      throw Error("cli", "batch of " + std::to_string(tensor.dims[0]) +
                                   " fields where a single field was expected");
    }
    const auto& d = tensor.dims;
    return Field(Shape{d[1], d[2], d[3], d[4]}, tensor.data);
  }
  return Field(shape_from_dims(tensor.dims), tensor.data);
}

std::vector<Field> tensor_to_batch(const Tensor& tensor) {
  if (tensor.dims.size() != 5) return {tensor_to_field(tensor)};
  const auto& d = tensor.dims;
  const Shape shape{d[1], d[2], d[3], d[4]};
  std::vector<Field> out;
  for (std::uint64_t n = 0; n < d[0]; ++n) {
    auto begin = tensor.data.begin() + static_cast<std::ptrdiff_t>(n * shape.size());
    out.emplace_back(shape, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(shape.size())));
  }
  return out;
}

Tensor field_to_tensor(const Field& field, DType dtype) {
  const Shape& s = field.shape();
  Tensor t;
  t.dtype = dtype;
  t.dims = {s.channels, s.frames, s.h, s.w};
  t.data.assign(field.values().begin(), field.values().end());
  return t;
}

Tensor batch_to_tensor(const std::vector<Field>& batch, DType dtype) {
  if (batch.empty()) throw Error("cli", "cannot write an empty batch");
  const Shape s = batch.front().shape();
  Tensor t;
  t.dtype = dtype;
  t.dims = {batch.size(), s.channels, s.frames, s.h, s.w};
  for (const auto& f : batch) {
    if (!(f.shape() == s)) throw Error("cli", "batch fields differ in shape");
    t.data.insert(t.data.end(), f.values().begin(), f.values().end());
  }
  return t;
}

}  // namespace specdiff
