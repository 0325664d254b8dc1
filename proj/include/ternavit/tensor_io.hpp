#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ternavit/tensor.hpp"

namespace ternavit {

// Portable float tensor file: magic "FTEN", u32 version=1, u32 ndims,
// u64 dims[ndims], then little-endian f32 payload.
struct TensorFile {
  std::vector<std::uint64_t> dims;
  std::vector<float> values;

  std::size_t numel() const;
};

void write_ften(const std::string& path, const TensorFile& t);
TensorFile read_ften(const std::string& path);

TensorFile to_tensor_file(const FloatMatrix& m);
TensorFile to_tensor_file(const FloatVector& v);
FloatMatrix matrix_from(const TensorFile& t);
FloatVector vector_from(const TensorFile& t);

}  // namespace ternavit
