#include "ternavit/tensor_io.hpp"

#include <fstream>

#include "ternavit/binio.hpp"

namespace ternavit {

namespace {
constexpr char kMagic[4] = {'F', 'T', 'E', 'N'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t TensorFile::numel() const {
  std::size_t n = 1;
  for (std::uint64_t d : dims) n *= static_cast<std::size_t>(d);
  return dims.empty() ? 0 : n;
}

void write_ften(const std::string& path, const TensorFile& t) {
  if (t.dims.empty()) fail(ErrorCode::EmptyInput, "write_ften: tensor has no dimensions");
  if (t.numel() != t.values.size())
    fail(ErrorCode::DimensionMismatch, "write_ften: dims do not match value count");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoFailure, "write_ften: cannot open " + path);
  binio::put_bytes(os, kMagic, 4);
  binio::put_u32(os, kVersion);
  binio::put_u32(os, static_cast<std::uint32_t>(t.dims.size()));
  for (std::uint64_t d : t.dims) binio::put_u64(os, d);
  binio::put_bytes(os, t.values.data(), t.values.size() * 4);
}

TensorFile read_ften(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "read_ften: cannot open " + path);
  char magic[4];
  binio::get_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::BadMagic, "read_ften: bad magic in " + path);
  const std::uint32_t version = binio::get_u32(is);
  if (version != kVersion)
    fail(ErrorCode::VersionMismatch, "read_ften: unsupported version " + std::to_string(version));
  const std::uint32_t ndims = binio::get_u32(is);
  if (ndims == 0 || ndims > 8) fail(ErrorCode::CorruptData, "read_ften: implausible ndims");
  TensorFile t;
  t.dims.resize(ndims);
  for (auto& d : t.dims) d = binio::get_u64(is);
  const std::size_t n = t.numel();
  if (n > (1u << 30)) fail(ErrorCode::CorruptData, "read_ften: implausible element count");
  t.values.resize(n);
  binio::get_bytes(is, t.values.data(), n * 4);
  return t;
}

TensorFile to_tensor_file(const FloatMatrix& m) {
  return TensorFile{{m.rows, m.cols}, m.data};
}

TensorFile to_tensor_file(const FloatVector& v) {
  return TensorFile{{v.len()}, v.data};
}

FloatMatrix matrix_from(const TensorFile& t) {
  if (t.dims.size() != 2) fail(ErrorCode::DimensionMismatch, "expected a 2-d tensor");
  FloatMatrix m(static_cast<std::size_t>(t.dims[0]), static_cast<std::size_t>(t.dims[1]));
  m.data = t.values;
  return m;
}

FloatVector vector_from(const TensorFile& t) {
  if (t.dims.size() != 1) fail(ErrorCode::DimensionMismatch, "expected a 1-d tensor");
  FloatVector v;
  v.data = t.values;
  return v;
}

}  // namespace ternavit
