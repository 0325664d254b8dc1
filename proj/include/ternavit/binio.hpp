#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "ternavit/error.hpp"

// Little-endian binary primitives shared by the file formats.
namespace ternavit::binio {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) fail(ErrorCode::IoFailure, "write failed");
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    fail(ErrorCode::IoFailure, "unexpected end of file");
}

inline void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, &v, 4); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, &v, 8); }
inline void put_f32(std::ostream& os, float v) { put_bytes(os, &v, 4); }
inline void put_u16(std::ostream& os, std::uint16_t v) { put_bytes(os, &v, 2); }

inline std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  get_bytes(is, &v, 4);
  return v;
}
inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v;
  get_bytes(is, &v, 8);
  return v;
}
inline float get_f32(std::istream& is) {
  float v;
  get_bytes(is, &v, 4);
  return v;
}
inline std::uint16_t get_u16(std::istream& is) {
  std::uint16_t v;
  get_bytes(is, &v, 2);
  return v;
}

// bfloat16 <-> f32, round-to-nearest-even on the dropped mantissa bits.
inline std::uint16_t f32_to_bf16(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  const std::uint32_t lsb = (bits >> 16) & 1u;
  return static_cast<std::uint16_t>((bits + 0x7fffu + lsb) >> 16);
}

inline float bf16_to_f32(std::uint16_t h) {
  const std::uint32_t bits = static_cast<std::uint32_t>(h) << 16;
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline float round_to_bf16(float f) { return bf16_to_f32(f32_to_bf16(f)); }

}  // namespace ternavit::binio
