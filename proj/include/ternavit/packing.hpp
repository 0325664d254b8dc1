#pragma once

#include <cstdint>

#include "ternavit/quantize.hpp"

namespace ternavit {

inline constexpr std::size_t kTileN = 32;  // output columns per fragment
inline constexpr std::size_t kTileK = 16;  // codes per 32-bit word along K

// 2-bit code assignment: -1 -> 0b00, 0 -> 0b01, +1 -> 0b10. 0b11 is reserved
// and rejected on decode, so a valid field decodes branchlessly as field - 1.
inline constexpr std::uint32_t kReservedField = 0b11u;
inline constexpr std::uint32_t kAllZeroWord = 0x55555555u;  // sixteen 0b01 fields

// Ternary weights packed sixteen codes per 32-bit word along K and grouped
// into column-major 32x16 fragments. Word index for output column n and
// K-slab s is (n/32 * k_slabs + s) * 32 + n%32; the code for k within the
// slab occupies bit pair (2*(k%16), 2*(k%16)+1). Ragged shapes are padded
// with code 0 so padding never contributes to a dot product.
struct PackedWeightTiles {
  std::size_t n_out = 0;  // N, output channels
  std::size_t k_in = 0;   // K, input depth
  float beta = 0.0f;
  std::vector<std::uint32_t> words;

  static constexpr std::size_t tile_n = kTileN;
  static constexpr std::size_t tile_k = kTileK;

  std::size_t n_tiles() const { return (n_out + kTileN - 1) / kTileN; }
  std::size_t k_slabs() const { return (k_in + kTileK - 1) / kTileK; }
  std::size_t expected_words() const { return n_tiles() * k_slabs() * kTileN; }
  bool operator==(const PackedWeightTiles&) const = default;
};

PackedWeightTiles pack_ternary(const TernaryWeightMatrix& t);

// Exact inverse of pack_ternary on the logical region. Any reserved bit
// pattern, inside or outside that region, is a corrupt-data error.
TernaryWeightMatrix unpack_ternary(const PackedWeightTiles& p);

// On-disk/in-memory footprint: 4 * ceil(n_out/32) * ceil(k_in/16) * 32 bytes.
// For tile-aligned shapes this is n_out*k_in/4, a 16x reduction vs f32.
std::size_t packed_weight_bytes(std::size_t n_out, std::size_t k_in);

// Decodes fragment (n_tile, k_slab) into k-major scratch frag[k*kTileN + n]
// (kTileK x kTileN int8 codes) so a kernel can stream 32 outputs per k step.
// Throws on reserved bit patterns.
void unpack_fragment(const PackedWeightTiles& p, std::size_t n_tile, std::size_t k_slab,
                     std::int8_t* frag);

}  // namespace ternavit
