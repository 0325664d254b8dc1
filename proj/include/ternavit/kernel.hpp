#pragma once

#include <atomic>
#include <cstdint>

#include "ternavit/packing.hpp"

namespace ternavit {

// Micro-tile shape for the blocked kernel. n_block and k_block are pinned by
// the packed layout; m_block (activation rows per pass) is tunable and must
// not change results.
struct TileGeometry {
  std::size_t m_block = 8;
  static constexpr std::size_t n_block = kTileN;
  static constexpr std::size_t k_block = kTileK;
};

// Analytic single-pass traffic tally: every packed word counts once per GEMM,
// every activation byte once per (k-slab, m-block), every output element once.
struct TrafficCounter {
  std::atomic<std::uint64_t> weight_bytes_read{0};
  std::atomic<std::uint64_t> activation_bytes_read{0};
  std::atomic<std::uint64_t> output_bytes_written{0};

  void reset() {
    weight_bytes_read = 0;
    activation_bytes_read = 0;
    output_bytes_written = 0;
  }
};

// Naive triple-loop oracle: out[i][j] = sum_k a[i][k] * codes[k][j], 32-bit
// exact, k ascending. Deliberately unblocked.
IntAccumulatorMatrix gemm_reference(const QuantizedActivationMatrix& a,
                                    const TernaryWeightMatrix& t);

// Blocked integer GEMM over packed weights. Each 32x16 weight fragment is
// unpacked once per K-slab into a scratch tile and reused across all M-blocks.
// Bitwise-equal to gemm_reference(a, unpack_ternary(p)) for every geometry
// and thread count.
IntAccumulatorMatrix gemm_packed_blocked(const QuantizedActivationMatrix& a,
                                         const PackedWeightTiles& p,
                                         const TileGeometry& geom = {},
                                         TrafficCounter* counter = nullptr, unsigned threads = 1);

// absmax_quantize -> gemm_packed_blocked -> dequantize. Bitwise-equal to
// bitlinear_forward on the unpacked weights.
FloatMatrix bitlinear_forward_packed(const FloatMatrix& a, const PackedWeightTiles& p,
                                     float eps = kDefaultQuantEps, const TileGeometry& geom = {},
                                     TrafficCounter* counter = nullptr, unsigned threads = 1);

}  // namespace ternavit
