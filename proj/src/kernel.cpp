#include "ternavit/kernel.hpp"

#include <algorithm>

#include "ternavit/parallel.hpp"

namespace ternavit {

IntAccumulatorMatrix gemm_reference(const QuantizedActivationMatrix& a,
                                    const TernaryWeightMatrix& t) {
  if (a.cols != t.rows)
    fail(ErrorCode::DimensionMismatch, "gemm_reference: inner dimensions differ");
  IntAccumulatorMatrix out(a.rows, t.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) {
      std::int32_t acc = 0;
      for (std::size_t k = 0; k < a.cols; ++k)
        acc += static_cast<std::int32_t>(a.values[i * a.cols + k]) *
               static_cast<std::int32_t>(t.codes[k * t.cols + j]);
      out.values[i * t.cols + j] = acc;
    }
  }
  return out;
}

namespace {

// One output-column tile. The K-slab loop decodes each 32x16 fragment exactly
// once into the k-major scratch panel; every M-block then streams against the
// decoded panel with 32 accumulators held per row across the whole K extent.
// count_activations is set for exactly one tile so the activation tally models
// a single shared pass.
void run_tile(const QuantizedActivationMatrix& a, const PackedWeightTiles& p,
              const TileGeometry& geom, TrafficCounter* counter, std::size_t n_tile,
              std::int32_t* out, std::int8_t* panel, bool count_activations) {
  const std::size_t m = a.rows;
  const std::size_t k_total = p.k_in;
  const std::size_t n_total = p.n_out;
  const std::size_t slabs = p.k_slabs();
  const std::size_t n0 = n_tile * kTileN;
  const std::size_t n_lim = std::min(kTileN, n_total - n0);

  std::uint64_t weight_bytes = 0;
  std::uint64_t activation_bytes = 0;

  for (std::size_t slab = 0; slab < slabs; ++slab) {
    unpack_fragment(p, n_tile, slab, panel + slab * kTileK * kTileN);
    weight_bytes += kTileN * 4;
  }

  for (std::size_t mb = 0; mb < m; mb += geom.m_block) {
    const std::size_t m_end = std::min(m, mb + geom.m_block);
    if (count_activations) activation_bytes += (m_end - mb) * k_total;
    for (std::size_t i = mb; i < m_end; ++i) {
      const std::int8_t* arow = a.values.data() + i * k_total;
      std::int32_t acc[kTileN] = {};
      for (std::size_t k = 0; k < k_total; ++k) {
        const std::int32_t av = arow[k];
        if (av == 0) continue;
        const std::int8_t* codes = panel + k * kTileN;
        for (std::size_t j = 0; j < kTileN; ++j)
          acc[j] += av * static_cast<std::int32_t>(codes[j]);
      }
      std::int32_t* orow = out + i * n_total + n0;
      for (std::size_t j = 0; j < n_lim; ++j) orow[j] += acc[j];
    }
  }

  if (counter) {
    counter->weight_bytes_read += weight_bytes;
    counter->activation_bytes_read += activation_bytes;
    counter->output_bytes_written += static_cast<std::uint64_t>(m) * n_lim * 4;
  }
}

}  // namespace

IntAccumulatorMatrix gemm_packed_blocked(const QuantizedActivationMatrix& a,
                                         const PackedWeightTiles& p, const TileGeometry& geom,
                                         TrafficCounter* counter, unsigned threads) {
  if (a.cols != p.k_in)
    fail(ErrorCode::DimensionMismatch, "gemm_packed_blocked: inner dimensions differ");
  if (geom.m_block == 0)
    fail(ErrorCode::InvalidArgument, "gemm_packed_blocked: m_block must be positive");
  if (p.words.size() != p.expected_words())
    fail(ErrorCode::CorruptData, "gemm_packed_blocked: word count does not match dims");

  IntAccumulatorMatrix out(a.rows, p.n_out);
  const std::size_t tiles = p.n_tiles();
  parallel_chunks(0, tiles, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::int8_t> panel(p.k_slabs() * kTileK * kTileN);
    for (std::size_t nt = lo; nt < hi; ++nt)
      run_tile(a, p, geom, counter, nt, out.values.data(), panel.data(), nt == 0);
  });
  return out;
}

FloatMatrix bitlinear_forward_packed(const FloatMatrix& a, const PackedWeightTiles& p, float eps,
                                     const TileGeometry& geom, TrafficCounter* counter,
                                     unsigned threads) {
  if (a.cols != p.k_in)
    fail(ErrorCode::DimensionMismatch, "bitlinear_forward_packed: inner dimensions differ");
  const QuantizedActivationMatrix q = absmax_quantize(a, eps);
  const IntAccumulatorMatrix acc = gemm_packed_blocked(q, p, geom, counter, threads);
  return dequantize(acc, q.gamma, p.beta);
}

}  // namespace ternavit
