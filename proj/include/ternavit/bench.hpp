#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ternavit/model.hpp"

namespace ternavit {

inline constexpr int kBenchCsvVersion = 1;

// One benchmark measurement. weight/activation bytes are the analytic
// single-pass read volumes of the measured kernel, not hardware counters.
struct BenchRow {
  std::string workload;
  std::size_t m = 0, n = 0, k = 0;
  std::string kernel;  // packed | reference | float
  unsigned threads = 1;
  std::uint64_t ns = 0;  // median over repeats
  double gops = 0.0;     // 2*M*N*K / ns
  std::uint64_t weight_bytes = 0;
  std::uint64_t activation_bytes = 0;
  double speedup_vs_reference = 1.0;
};

struct BenchOptions {
  int repeats = 30;
  std::uint64_t seed = 17;
  std::vector<unsigned> thread_counts;  // empty -> {1, hardware_threads()}
};

// Times one linear-layer GEMM (M x K activations against K x N weights) with
// three kernels: the blocked packed kernel, the naive unpack-per-use
// reference, and a dense f32 matmul on dequantized weights.
std::vector<BenchRow> bench_gemm_workload(const std::string& name, std::size_t m, std::size_t k,
                                          std::size_t n, const BenchOptions& opts);

// Times the whole forward pass with packed, unpacked-ternary, and all-dense
// weights. The M/K/N columns report (tokens, embed_dim, num_classes).
std::vector<BenchRow> bench_full_model(const ModelConfig& cfg, const BenchOptions& opts);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

}  // namespace ternavit
