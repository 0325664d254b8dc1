#include "ternavit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <random>

#include "ternavit/kernel.hpp"
#include "ternavit/model_io.hpp"
#include "ternavit/parallel.hpp"

namespace ternavit {

namespace {

volatile float g_sink = 0.0f;  // keeps timed results observable

template <typename Fn>
std::uint64_t median_ns(int repeats, Fn&& fn) {
  fn();  // warmup
  std::vector<std::uint64_t> samples;
  samples.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

std::vector<unsigned> resolve_threads(const BenchOptions& opts) {
  if (!opts.thread_counts.empty()) return opts.thread_counts;
  std::vector<unsigned> out{1};
  const unsigned hw = hardware_threads();
  if (hw > 1) out.push_back(hw);
  return out;
}

FloatMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  FloatMatrix m(r, c);
  for (float& v : m.data) v = dist(rng);
  return m;
}

double gops_of(std::size_t m, std::size_t n, std::size_t k, std::uint64_t ns) {
  return ns == 0 ? 0.0
                 : 2.0 * static_cast<double>(m) * static_cast<double>(n) *
                       static_cast<double>(k) / static_cast<double>(ns);
}

// Analytic per-forward read volumes over every linear layer in the model.
void model_traffic(const ModelConfig& cfg, bool ternary_ffn_packed, bool dense_as_float,
                   std::uint64_t* weight_bytes, std::uint64_t* activation_bytes) {
  const std::uint64_t t = cfg.tokens();
  std::uint64_t wb = 0, ab = 0;
  auto add_dense = [&](std::uint64_t rows, std::uint64_t k, std::uint64_t n) {
    wb += 4 * k * n;
    ab += 4 * rows * k;
  };
  auto add_linear = [&](std::uint64_t rows, std::uint64_t k, std::uint64_t n, bool ternary) {
    if (ternary && !dense_as_float) {
      wb += packed_weight_bytes(n, k);
      ab += rows * k;  // int8 activations
    } else {
      add_dense(rows, k, n);
    }
  };
  add_dense(cfg.n_patches(), cfg.patch_dim(), cfg.embed_dim);
  const bool ffn_ternary = ternary_ffn_packed && (cfg.ternary_roles & kTernaryFfn);
  const bool qkv_ternary = ternary_ffn_packed && (cfg.ternary_roles & kTernaryAttnQkv);
  const bool out_ternary = ternary_ffn_packed && (cfg.ternary_roles & kTernaryAttnOut);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    add_linear(t, cfg.embed_dim, cfg.embed_dim, qkv_ternary);
    add_linear(t, cfg.embed_dim, cfg.kv_width(), qkv_ternary);
    add_linear(t, cfg.embed_dim, cfg.kv_width(), qkv_ternary);
    add_linear(t, cfg.embed_dim, cfg.embed_dim, out_ternary);
    add_linear(t, cfg.embed_dim, cfg.ffn_dim(), ffn_ternary);
    add_linear(t, cfg.ffn_dim(), cfg.embed_dim, ffn_ternary);
  }
  add_dense(1, cfg.embed_dim, cfg.num_classes);
  *weight_bytes = wb;
  *activation_bytes = ab;
}

}  // namespace

std::vector<BenchRow> bench_gemm_workload(const std::string& name, std::size_t m, std::size_t k,
                                          std::size_t n, const BenchOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const FloatMatrix weights = random_matrix(rng, k, n);
  const FloatMatrix activations = random_matrix(rng, m, k);
  const TernaryWeightMatrix ternary = absmean_quantize(weights);
  const PackedWeightTiles packed = pack_ternary(ternary);
  const QuantizedActivationMatrix a8 = absmax_quantize(activations);

  // Dequantized codes for the dense float baseline.
  FloatMatrix dense(k, n);
  for (std::size_t i = 0; i < dense.size(); ++i)
    dense.data[i] = static_cast<float>(ternary.codes[i]) * ternary.beta;

  std::vector<BenchRow> rows;
  const std::uint64_t ref_ns = median_ns(opts.repeats, [&] {
    const TernaryWeightMatrix unpacked = unpack_ternary(packed);
    const IntAccumulatorMatrix out = gemm_reference(a8, unpacked);
    g_sink = g_sink + static_cast<float>(out.values.back());
  });
  BenchRow ref;
  ref.workload = name;
  ref.m = m;
  ref.n = n;
  ref.k = k;
  ref.kernel = "reference";
  ref.threads = 1;
  ref.ns = ref_ns;
  ref.gops = gops_of(m, n, k, ref_ns);
  ref.weight_bytes = packed_weight_bytes(n, k) + static_cast<std::uint64_t>(n) * k;
  ref.activation_bytes = static_cast<std::uint64_t>(m) * k;
  ref.speedup_vs_reference = 1.0;
  rows.push_back(ref);

  for (unsigned threads : resolve_threads(opts)) {
    const std::uint64_t packed_ns = median_ns(opts.repeats, [&] {
      const IntAccumulatorMatrix out = gemm_packed_blocked(a8, packed, {}, nullptr, threads);
      g_sink = g_sink + static_cast<float>(out.values.back());
    });
    BenchRow row = ref;
    row.kernel = "packed";
    row.threads = threads;
    row.ns = packed_ns;
    row.gops = gops_of(m, n, k, packed_ns);
    row.weight_bytes = packed_weight_bytes(n, k);
    row.activation_bytes = static_cast<std::uint64_t>(m) * k;
    row.speedup_vs_reference =
        packed_ns == 0 ? 0.0 : static_cast<double>(ref_ns) / static_cast<double>(packed_ns);
    rows.push_back(row);
  }

  const std::uint64_t float_ns = median_ns(opts.repeats, [&] {
    const FloatMatrix out = matmul_f32(activations, dense);
    g_sink = g_sink + out.data.back();
  });
  BenchRow fl = ref;
  fl.kernel = "float";
  fl.threads = 1;
  fl.ns = float_ns;
  fl.gops = gops_of(m, n, k, float_ns);
  fl.weight_bytes = 4ull * n * k;
  fl.activation_bytes = 4ull * m * k;
  fl.speedup_vs_reference =
      float_ns == 0 ? 0.0 : static_cast<double>(ref_ns) / static_cast<double>(float_ns);
  rows.push_back(fl);
  return rows;
}

std::vector<BenchRow> bench_full_model(const ModelConfig& cfg, const BenchOptions& opts) {
  const ModelWeights dense = random_weights(cfg, opts.seed);
  const ModelWeights packed = convert_weights(dense, cfg);
  const ModelWeights unpacked = unpack_linears(packed);

  std::mt19937_64 rng(opts.seed + 1);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image image(cfg.image_size, cfg.image_size, cfg.in_channels);
  for (float& v : image.data) v = dist(rng);
  const Image input = standardize(image, cfg);

  const double total_ops = 2.0 * static_cast<double>(forward_mac_count(cfg));
  auto make_row = [&](const char* kernel, std::uint64_t ns, bool is_packed, bool is_float) {
    BenchRow row;
    row.workload = "full-model";
    row.m = cfg.tokens();
    row.k = cfg.embed_dim;
    row.n = cfg.num_classes;
    row.kernel = kernel;
    row.threads = 1;
    row.ns = ns;
    row.gops = ns == 0 ? 0.0 : total_ops / static_cast<double>(ns);
    model_traffic(cfg, is_packed, is_float, &row.weight_bytes, &row.activation_bytes);
    return row;
  };

  const std::uint64_t ref_ns = median_ns(opts.repeats, [&] {
    g_sink = g_sink + forward(input, unpacked, cfg)[0];
  });
  const std::uint64_t packed_ns = median_ns(opts.repeats, [&] {
    g_sink = g_sink + forward(input, packed, cfg)[0];
  });
  const std::uint64_t float_ns = median_ns(opts.repeats, [&] {
    g_sink = g_sink + forward(input, dense, cfg)[0];
  });

  std::vector<BenchRow> rows;
  rows.push_back(make_row("reference", ref_ns, true, false));
  rows.push_back(make_row("packed", packed_ns, true, false));
  rows.back().speedup_vs_reference =
      packed_ns == 0 ? 0.0 : static_cast<double>(ref_ns) / static_cast<double>(packed_ns);
  rows.push_back(make_row("float", float_ns, false, true));
  rows.back().speedup_vs_reference =
      float_ns == 0 ? 0.0 : static_cast<double>(ref_ns) / static_cast<double>(float_ns);
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "# ternavit-bench-csv v" << kBenchCsvVersion << "\n";
  os << "workload,M,N,K,kernel,threads,time_ns,gops_per_s,weight_bytes,activation_bytes,"
        "speedup_vs_reference\n";
  for (const auto& r : rows) {
    os << r.workload << ',' << r.m << ',' << r.n << ',' << r.k << ',' << r.kernel << ','
       << r.threads << ',' << r.ns << ',' << r.gops << ',' << r.weight_bytes << ','
       << r.activation_bytes << ',' << r.speedup_vs_reference << "\n";
  }
}

}  // namespace ternavit
