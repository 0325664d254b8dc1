// Acceptance harness: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ternavit/attention.hpp"
#include "ternavit/bench.hpp"
#include "ternavit/kernel.hpp"
#include "ternavit/model_io.hpp"
#include "ternavit/parallel.hpp"
#include "ternavit/verify.hpp"

namespace tv = ternavit;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& label, const std::string& extra = "") {
  std::printf("criterion %2d [%s] %s%s%s\n", criterion, pass ? "PASS" : "FAIL", label.c_str(),
              extra.empty() ? "" : " -- ", extra.c_str());
  if (!pass) ++g_failures;
}

// Suite-backed criteria: every property in the suite must pass, and the suite
// must finish inside its runtime budget.
void run_suite_criterion(int criterion, const std::string& label,
                         std::vector<tv::CheckResult> (*suite)(std::uint64_t, int), int iters,
                         double budget_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<tv::CheckResult> results = suite(42, iters);
  const double elapsed = seconds_since(t0);
  std::string detail;
  for (const auto& r : results)
    if (!r.pass) detail += r.name + (r.detail.empty() ? "" : " (" + r.detail + ")") + "; ";
  const bool in_budget = elapsed < budget_seconds;
  if (!in_budget)
    detail += "runtime " + std::to_string(elapsed) + " s over budget; ";
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2f s < %.0f s", elapsed, budget_seconds);
  report(criterion, detail.empty() && in_budget, label, detail.empty() ? timing : detail);
}

void criterion4_attention_accounting() {
  const tv::AttentionConfig mhsa{512, 8, tv::AttentionMode::MHSA};
  const tv::AttentionConfig mqa{512, 8, tv::AttentionMode::MQA};
  const std::size_t kv_mhsa = tv::attn_kv_param_count(mhsa);
  const std::size_t kv_mqa = tv::attn_kv_param_count(mqa);
  const bool pass = kv_mhsa == 524288 && kv_mqa == 65536 && kv_mhsa / kv_mqa == 8 &&
                    kv_mhsa % kv_mqa == 0;
  report(4, pass, "K+V parameter accounting at D=512, H=8: MHSA 524288 vs MQA 65536, ratio 8",
         "got " + std::to_string(kv_mhsa) + " vs " + std::to_string(kv_mqa));
}

void criterion5_model_accounting() {
  const tv::ModelConfig cfg;  // L=3, H=8, E=512, MQA, 4x FFN, patch 16, 224^2 inputs
  const std::size_t params = tv::param_count(cfg).total;
  const std::size_t bytes = tv::model_size_bytes(cfg, tv::default_precision_map(cfg));
  const bool params_ok = params >= 8.65e6 * 0.95 && params <= 8.65e6 * 1.05;
  const bool bytes_ok = bytes >= 10.5e6 * 0.90 && bytes <= 10.5e6 * 1.10;
  char extra[128];
  std::snprintf(extra, sizeof extra, "%.4f M params (target 8.65M +-5%%), %.3f MB (target 10.5MB +-10%%)",
                params / 1e6, bytes / 1e6);
  report(5, params_ok && bytes_ok,
         "whole-model accounting: parameters within 5% of 8.65M, stored size within 10% of 10.5MB",
         extra);
}

void criterion6_traffic_surrogate() {
  bool pass = true;
  std::string detail;
  // Analytic packed-vs-f32 weight-byte ratio on aligned dims is exactly 16.
  for (std::size_t n = 32; n <= 2048; n *= 2) {
    for (std::size_t k = 16; k <= 2048; k *= 2) {
      const double ratio =
          static_cast<double>(4ull * n * k) / static_cast<double>(tv::packed_weight_bytes(n, k));
      if (ratio != 16.0) {
        pass = false;
        detail = "ratio " + std::to_string(ratio) + " at " + std::to_string(n) + "x" +
                 std::to_string(k);
      }
    }
  }
  // Counter equals packed_weight_bytes exactly for a full pass.
  std::mt19937_64 gen(7);
  const std::size_t shapes[][3] = {{8, 2048, 512}, {197, 512, 2048}, {3, 100, 70}};
  for (const auto& s : shapes) {
    const std::size_t m = s[0], k = s[1], n = s[2];
    tv::QuantizedActivationMatrix a;
    a.rows = m;
    a.cols = k;
    a.values.resize(m * k);
    for (auto& v : a.values) v = static_cast<std::int8_t>(static_cast<int>(gen() % 256) - 128);
    a.gamma.assign(m, 1.0f);
    tv::TernaryWeightMatrix t(k, n, 1.0f);
    for (auto& c : t.codes) c = static_cast<std::int8_t>(static_cast<int>(gen() % 3) - 1);
    tv::TrafficCounter counter;
    (void)tv::gemm_packed_blocked(a, tv::pack_ternary(t), {}, &counter, 2);
    if (counter.weight_bytes_read != tv::packed_weight_bytes(n, k)) {
      pass = false;
      detail = "weight bytes " + std::to_string(counter.weight_bytes_read) + " != " +
               std::to_string(tv::packed_weight_bytes(n, k));
    }
  }
  report(6, pass,
         "weight-traffic surrogate: aligned packed/f32 byte ratio exactly 16.0, counter equals "
         "packed_weight_bytes per pass (measured DRAM reductions are hardware-scoped, not "
         "reproduced)",
         detail);
}

void criterion10_bench_speedup() {
  const unsigned cores = tv::hardware_threads();
  tv::BenchOptions opts;
  opts.repeats = 5;
  opts.thread_counts = {cores};
  bool pass = true;
  std::string extra;
  for (const auto& [name, k, n] :
       std::vector<std::tuple<std::string, std::size_t, std::size_t>>{{"ffn-kn", 512, 2048},
                                                                      {"ffn-nk", 2048, 512}}) {
    const std::vector<tv::BenchRow> rows = tv::bench_gemm_workload(name, 197, k, n, opts);
    double speedup = 0.0;
    for (const auto& r : rows)
      if (r.kernel == "packed" && r.threads == cores) speedup = r.speedup_vs_reference;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s packed speedup %.2fx at %u thread(s); ", name.c_str(),
                  speedup, cores);
    extra += buf;
    if (!(speedup > 1.0)) pass = false;
  }
  report(10, pass,
         "packed blocked kernel beats the naive unpack-per-use reference on FFN shapes "
         "(absolute hardware numbers are out of scope)",
         extra);
}

}  // namespace

int main() {
  std::printf("acceptance suite: %u hardware thread(s)\n", tv::hardware_threads());

  run_suite_criterion(1, "quantization correctness: >=1000-matrix property suite + worked example",
                      tv::verify_quantize, 1000, 5.0);
  run_suite_criterion(2, "pack/unpack exact round trip over >=1000 matrices incl. ragged shapes",
                      tv::verify_packing, 1000, 5.0);
  run_suite_criterion(3, "kernel oracle equivalence: >=1000 random combos + FFN shapes, bitwise",
                      tv::verify_gemm, 1000, 60.0);
  criterion4_attention_accounting();
  criterion5_model_accounting();
  criterion6_traffic_surrogate();
  run_suite_criterion(7, "MQA == MHSA bitwise with replicated shared K/V (>=100 random inputs)",
                      tv::verify_attention, 100, 60.0);
  run_suite_criterion(8, "end-to-end consistency: packed vs unpacked forwards, save/load stability",
                      tv::verify_model, 20, 120.0);
  run_suite_criterion(9, "loss properties: KD identity/non-negativity, CE closed forms",
                      tv::verify_distill, 1000, 10.0);
  criterion10_bench_speedup();

  std::printf("acceptance: %d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
