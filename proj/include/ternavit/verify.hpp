#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ternavit {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Property suites behind `verify` and the acceptance harness. `iters` scales
// the randomized checks; every suite is deterministic for a given seed.
std::vector<CheckResult> verify_quantize(std::uint64_t seed, int iters);
std::vector<CheckResult> verify_packing(std::uint64_t seed, int iters);
std::vector<CheckResult> verify_gemm(std::uint64_t seed, int iters);
std::vector<CheckResult> verify_attention(std::uint64_t seed, int iters);
std::vector<CheckResult> verify_model(std::uint64_t seed, int iters);
std::vector<CheckResult> verify_distill(std::uint64_t seed, int iters);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace ternavit
