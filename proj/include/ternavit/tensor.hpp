#pragma once

#include <cstddef>
#include <vector>

#include "ternavit/error.hpp"

namespace ternavit {

// Dense row-major single-precision matrix, the working real type everywhere.
struct FloatMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  FloatMatrix() = default;
  FloatMatrix(std::size_t r, std::size_t c, float fill = 0.0f)
      : rows(r), cols(c), data(r * c, fill) {}

  std::size_t size() const { return rows * cols; }
  float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  float* row(std::size_t i) { return data.data() + i * cols; }
  const float* row(std::size_t i) const { return data.data() + i * cols; }
  bool operator==(const FloatMatrix&) const = default;
};

struct FloatVector {
  std::vector<float> data;

  FloatVector() = default;
  explicit FloatVector(std::size_t n, float fill = 0.0f) : data(n, fill) {}
  std::size_t len() const { return data.size(); }
  float& operator[](std::size_t i) { return data[i]; }
  float operator[](std::size_t i) const { return data[i]; }
  bool operator==(const FloatVector&) const = default;
};

bool all_finite(const FloatMatrix& m);
bool all_finite(const FloatVector& v);
void require_finite(const FloatMatrix& m, const char* context);

// Row-wise softmax with per-row max subtraction. Rejects non-finite input.
FloatMatrix softmax_rows(const FloatMatrix& m);

// Per-row standardization followed by the affine map gain * x_hat + bias.
// Row statistics are accumulated in double.
FloatMatrix layernorm(const FloatMatrix& m, const FloatVector& gain, const FloatVector& bias,
                      float eps);

// Elementwise tanh-approximation GELU.
FloatMatrix gelu(const FloatMatrix& m);

// Reference float GEMM. Each output element accumulates its products in fixed
// k-ascending order, so results are reproducible bit for bit.
FloatMatrix matmul_f32(const FloatMatrix& a, const FloatMatrix& b);

FloatMatrix transpose(const FloatMatrix& m);
FloatMatrix add(const FloatMatrix& a, const FloatMatrix& b);
FloatMatrix slice_cols(const FloatMatrix& m, std::size_t first, std::size_t count);

}  // namespace ternavit
