#pragma once

#include <cstdint>
#include <vector>

#include "ternavit/tensor.hpp"

namespace ternavit {

inline constexpr float kDefaultQuantEps = 1e-6f;

// Ternary weights: codes in {-1, 0, +1} plus one scalar scale beta.
// Shape convention: rows = k (input depth), cols = n (output channels),
// so a forward pass computes activations(m x k) * codes(k x n).
struct TernaryWeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> codes;  // row-major
  float beta = 0.0f;

  TernaryWeightMatrix() = default;
  TernaryWeightMatrix(std::size_t r, std::size_t c, float b = 0.0f)
      : rows(r), cols(c), codes(r * c, 0), beta(b) {}
  std::size_t size() const { return rows * cols; }
  std::int8_t at(std::size_t i, std::size_t j) const { return codes[i * cols + j]; }
  bool operator==(const TernaryWeightMatrix&) const = default;
};

// Row-quantized int8 activations with one scale gamma per row.
struct QuantizedActivationMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> values;  // row-major
  std::vector<float> gamma;         // length rows

  std::size_t size() const { return rows * cols; }
  std::int8_t at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// 32-bit integer accumulators for the W2A8 product before dequantization.
struct IntAccumulatorMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> values;

  IntAccumulatorMatrix() = default;
  IntAccumulatorMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0) {}
  std::int32_t at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  bool operator==(const IntAccumulatorMatrix&) const = default;
};

// Weight ternarization: beta = mean |w|, codes = clamp(round(w/(beta+eps)), -1, 1).
// Rounding is half-away-from-zero; the division runs in double so ties are
// resolved identically everywhere.
TernaryWeightMatrix absmean_quantize(const FloatMatrix& w, float eps = kDefaultQuantEps);

// Activation quantization: per row, gamma = max|row| / 127 and
// values = clamp(round(row/(gamma+eps)), -128, 127).
QuantizedActivationMatrix absmax_quantize(const FloatMatrix& a, float eps = kDefaultQuantEps);

// out[i][j] = acc[i][j] * (gamma[i] * beta), the scale product formed first.
FloatMatrix dequantize(const IntAccumulatorMatrix& acc, const std::vector<float>& gamma,
                       float beta);

// 32-bit exact integer GEMM over int8 activations and ternary codes.
IntAccumulatorMatrix int_matmul(const QuantizedActivationMatrix& a, const TernaryWeightMatrix& w);

// The full W2A8 linear layer: absmax_quantize -> int_matmul -> dequantize.
FloatMatrix bitlinear_forward(const FloatMatrix& a, const TernaryWeightMatrix& w,
                              float eps = kDefaultQuantEps);

}  // namespace ternavit
