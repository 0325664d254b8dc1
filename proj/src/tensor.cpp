#include "ternavit/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace ternavit {

bool all_finite(const FloatMatrix& m) {
  for (float v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const FloatVector& v) {
  for (float x : v.data)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_finite(const FloatMatrix& m, const char* context) {
  if (!all_finite(m)) fail(ErrorCode::NonFinite, std::string(context) + ": non-finite values");
}

FloatMatrix softmax_rows(const FloatMatrix& m) {
  if (m.rows > 0 && m.cols == 0) fail(ErrorCode::EmptyInput, "softmax_rows: zero-width rows");
  require_finite(m, "softmax_rows");
  FloatMatrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const float* x = m.row(i);
    float* y = out.row(i);
    float mx = x[0];
    for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, x[j]);
    float sum = 0.0f;
    for (std::size_t j = 0; j < m.cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (std::size_t j = 0; j < m.cols; ++j) y[j] /= sum;
  }
  return out;
}

FloatMatrix layernorm(const FloatMatrix& m, const FloatVector& gain, const FloatVector& bias,
                      float eps) {
  if (gain.len() != m.cols || bias.len() != m.cols)
    fail(ErrorCode::DimensionMismatch, "layernorm: gain/bias length must equal column count");
  if (m.cols == 0) fail(ErrorCode::EmptyInput, "layernorm: zero-width rows");
  require_finite(m, "layernorm");
  FloatMatrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const float* x = m.row(i);
    float* y = out.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) sum += x[j];
    const double mean = sum / static_cast<double>(m.cols);
    double var = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      const double d = x[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m.cols);
    const float mu = static_cast<float>(mean);
    const float inv = static_cast<float>(1.0 / std::sqrt(var + eps));
    for (std::size_t j = 0; j < m.cols; ++j)
      y[j] = (x[j] - mu) * inv * gain[j] + bias[j];
  }
  return out;
}

FloatMatrix gelu(const FloatMatrix& m) {
  require_finite(m, "gelu");
  constexpr float kSqrt2OverPi = 0.7978845608028654f;
  constexpr float kCubic = 0.044715f;
  FloatMatrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const float x = m.data[i];
    const float u = kSqrt2OverPi * (x + kCubic * x * x * x);
    out.data[i] = 0.5f * x * (1.0f + std::tanh(u));
  }
  return out;
}

FloatMatrix matmul_f32(const FloatMatrix& a, const FloatMatrix& b) {
  if (a.cols != b.rows) fail(ErrorCode::DimensionMismatch, "matmul_f32: inner dimensions differ");
  FloatMatrix out(a.rows, b.cols, 0.0f);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const float* arow = a.row(i);
    float* dst = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const float av = arow[k];
      const float* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) dst[j] += av * brow[j];
    }
  }
  return out;
}

FloatMatrix transpose(const FloatMatrix& m) {
  FloatMatrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out.at(j, i) = m.at(i, j);
  return out;
}

FloatMatrix add(const FloatMatrix& a, const FloatMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    fail(ErrorCode::DimensionMismatch, "add: shape mismatch");
  FloatMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

FloatMatrix slice_cols(const FloatMatrix& m, std::size_t first, std::size_t count) {
  if (first + count > m.cols) fail(ErrorCode::DimensionMismatch, "slice_cols: out of range");
  FloatMatrix out(m.rows, count);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const float* src = m.row(i) + first;
    std::copy(src, src + count, out.row(i));
  }
  return out;
}

}  // namespace ternavit
