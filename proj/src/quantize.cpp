#include "ternavit/quantize.hpp"

#include <cmath>
#include <cstdlib>

namespace ternavit {

namespace {

void check_quant_input(const FloatMatrix& m, float eps, const char* op) {
  if (m.rows == 0 || m.cols == 0) fail(ErrorCode::EmptyInput, std::string(op) + ": empty matrix");
  if (!(eps > 0.0f)) fail(ErrorCode::InvalidArgument, std::string(op) + ": eps must be positive");
  require_finite(m, op);
}

inline std::int8_t round_clip(double x, double lo, double hi) {
  double r = std::round(x);  // half away from zero
  if (r < lo) r = lo;
  if (r > hi) r = hi;
  return static_cast<std::int8_t>(r);
}

}  // namespace

TernaryWeightMatrix absmean_quantize(const FloatMatrix& w, float eps) {
  check_quant_input(w, eps, "absmean_quantize");
  double sum_abs = 0.0;
  for (float v : w.data) sum_abs += std::fabs(static_cast<double>(v));
  const float beta = static_cast<float>(sum_abs / static_cast<double>(w.size()));
  TernaryWeightMatrix t(w.rows, w.cols, beta);
  const double denom = static_cast<double>(beta) + static_cast<double>(eps);
  for (std::size_t i = 0; i < w.size(); ++i)
    t.codes[i] = round_clip(static_cast<double>(w.data[i]) / denom, -1.0, 1.0);
  return t;
}

QuantizedActivationMatrix absmax_quantize(const FloatMatrix& a, float eps) {
  check_quant_input(a, eps, "absmax_quantize");
  QuantizedActivationMatrix q;
  q.rows = a.rows;
  q.cols = a.cols;
  q.values.resize(a.size());
  q.gamma.resize(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const float* x = a.row(i);
    double amax = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j)
      amax = std::max(amax, std::fabs(static_cast<double>(x[j])));
    const float gamma = static_cast<float>(amax / 127.0);
    q.gamma[i] = gamma;
    const double denom = static_cast<double>(gamma) + static_cast<double>(eps);
    std::int8_t* out = q.values.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j)
      out[j] = round_clip(static_cast<double>(x[j]) / denom, -128.0, 127.0);
  }
  return q;
}

FloatMatrix dequantize(const IntAccumulatorMatrix& acc, const std::vector<float>& gamma,
                       float beta) {
  if (gamma.size() != acc.rows)
    fail(ErrorCode::DimensionMismatch, "dequantize: gamma length must equal row count");
  FloatMatrix out(acc.rows, acc.cols);
  for (std::size_t i = 0; i < acc.rows; ++i) {
    const float scale = gamma[i] * beta;
    const std::int32_t* src = acc.values.data() + i * acc.cols;
    float* dst = out.row(i);
    for (std::size_t j = 0; j < acc.cols; ++j)
      dst[j] = static_cast<float>(src[j]) * scale;
  }
  return out;
}

IntAccumulatorMatrix int_matmul(const QuantizedActivationMatrix& a, const TernaryWeightMatrix& w) {
  if (a.cols != w.rows)
    fail(ErrorCode::DimensionMismatch, "int_matmul: inner dimensions differ");
  IntAccumulatorMatrix out(a.rows, w.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    std::int32_t* dst = out.values.data() + i * w.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const std::int32_t av = a.values[i * a.cols + k];
      if (av == 0) continue;
      const std::int8_t* wrow = w.codes.data() + k * w.cols;
      for (std::size_t j = 0; j < w.cols; ++j) dst[j] += av * wrow[j];
    }
  }
  return out;
}

FloatMatrix bitlinear_forward(const FloatMatrix& a, const TernaryWeightMatrix& w, float eps) {
  if (a.cols != w.rows)
    fail(ErrorCode::DimensionMismatch, "bitlinear_forward: inner dimensions differ");
  const QuantizedActivationMatrix q = absmax_quantize(a, eps);
  const IntAccumulatorMatrix acc = int_matmul(q, w);
  return dequantize(acc, q.gamma, w.beta);
}

}  // namespace ternavit
