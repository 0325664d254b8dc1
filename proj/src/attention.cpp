#include "ternavit/attention.hpp"

#include <cmath>

namespace ternavit {

void AttentionConfig::validate() const {
  if (embed_dim == 0 || heads == 0)
    fail(ErrorCode::InvalidArgument, "attention config: dimensions must be positive");
  if (embed_dim % heads != 0)
    fail(ErrorCode::InvalidArgument, "attention config: embed_dim must be divisible by heads");
}

std::size_t Linear::in_dim() const {
  if (const auto* m = std::get_if<FloatMatrix>(&weights)) return m->rows;
  if (const auto* t = std::get_if<TernaryWeightMatrix>(&weights)) return t->rows;
  return std::get<PackedWeightTiles>(weights).k_in;
}

std::size_t Linear::out_dim() const {
  if (const auto* m = std::get_if<FloatMatrix>(&weights)) return m->cols;
  if (const auto* t = std::get_if<TernaryWeightMatrix>(&weights)) return t->cols;
  return std::get<PackedWeightTiles>(weights).n_out;
}

FloatMatrix Linear::apply(const FloatMatrix& x, float eps) const {
  if (const auto* m = std::get_if<FloatMatrix>(&weights)) return matmul_f32(x, *m);
  if (const auto* t = std::get_if<TernaryWeightMatrix>(&weights))
    return bitlinear_forward(x, *t, eps);
  return bitlinear_forward_packed(x, std::get<PackedWeightTiles>(weights), eps);
}

FloatMatrix scaled_dot_attention(const FloatMatrix& q, const FloatMatrix& k,
                                 const FloatMatrix& v) {
  if (q.cols != k.cols)
    fail(ErrorCode::DimensionMismatch, "scaled_dot_attention: q/k width mismatch");
  if (k.rows != v.rows)
    fail(ErrorCode::DimensionMismatch, "scaled_dot_attention: k/v row mismatch");
  const float scale = 1.0f / std::sqrt(static_cast<float>(q.cols));
  FloatMatrix scores = matmul_f32(q, transpose(k));
  for (float& s : scores.data) s *= scale;
  return matmul_f32(softmax_rows(scores), v);
}

namespace {

void check_projection_shapes(const FloatMatrix& x, const AttentionWeights& w,
                             const AttentionConfig& cfg, std::size_t kv_width) {
  if (x.cols != cfg.embed_dim)
    fail(ErrorCode::DimensionMismatch, "attention: input width must equal embed_dim");
  if (w.wq.in_dim() != cfg.embed_dim || w.wq.out_dim() != cfg.embed_dim)
    fail(ErrorCode::DimensionMismatch, "attention: wq must be D x D");
  if (w.wk.in_dim() != cfg.embed_dim || w.wk.out_dim() != kv_width)
    fail(ErrorCode::DimensionMismatch, "attention: wk width mismatch");
  if (w.wv.in_dim() != cfg.embed_dim || w.wv.out_dim() != kv_width)
    fail(ErrorCode::DimensionMismatch, "attention: wv width mismatch");
  if (w.wo.in_dim() != cfg.embed_dim || w.wo.out_dim() != cfg.embed_dim)
    fail(ErrorCode::DimensionMismatch, "attention: wo must be D x D");
}

void paste_cols(FloatMatrix& dst, const FloatMatrix& src, std::size_t first) {
  for (std::size_t i = 0; i < src.rows; ++i) {
    const float* s = src.row(i);
    float* d = dst.row(i) + first;
    for (std::size_t j = 0; j < src.cols; ++j) d[j] = s[j];
  }
}

}  // namespace

FloatMatrix mhsa_forward(const FloatMatrix& x, const AttentionWeights& w,
                         const AttentionConfig& cfg, float eps) {
  cfg.validate();
  if (cfg.mode != AttentionMode::MHSA)
    fail(ErrorCode::InvalidArgument, "mhsa_forward: config mode is not MHSA");
  check_projection_shapes(x, w, cfg, cfg.embed_dim);
  const std::size_t dh = cfg.head_dim();
  const FloatMatrix q = w.wq.apply(x, eps);
  const FloatMatrix k = w.wk.apply(x, eps);
  const FloatMatrix v = w.wv.apply(x, eps);
  FloatMatrix merged(x.rows, cfg.embed_dim);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const FloatMatrix yh = scaled_dot_attention(slice_cols(q, h * dh, dh),
                                                slice_cols(k, h * dh, dh),
                                                slice_cols(v, h * dh, dh));
    paste_cols(merged, yh, h * dh);
  }
  return w.wo.apply(merged, eps);
}

FloatMatrix mqa_forward(const FloatMatrix& x, const AttentionWeights& w,
                        const AttentionConfig& cfg, float eps) {
  cfg.validate();
  if (cfg.mode != AttentionMode::MQA)
    fail(ErrorCode::InvalidArgument, "mqa_forward: config mode is not MQA");
  check_projection_shapes(x, w, cfg, cfg.head_dim());
  const std::size_t dh = cfg.head_dim();
  const FloatMatrix q = w.wq.apply(x, eps);
  const FloatMatrix k_shared = w.wk.apply(x, eps);
  const FloatMatrix v_shared = w.wv.apply(x, eps);
  FloatMatrix merged(x.rows, cfg.embed_dim);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const FloatMatrix yh = scaled_dot_attention(slice_cols(q, h * dh, dh), k_shared, v_shared);
    paste_cols(merged, yh, h * dh);
  }
  return w.wo.apply(merged, eps);
}

FloatMatrix attention_forward(const FloatMatrix& x, const AttentionWeights& w,
                              const AttentionConfig& cfg, float eps) {
  return cfg.mode == AttentionMode::MQA ? mqa_forward(x, w, cfg, eps)
                                        : mhsa_forward(x, w, cfg, eps);
}

std::size_t attn_param_count(const AttentionConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.embed_dim;
  const std::size_t dh = cfg.head_dim();
  const std::size_t h = cfg.heads;
  if (cfg.mode == AttentionMode::MHSA) return 4 * d * dh * h;
  return 2 * d * dh * h + 2 * d * dh;
}

std::size_t attn_kv_param_count(const AttentionConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.embed_dim;
  const std::size_t dh = cfg.head_dim();
  return cfg.mode == AttentionMode::MHSA ? 2 * d * dh * cfg.heads : 2 * d * dh;
}

}  // namespace ternavit
