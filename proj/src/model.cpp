#include "ternavit/model.hpp"

#include <random>

namespace ternavit {

void ModelConfig::validate() const {
  if (layers == 0 || heads == 0 || embed_dim == 0 || ffn_mult == 0 || patch_size == 0 ||
      image_size == 0 || in_channels == 0 || num_classes == 0)
    fail(ErrorCode::InvalidArgument, "model config: all counts must be positive");
  if (image_size % patch_size != 0)
    fail(ErrorCode::InvalidArgument, "model config: image_size must be divisible by patch_size");
  if (embed_dim % heads != 0)
    fail(ErrorCode::InvalidArgument, "model config: embed_dim must be divisible by heads");
  if (!norm_mean.empty() && norm_mean.size() != in_channels)
    fail(ErrorCode::InvalidArgument, "model config: norm_mean length != in_channels");
  if (!norm_std.empty() && norm_std.size() != in_channels)
    fail(ErrorCode::InvalidArgument, "model config: norm_std length != in_channels");
  if (!(quant_eps > 0.0f))
    fail(ErrorCode::InvalidArgument, "model config: quant_eps must be positive");
}

FloatMatrix patchify(const Image& image, const ModelConfig& cfg) {
  cfg.validate();
  if (image.height != cfg.image_size || image.width != cfg.image_size ||
      image.channels != cfg.in_channels)
    fail(ErrorCode::DimensionMismatch, "patchify: image does not match config");
  const std::size_t side = cfg.patches_per_side();
  const std::size_t p = cfg.patch_size;
  FloatMatrix out(cfg.n_patches(), cfg.patch_dim());
  for (std::size_t pr = 0; pr < side; ++pr) {
    for (std::size_t pc = 0; pc < side; ++pc) {
      float* dst = out.row(pr * side + pc);
      for (std::size_t y = 0; y < p; ++y)
        for (std::size_t x = 0; x < p; ++x)
          for (std::size_t c = 0; c < cfg.in_channels; ++c)
            *dst++ = image.at(pr * p + y, pc * p + x, c);
    }
  }
  return out;
}

Image standardize(const Image& image, const ModelConfig& cfg) {
  Image out = image;
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x)
      for (std::size_t c = 0; c < image.channels; ++c)
        out.at(y, x, c) = (image.at(y, x, c) - cfg.channel_mean(c)) / cfg.channel_std(c);
  return out;
}

namespace {

void check_stage_finite(const FloatMatrix& m, const std::string& stage) {
  if (!all_finite(m))
    fail(ErrorCode::NonFinite, "forward: non-finite values after " + stage);
}

// Runs one forward stage and prefixes any non-finite error with its name.
template <typename Fn>
FloatMatrix run_stage(const std::string& stage, Fn&& fn) {
  try {
    FloatMatrix out = fn();
    check_stage_finite(out, stage);
    return out;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFinite)
      fail(ErrorCode::NonFinite, "forward: " + stage + ": " + e.what());
    throw;
  }
}

}  // namespace

FloatVector forward(const Image& image, const ModelWeights& w, const ModelConfig& cfg) {
  cfg.validate();
  const FloatMatrix patches = patchify(image, cfg);
  if (w.patch_embed.rows != cfg.patch_dim() || w.patch_embed.cols != cfg.embed_dim)
    fail(ErrorCode::DimensionMismatch, "forward: patch_embed shape mismatch");
  if (w.pos_embed.rows != cfg.tokens() || w.pos_embed.cols != cfg.embed_dim)
    fail(ErrorCode::DimensionMismatch, "forward: pos_embed shape mismatch");
  if (w.class_token.len() != cfg.embed_dim)
    fail(ErrorCode::DimensionMismatch, "forward: class_token length mismatch");
  if (w.layers.size() != cfg.layers)
    fail(ErrorCode::DimensionMismatch, "forward: layer count mismatch");
  if (w.head.rows != cfg.embed_dim || w.head.cols != cfg.num_classes ||
      w.head_bias.len() != cfg.num_classes)
    fail(ErrorCode::DimensionMismatch, "forward: head shape mismatch");

  FloatMatrix x = run_stage("embedding", [&] {
    const FloatMatrix tokens = matmul_f32(patches, w.patch_embed);
    FloatMatrix y(cfg.tokens(), cfg.embed_dim);
    for (std::size_t j = 0; j < cfg.embed_dim; ++j) y.at(0, j) = w.class_token[j];
    for (std::size_t i = 0; i < tokens.rows; ++i)
      for (std::size_t j = 0; j < cfg.embed_dim; ++j) y.at(i + 1, j) = tokens.at(i, j);
    return add(y, w.pos_embed);
  });

  const AttentionConfig attn_cfg = cfg.attention_config();
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const TransformerLayerWeights& layer = w.layers[l];
    x = run_stage("layer " + std::to_string(l) + " attention", [&] {
      return add(x, attention_forward(
                        layernorm(x, layer.norm1_gain, layer.norm1_bias, kLayerNormEps),
                        layer.attn, attn_cfg, cfg.quant_eps));
    });
    x = run_stage("layer " + std::to_string(l) + " ffn", [&] {
      return add(x, layer.ffn_out.apply(
                        gelu(layer.ffn_in.apply(
                            layernorm(x, layer.norm2_gain, layer.norm2_bias, kLayerNormEps),
                            cfg.quant_eps)),
                        cfg.quant_eps));
    });
  }

  x = run_stage("final norm",
                [&] { return layernorm(x, w.final_norm_gain, w.final_norm_bias, kLayerNormEps); });

  FloatMatrix cls(1, cfg.embed_dim);
  for (std::size_t j = 0; j < cfg.embed_dim; ++j) cls.at(0, j) = x.at(0, j);
  const FloatMatrix logits_row = matmul_f32(cls, w.head);
  FloatVector logits(cfg.num_classes);
  for (std::size_t j = 0; j < cfg.num_classes; ++j)
    logits[j] = logits_row.at(0, j) + w.head_bias[j];
  return logits;
}

ParamCounts param_count(const ModelConfig& cfg) {
  cfg.validate();
  ParamCounts c;
  c.patch_embed = cfg.patch_dim() * cfg.embed_dim;
  c.pos_embed = cfg.tokens() * cfg.embed_dim + cfg.embed_dim;  // + class token
  c.attention = cfg.layers * attn_param_count(cfg.attention_config());
  c.ffn = cfg.layers * 2 * cfg.embed_dim * cfg.ffn_dim();
  c.norms = cfg.layers * 4 * cfg.embed_dim + 2 * cfg.embed_dim;
  c.head = cfg.embed_dim * cfg.num_classes + cfg.num_classes;
  c.total = c.patch_embed + c.pos_embed + c.attention + c.ffn + c.norms + c.head;
  return c;
}

PrecisionMap default_precision_map(const ModelConfig& cfg) {
  const Precision dense = cfg.dense_precision;
  PrecisionMap map;
  map.embeddings = dense;
  map.norms = dense;
  map.head = dense;
  map.attn = (cfg.ternary_roles & (kTernaryAttnQkv | kTernaryAttnOut))
                 ? Precision::TernaryPacked
                 : dense;
  map.ffn = (cfg.ternary_roles & kTernaryFfn) ? Precision::TernaryPacked : dense;
  return map;
}

namespace {

std::size_t dense_bytes(Precision p, std::size_t numel, const char* what) {
  switch (p) {
    case Precision::F32:
      return 4 * numel;
    case Precision::Bf16:
      return 2 * numel;
    case Precision::TernaryPacked:
      fail(ErrorCode::UnknownPrecision,
           std::string("model_size_bytes: ") + what + " cannot be ternary-packed");
  }
  fail(ErrorCode::UnknownPrecision, "model_size_bytes: unknown precision tag");
}

// Matrix stored as rows=k_in, cols=n_out; ternary adds 2 bytes for beta.
std::size_t matrix_bytes(Precision p, std::size_t rows, std::size_t cols) {
  if (p == Precision::TernaryPacked) return packed_weight_bytes(cols, rows) + 2;
  return dense_bytes(p, rows * cols, "matrix");
}

}  // namespace

std::size_t model_size_bytes(const ModelConfig& cfg, const PrecisionMap& map) {
  cfg.validate();
  std::size_t bytes = 0;
  bytes += matrix_bytes(map.embeddings, cfg.patch_dim(), cfg.embed_dim);
  bytes += matrix_bytes(map.embeddings, cfg.tokens(), cfg.embed_dim);
  bytes += dense_bytes(map.embeddings, cfg.embed_dim, "class token");
  const std::size_t kv = cfg.kv_width();
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    bytes += dense_bytes(map.norms, 4 * cfg.embed_dim, "norms");
    bytes += matrix_bytes(map.attn, cfg.embed_dim, cfg.embed_dim);  // wq
    bytes += matrix_bytes(map.attn, cfg.embed_dim, kv);             // wk
    bytes += matrix_bytes(map.attn, cfg.embed_dim, kv);             // wv
    bytes += matrix_bytes(map.attn, cfg.embed_dim, cfg.embed_dim);  // wo
    bytes += matrix_bytes(map.ffn, cfg.embed_dim, cfg.ffn_dim());
    bytes += matrix_bytes(map.ffn, cfg.ffn_dim(), cfg.embed_dim);
  }
  bytes += dense_bytes(map.norms, 2 * cfg.embed_dim, "final norm");
  bytes += matrix_bytes(map.head, cfg.embed_dim, cfg.num_classes);
  bytes += dense_bytes(map.head, cfg.num_classes, "head bias");
  return bytes;
}

std::uint64_t forward_mac_count(const ModelConfig& cfg) {
  cfg.validate();
  const std::uint64_t t = cfg.tokens();
  const std::uint64_t e = cfg.embed_dim;
  const std::uint64_t dh = e / cfg.heads;
  const std::uint64_t kv = cfg.kv_width();
  std::uint64_t macs = static_cast<std::uint64_t>(cfg.n_patches()) * cfg.patch_dim() * e;
  const std::uint64_t per_layer = t * e * (e + 2 * kv)          // q/k/v projections
                                  + 2 * cfg.heads * t * t * dh  // scores + weighted sum
                                  + t * e * e                   // output projection
                                  + 2 * t * e * cfg.ffn_dim();  // ffn
  macs += cfg.layers * per_layer;
  macs += e * cfg.num_classes;
  return macs;
}

ModelWeights random_weights(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-0.08f, 0.08f);
  auto fill_matrix = [&](std::size_t r, std::size_t c) {
    FloatMatrix m(r, c);
    for (float& v : m.data) v = dist(rng);
    return m;
  };
  auto fill_vector = [&](std::size_t n, float center) {
    FloatVector v(n);
    for (float& x : v.data) x = center + dist(rng);
    return v;
  };
  ModelWeights w;
  w.patch_embed = fill_matrix(cfg.patch_dim(), cfg.embed_dim);
  w.pos_embed = fill_matrix(cfg.tokens(), cfg.embed_dim);
  w.class_token = fill_vector(cfg.embed_dim, 0.0f);
  const std::size_t kv = cfg.kv_width();
  w.layers.resize(cfg.layers);
  for (auto& layer : w.layers) {
    layer.norm1_gain = fill_vector(cfg.embed_dim, 1.0f);
    layer.norm1_bias = fill_vector(cfg.embed_dim, 0.0f);
    layer.attn.wq = Linear(fill_matrix(cfg.embed_dim, cfg.embed_dim));
    layer.attn.wk = Linear(fill_matrix(cfg.embed_dim, kv));
    layer.attn.wv = Linear(fill_matrix(cfg.embed_dim, kv));
    layer.attn.wo = Linear(fill_matrix(cfg.embed_dim, cfg.embed_dim));
    layer.norm2_gain = fill_vector(cfg.embed_dim, 1.0f);
    layer.norm2_bias = fill_vector(cfg.embed_dim, 0.0f);
    layer.ffn_in = Linear(fill_matrix(cfg.embed_dim, cfg.ffn_dim()));
    layer.ffn_out = Linear(fill_matrix(cfg.ffn_dim(), cfg.embed_dim));
  }
  w.final_norm_gain = fill_vector(cfg.embed_dim, 1.0f);
  w.final_norm_bias = fill_vector(cfg.embed_dim, 0.0f);
  w.head = fill_matrix(cfg.embed_dim, cfg.num_classes);
  w.head_bias = fill_vector(cfg.num_classes, 0.0f);
  return w;
}

}  // namespace ternavit
