#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ternavit/attention.hpp"

namespace ternavit {

enum class Precision : std::uint32_t { F32 = 0, Bf16 = 1, TernaryPacked = 2 };

// Which linear layers run ternary W2A8; everything else stays dense.
inline constexpr unsigned kTernaryFfn = 1u << 0;
inline constexpr unsigned kTernaryAttnQkv = 1u << 1;
inline constexpr unsigned kTernaryAttnOut = 1u << 2;

struct ModelConfig {
  std::size_t layers = 3;
  std::size_t heads = 8;
  std::size_t embed_dim = 512;
  std::size_t ffn_mult = 4;
  std::size_t patch_size = 16;
  std::size_t image_size = 224;
  std::size_t in_channels = 3;
  std::size_t num_classes = 9;
  AttentionMode attn_mode = AttentionMode::MQA;
  unsigned ternary_roles = kTernaryFfn;
  Precision dense_precision = Precision::F32;
  float quant_eps = kDefaultQuantEps;
  std::vector<float> norm_mean;  // per channel; empty means 0.5
  std::vector<float> norm_std;   // per channel; empty means 0.5

  std::size_t patches_per_side() const { return image_size / patch_size; }
  std::size_t n_patches() const { return patches_per_side() * patches_per_side(); }
  std::size_t tokens() const { return n_patches() + 1; }  // + class token
  std::size_t ffn_dim() const { return ffn_mult * embed_dim; }
  std::size_t patch_dim() const { return patch_size * patch_size * in_channels; }
  std::size_t kv_width() const {
    return attn_mode == AttentionMode::MQA ? embed_dim / heads : embed_dim;
  }
  AttentionConfig attention_config() const { return {embed_dim, heads, attn_mode}; }
  float channel_mean(std::size_t c) const { return norm_mean.empty() ? 0.5f : norm_mean[c]; }
  float channel_std(std::size_t c) const { return norm_std.empty() ? 0.5f : norm_std[c]; }
  void validate() const;
};

struct TransformerLayerWeights {
  FloatVector norm1_gain, norm1_bias;
  AttentionWeights attn;
  FloatVector norm2_gain, norm2_bias;
  Linear ffn_in;   // E_d -> E_ff
  Linear ffn_out;  // E_ff -> E_d
  bool operator==(const TransformerLayerWeights&) const = default;
};

struct ModelWeights {
  FloatMatrix patch_embed;  // patch_dim x E_d
  FloatMatrix pos_embed;    // tokens x E_d
  FloatVector class_token;  // E_d
  std::vector<TransformerLayerWeights> layers;
  FloatVector final_norm_gain, final_norm_bias;
  FloatMatrix head;       // E_d x num_classes
  FloatVector head_bias;  // num_classes
  bool operator==(const ModelWeights&) const = default;
};

// HxWxC interleaved image, values expected in [0,1] before standardization.
struct Image {
  std::size_t height = 0, width = 0, channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}
  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return data[(y * width + x) * channels + c];
  }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * width + x) * channels + c];
  }
};

// Raster-scan patch extraction: one row per patch, each row the flattened
// patch_size x patch_size x channels block in (y, x, channel) order.
FloatMatrix patchify(const Image& image, const ModelConfig& cfg);

// (x - mean[c]) / std[c] per channel, with the constants from the config.
Image standardize(const Image& image, const ModelConfig& cfg);

// Full forward pass: patch embed, class token + positional embeddings, then
// pre-norm residual blocks x += Attn(LN(x)); x += FFN(LN(x)), a final
// layernorm, and the class-token readout through the head.
FloatVector forward(const Image& image, const ModelWeights& w, const ModelConfig& cfg);

struct ParamCounts {
  std::size_t patch_embed = 0;
  std::size_t pos_embed = 0;  // includes the class token
  std::size_t attention = 0;
  std::size_t ffn = 0;
  std::size_t norms = 0;
  std::size_t head = 0;
  std::size_t total = 0;
};

ParamCounts param_count(const ModelConfig& cfg);

struct PrecisionMap {
  Precision embeddings = Precision::F32;  // patch_embed, pos_embed, class_token
  Precision norms = Precision::F32;
  Precision head = Precision::F32;
  Precision attn = Precision::F32;
  Precision ffn = Precision::TernaryPacked;
};

// Map implied by the config: ternary roles override the dense precision.
PrecisionMap default_precision_map(const ModelConfig& cfg);

// Stored bytes per the map: ternary-packed layers at packed_weight_bytes plus
// 2 bytes per beta scale, bf16 at 2 bytes/param, f32 at 4. Per-row activation
// scales are runtime values and count nothing.
std::size_t model_size_bytes(const ModelConfig& cfg, const PrecisionMap& map);

// Analytic multiply-accumulate count of one forward pass; ops = 2 * MACs.
std::uint64_t forward_mac_count(const ModelConfig& cfg);

// Synthetic dense weights for demos, benches, and tests.
ModelWeights random_weights(const ModelConfig& cfg, std::uint64_t seed);

inline constexpr float kLayerNormEps = 1e-5f;

}  // namespace ternavit
