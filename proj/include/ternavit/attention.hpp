#pragma once

#include <variant>

#include "ternavit/kernel.hpp"

namespace ternavit {

enum class AttentionMode { MHSA, MQA };

struct AttentionConfig {
  std::size_t embed_dim = 0;  // D
  std::size_t heads = 1;      // H
  AttentionMode mode = AttentionMode::MHSA;

  std::size_t head_dim() const { return embed_dim / heads; }
  void validate() const;
};

// A projection that can execute dense f32, ternary-at-runtime, or packed.
// All three integer routes produce bitwise-identical outputs.
struct Linear {
  std::variant<FloatMatrix, TernaryWeightMatrix, PackedWeightTiles> weights;

  Linear() : weights(FloatMatrix{}) {}
  explicit Linear(FloatMatrix m) : weights(std::move(m)) {}
  explicit Linear(TernaryWeightMatrix t) : weights(std::move(t)) {}
  explicit Linear(PackedWeightTiles p) : weights(std::move(p)) {}

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  bool is_dense() const { return std::holds_alternative<FloatMatrix>(weights); }
  const FloatMatrix& dense() const { return std::get<FloatMatrix>(weights); }
  FloatMatrix apply(const FloatMatrix& x, float eps = kDefaultQuantEps) const;
  bool operator==(const Linear&) const = default;
};

struct AttentionWeights {
  Linear wq;  // D x D
  Linear wk;  // D x D for MHSA, D x head_dim for MQA (shared across heads)
  Linear wv;  // like wk
  Linear wo;  // D x D
  bool operator==(const AttentionWeights&) const = default;
};

// softmax(q k^T / sqrt(d_k)) v
FloatMatrix scaled_dot_attention(const FloatMatrix& q, const FloatMatrix& k,
                                 const FloatMatrix& v);

// Per-head Q/K/V slices attend independently; heads are concatenated and
// projected through wo.
FloatMatrix mhsa_forward(const FloatMatrix& x, const AttentionWeights& w,
                         const AttentionConfig& cfg, float eps = kDefaultQuantEps);

// Shared K/V computed once; every head attends with its own Q slice against
// them. With per-head K/V weights replicated from the shared ones, MHSA and
// MQA run the same float op sequence and agree bitwise.
FloatMatrix mqa_forward(const FloatMatrix& x, const AttentionWeights& w,
                        const AttentionConfig& cfg, float eps = kDefaultQuantEps);

FloatMatrix attention_forward(const FloatMatrix& x, const AttentionWeights& w,
                              const AttentionConfig& cfg, float eps = kDefaultQuantEps);

// Projection parameter counts: MHSA 4*D*d_h*H, MQA 2*D*d_h*H + 2*D*d_h.
std::size_t attn_param_count(const AttentionConfig& cfg);

// K and V projection parameters only; the MQA/MHSA ratio is exactly 1/H.
std::size_t attn_kv_param_count(const AttentionConfig& cfg);

}  // namespace ternavit
