#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "ternavit/model.hpp"
#include "ternavit/model_io.hpp"

using namespace ternavit;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.embed_dim = 8;
  cfg.ffn_mult = 2;
  cfg.patch_size = 2;
  cfg.image_size = 4;
  cfg.in_channels = 2;
  cfg.num_classes = 3;
  cfg.attn_mode = AttentionMode::MQA;
  cfg.ternary_roles = 0;
  return cfg;
}

Image random_image(std::mt19937& rng, const ModelConfig& cfg) {
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Image img(cfg.image_size, cfg.image_size, cfg.in_channels);
  for (float& v : img.data) v = dist(rng);
  return img;
}

bool bits_equal(const FloatVector& a, const FloatVector& b) {
  return a.len() == b.len() &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0;
}

}  // namespace

TEST_CASE("patchify raster layout") {
  ModelConfig cfg = tiny_config();
  cfg.in_channels = 1;
  Image img(4, 4, 1);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) img.at(y, x, 0) = static_cast<float>(10 * y + x);
  const FloatMatrix p = patchify(img, cfg);
  REQUIRE(p.rows == 4);
  REQUIRE(p.cols == 4);
  const float want[4][4] = {
      {0, 1, 10, 11}, {2, 3, 12, 13}, {20, 21, 30, 31}, {22, 23, 32, 33}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(p.at(i, j) == want[i][j]);

  Image constant(4, 4, 1, 2.0f);
  const FloatMatrix pc = patchify(constant, cfg);
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(pc.at(i, j) == pc.at(0, j));

  const ModelConfig full;  // 224x224x3, patch 16
  const FloatMatrix big = patchify(Image(224, 224, 3), full);
  CHECK(big.rows == 196);
  CHECK(big.cols == 768);

  CHECK_THROWS_AS(patchify(Image(6, 4, 1), cfg), Error);
}

TEST_CASE("forward equals a compositional oracle bitwise") {
  std::mt19937 rng(5);
  const ModelConfig cfg = tiny_config();
  const ModelWeights w = random_weights(cfg, 42);
  const Image img = random_image(rng, cfg);
  const FloatVector got = forward(img, w, cfg);

  FloatMatrix x(cfg.tokens(), cfg.embed_dim);
  const FloatMatrix tokens = matmul_f32(patchify(img, cfg), w.patch_embed);
  for (std::size_t j = 0; j < cfg.embed_dim; ++j) x.at(0, j) = w.class_token[j];
  for (std::size_t i = 0; i < tokens.rows; ++i)
    for (std::size_t j = 0; j < cfg.embed_dim; ++j) x.at(i + 1, j) = tokens.at(i, j);
  x = add(x, w.pos_embed);
  const auto& layer = w.layers[0];
  x = add(x, mqa_forward(layernorm(x, layer.norm1_gain, layer.norm1_bias, kLayerNormEps),
                         layer.attn, cfg.attention_config(), cfg.quant_eps));
  x = add(x, matmul_f32(gelu(matmul_f32(layernorm(x, layer.norm2_gain, layer.norm2_bias,
                                                  kLayerNormEps),
                                        layer.ffn_in.dense())),
                        layer.ffn_out.dense()));
  x = layernorm(x, w.final_norm_gain, w.final_norm_bias, kLayerNormEps);
  FloatMatrix cls(1, cfg.embed_dim);
  for (std::size_t j = 0; j < cfg.embed_dim; ++j) cls.at(0, j) = x.at(0, j);
  const FloatMatrix logits_row = matmul_f32(cls, w.head);
  FloatVector want(cfg.num_classes);
  for (std::size_t j = 0; j < cfg.num_classes; ++j)
    want[j] = logits_row.at(0, j) + w.head_bias[j];

  CHECK(bits_equal(got, want));
}

TEST_CASE("forward basics: determinism, zero weights, head symmetry") {
  std::mt19937 rng(7);
  const ModelConfig cfg = tiny_config();
  const Image img = random_image(rng, cfg);
  const ModelWeights w = random_weights(cfg, 9);

  CHECK(bits_equal(forward(img, w, cfg), forward(img, w, cfg)));

  ModelWeights swapped = w;
  for (std::size_t i = 0; i < cfg.embed_dim; ++i)
    std::swap(swapped.head.at(i, 0), swapped.head.at(i, 1));
  std::swap(swapped.head_bias[0], swapped.head_bias[1]);
  const FloatVector base = forward(img, w, cfg);
  const FloatVector sl = forward(img, swapped, cfg);
  CHECK(sl[0] == base[1]);
  CHECK(sl[1] == base[0]);
  CHECK(sl[2] == base[2]);

  ModelWeights shifted = w;
  for (float& b : shifted.head_bias.data) b += 1.5f;
  const FloatVector tl = forward(img, shifted, cfg);
  for (std::size_t j = 0; j < cfg.num_classes; ++j)
    CHECK(tl[j] == doctest::Approx(base[j] + 1.5f).epsilon(1e-5));
}

TEST_CASE("non-finite intermediates name the failing layer") {
  std::mt19937 rng(9);
  ModelConfig cfg = tiny_config();
  cfg.layers = 2;
  ModelWeights w = random_weights(cfg, 11);
  std::get<FloatMatrix>(w.layers[1].attn.wq.weights).data[3] =
      std::numeric_limits<float>::quiet_NaN();
  const Image img = random_image(rng, cfg);
  try {
    forward(img, w, cfg);
    FAIL("expected a non-finite error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
    CHECK(std::string(e.what()).find("layer 1 attention") != std::string::npos);
  }
}

TEST_CASE("ternary-path consistency on a packed model") {
  std::mt19937 rng(13);
  ModelConfig cfg = tiny_config();
  cfg.ternary_roles = kTernaryFfn | kTernaryAttnQkv | kTernaryAttnOut;
  const ModelWeights dense = random_weights(cfg, 21);
  const ModelWeights packed = convert_weights(dense, cfg);
  const ModelWeights unpacked = unpack_linears(packed);
  const Image img = random_image(rng, cfg);
  CHECK(bits_equal(forward(img, packed, cfg), forward(img, unpacked, cfg)));
}

TEST_CASE("parameter accounting matches the deployed configuration") {
  const ModelConfig cfg;  // L=3, H=8, E=512, MQA, 4x FFN, patch 16, 224^2
  const ParamCounts counts = param_count(cfg);
  CHECK(counts.ffn / cfg.layers == 2097152);
  CHECK(counts.attention / cfg.layers == 589824);
  CHECK(counts.patch_embed == 768 * 512);
  CHECK(counts.pos_embed == 197 * 512 + 512);
  CHECK(counts.total >= static_cast<std::size_t>(8.65e6 * 0.95));
  CHECK(counts.total <= static_cast<std::size_t>(8.65e6 * 1.05));

  ModelConfig mhsa = cfg;
  mhsa.attn_mode = AttentionMode::MHSA;
  CHECK(param_count(mhsa).total - counts.total == cfg.layers * 2 * 512 * 64 * (8 - 1));
}

TEST_CASE("stored-size accounting") {
  const ModelConfig cfg;
  const std::size_t bytes = model_size_bytes(cfg, default_precision_map(cfg));
  CHECK(bytes >= static_cast<std::size_t>(10.5e6 * 0.9));
  CHECK(bytes <= static_cast<std::size_t>(10.5e6 * 1.1));

  ModelConfig tiny = tiny_config();
  PrecisionMap f32_map;
  f32_map.ffn = Precision::F32;
  CHECK(model_size_bytes(tiny, f32_map) == 4 * param_count(tiny).total);

  PrecisionMap bf16_map;
  bf16_map.embeddings = bf16_map.norms = bf16_map.head = bf16_map.attn = Precision::Bf16;
  bf16_map.ffn = Precision::Bf16;
  CHECK(model_size_bytes(tiny, bf16_map) == 2 * param_count(tiny).total);
}

TEST_CASE("forward mac count is consistent with layer shapes") {
  ModelConfig cfg = tiny_config();
  const std::uint64_t t = cfg.tokens(), e = cfg.embed_dim;
  const std::uint64_t dh = e / cfg.heads;
  std::uint64_t want = cfg.n_patches() * cfg.patch_dim() * e;
  want += cfg.layers * (t * e * (e + 2 * dh) + 2 * cfg.heads * t * t * dh + t * e * e +
                        2 * t * e * cfg.ffn_dim());
  want += e * cfg.num_classes;
  CHECK(forward_mac_count(cfg) == want);
}
