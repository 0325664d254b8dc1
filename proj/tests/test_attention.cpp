#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "ternavit/attention.hpp"

using namespace ternavit;

namespace {

FloatMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  FloatMatrix m(r, c);
  for (float& v : m.data) v = dist(rng);
  return m;
}

bool bits_equal(const FloatMatrix& a, const FloatMatrix& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0;
}

AttentionWeights random_weights(std::mt19937& rng, std::size_t d, std::size_t kv) {
  AttentionWeights w;
  w.wq = Linear(random_matrix(rng, d, d));
  w.wk = Linear(random_matrix(rng, d, kv));
  w.wv = Linear(random_matrix(rng, d, kv));
  w.wo = Linear(random_matrix(rng, d, d));
  return w;
}

}  // namespace

TEST_CASE("scaled dot attention fixed cases") {
  std::mt19937 rng(3);
  // One key/value row: softmax of a scalar is one.
  const FloatMatrix q = random_matrix(rng, 1, 5);
  const FloatMatrix k = random_matrix(rng, 1, 5);
  const FloatMatrix v = random_matrix(rng, 1, 7);
  CHECK(bits_equal(scaled_dot_attention(q, k, v), v));

  // Closed form: scores [0, ln 3] mix the value rows 0.25 / 0.75.
  FloatMatrix q1(1, 1), k2(2, 1), v2(2, 2);
  q1.at(0, 0) = 1.0f;
  k2.at(0, 0) = 0.0f;
  k2.at(1, 0) = std::log(3.0f);
  v2.data = {2.0f, -1.0f, 6.0f, 3.0f};
  const FloatMatrix mix = scaled_dot_attention(q1, k2, v2);
  CHECK(mix.at(0, 0) == doctest::Approx(0.25 * 2 + 0.75 * 6).epsilon(1e-6));
  CHECK(mix.at(0, 1) == doctest::Approx(0.25 * -1 + 0.75 * 3).epsilon(1e-6));

  CHECK_THROWS_AS(scaled_dot_attention(FloatMatrix(1, 3), FloatMatrix(2, 4), FloatMatrix(2, 2)),
                  Error);
  CHECK_THROWS_AS(scaled_dot_attention(FloatMatrix(1, 3), FloatMatrix(2, 3), FloatMatrix(3, 2)),
                  Error);
}

TEST_CASE("single-head attention reduces to the plain form") {
  std::mt19937 rng(7);
  const std::size_t d = 6, tokens = 4;
  const FloatMatrix x = random_matrix(rng, tokens, d);
  const AttentionWeights w = random_weights(rng, d, d);
  const AttentionConfig cfg{d, 1, AttentionMode::MHSA};
  const FloatMatrix got = mhsa_forward(x, w, cfg);
  const FloatMatrix want = matmul_f32(
      scaled_dot_attention(matmul_f32(x, w.wq.dense()), matmul_f32(x, w.wk.dense()),
                           matmul_f32(x, w.wv.dense())),
      w.wo.dense());
  CHECK(bits_equal(got, want));

  const FloatMatrix mqa = mqa_forward(x, w, {d, 1, AttentionMode::MQA});
  CHECK(bits_equal(mqa, got));
}

TEST_CASE("multi-head forward matches a per-head brute force") {
  std::mt19937 rng(11);
  const std::size_t heads = 2, dh = 4, d = heads * dh, tokens = 4;
  const FloatMatrix x = random_matrix(rng, tokens, d);
  const AttentionWeights w = random_weights(rng, d, d);
  const FloatMatrix got = mhsa_forward(x, w, {d, heads, AttentionMode::MHSA});

  const FloatMatrix q = matmul_f32(x, w.wq.dense());
  const FloatMatrix k = matmul_f32(x, w.wk.dense());
  const FloatMatrix v = matmul_f32(x, w.wv.dense());
  FloatMatrix concat(tokens, d);
  for (std::size_t h = 0; h < heads; ++h) {
    FloatMatrix scores =
        matmul_f32(slice_cols(q, h * dh, dh), transpose(slice_cols(k, h * dh, dh)));
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    for (float& s : scores.data) s *= scale;
    const FloatMatrix yh = matmul_f32(softmax_rows(scores), slice_cols(v, h * dh, dh));
    for (std::size_t i = 0; i < tokens; ++i)
      for (std::size_t j = 0; j < dh; ++j) concat.at(i, h * dh + j) = yh.at(i, j);
  }
  CHECK(bits_equal(got, matmul_f32(concat, w.wo.dense())));
}

TEST_CASE("shared-KV forward matches a brute force and the replicated-MHSA path") {
  std::mt19937 rng(13);
  const std::size_t heads = 4, dh = 4, d = heads * dh, tokens = 4;
  const FloatMatrix x = random_matrix(rng, tokens, d);
  const AttentionWeights w = random_weights(rng, d, dh);
  const FloatMatrix got = mqa_forward(x, w, {d, heads, AttentionMode::MQA});

  const FloatMatrix q = matmul_f32(x, w.wq.dense());
  const FloatMatrix ks = matmul_f32(x, w.wk.dense());
  const FloatMatrix vs = matmul_f32(x, w.wv.dense());
  FloatMatrix concat(tokens, d);
  for (std::size_t h = 0; h < heads; ++h) {
    FloatMatrix scores = matmul_f32(slice_cols(q, h * dh, dh), transpose(ks));
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    for (float& s : scores.data) s *= scale;
    const FloatMatrix yh = matmul_f32(softmax_rows(scores), vs);
    for (std::size_t i = 0; i < tokens; ++i)
      for (std::size_t j = 0; j < dh; ++j) concat.at(i, h * dh + j) = yh.at(i, j);
  }
  CHECK(bits_equal(got, matmul_f32(concat, w.wo.dense())));

  // Replicate the shared projections into per-head MHSA blocks.
  AttentionWeights mhsa_w = w;
  FloatMatrix wk(d, d), wv(d, d);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < dh; ++j) {
        wk.at(i, h * dh + j) = w.wk.dense().at(i, j);
        wv.at(i, h * dh + j) = w.wv.dense().at(i, j);
      }
  mhsa_w.wk = Linear(std::move(wk));
  mhsa_w.wv = Linear(std::move(wv));
  const FloatMatrix mhsa = mhsa_forward(x, mhsa_w, {d, heads, AttentionMode::MHSA});
  CHECK(bits_equal(got, mhsa));
}

TEST_CASE("attention outputs stay within the value hull and respect permutations") {
  std::mt19937 rng(17);
  for (int it = 0; it < 20; ++it) {
    const FloatMatrix q = random_matrix(rng, 5, 3);
    const FloatMatrix k = random_matrix(rng, 6, 3);
    const FloatMatrix v = random_matrix(rng, 6, 4);
    const FloatMatrix y = scaled_dot_attention(q, k, v);
    for (std::size_t j = 0; j < 4; ++j) {
      float lo = v.at(0, j), hi = v.at(0, j);
      for (std::size_t i = 1; i < 6; ++i) {
        lo = std::min(lo, v.at(i, j));
        hi = std::max(hi, v.at(i, j));
      }
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(y.at(i, j) >= lo - 1e-5f);
        CHECK(y.at(i, j) <= hi + 1e-5f);
      }
    }
  }

  const std::size_t d = 8, heads = 2, tokens = 5;
  const FloatMatrix x = random_matrix(rng, tokens, d);
  const AttentionWeights w = random_weights(rng, d, d / heads);
  const AttentionConfig cfg{d, heads, AttentionMode::MQA};
  const FloatMatrix y = mqa_forward(x, w, cfg);
  std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  FloatMatrix xp(tokens, d);
  for (std::size_t i = 0; i < tokens; ++i)
    for (std::size_t j = 0; j < d; ++j) xp.at(i, j) = x.at(perm[i], j);
  const FloatMatrix yp = mqa_forward(xp, w, cfg);
  for (std::size_t i = 0; i < tokens; ++i)
    for (std::size_t j = 0; j < d; ++j)
      CHECK(yp.at(i, j) == doctest::Approx(y.at(perm[i], j)).epsilon(1e-5));
}

TEST_CASE("projection parameter accounting") {
  const AttentionConfig mhsa{512, 8, AttentionMode::MHSA};
  const AttentionConfig mqa{512, 8, AttentionMode::MQA};
  CHECK(attn_kv_param_count(mhsa) == 524288);
  CHECK(attn_kv_param_count(mqa) == 65536);
  CHECK(attn_kv_param_count(mhsa) / attn_kv_param_count(mqa) == 8);
  CHECK(attn_param_count(mhsa) == 4 * 512 * 512);
  CHECK(attn_param_count(mqa) == 2 * 512 * 512 + 2 * 512 * 64);
  CHECK(attn_param_count(mhsa) - attn_param_count(mqa) == 458752);

  const AttentionConfig one_m{128, 1, AttentionMode::MHSA};
  const AttentionConfig one_q{128, 1, AttentionMode::MQA};
  CHECK(attn_param_count(one_m) == attn_param_count(one_q));

  CHECK_THROWS_AS(attn_param_count(AttentionConfig{10, 3, AttentionMode::MHSA}), Error);
}

TEST_CASE("mode and shape validation") {
  std::mt19937 rng(23);
  const FloatMatrix x = random_matrix(rng, 3, 8);
  const AttentionWeights w = random_weights(rng, 8, 8);
  CHECK_THROWS_AS(mhsa_forward(x, w, {8, 2, AttentionMode::MQA}), Error);
  CHECK_THROWS_AS(mqa_forward(x, w, {8, 2, AttentionMode::MQA}), Error);  // kv width is 8, not 4
  CHECK_THROWS_AS(mhsa_forward(random_matrix(rng, 3, 6), w, {8, 2, AttentionMode::MHSA}), Error);
}
