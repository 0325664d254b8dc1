#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "ternavit/quantize.hpp"

using namespace ternavit;

TEST_CASE("absmean worked example and edge cases") {
  FloatMatrix w(1, 3);
  w.data = {0.2f, -0.9f, 0.5f};
  const TernaryWeightMatrix t = absmean_quantize(w, 1e-6f);
  CHECK(t.beta == doctest::Approx(1.6 / 3).epsilon(1e-6));
  CHECK(t.codes == std::vector<std::int8_t>{0, -1, 1});

  FloatMatrix matched(2, 2);
  matched.data = {1.0f, -1.0f, 1.0f, -1.0f};
  const TernaryWeightMatrix tm = absmean_quantize(matched, 1e-6f);
  CHECK(tm.beta == 1.0f);
  CHECK(tm.codes == std::vector<std::int8_t>{1, -1, 1, -1});

  const TernaryWeightMatrix tz = absmean_quantize(FloatMatrix(4, 4, 0.0f), 1e-6f);
  CHECK(tz.beta == 0.0f);
  for (auto c : tz.codes) CHECK(c == 0);

  CHECK_THROWS_AS(absmean_quantize(FloatMatrix{}, 1e-6f), Error);
  CHECK_THROWS_AS(absmean_quantize(matched, 0.0f), Error);
  CHECK_THROWS_AS(absmean_quantize(matched, -1.0f), Error);
}

TEST_CASE("absmax worked example with tie rounding away from zero") {
  FloatMatrix a(1, 3);
  a.data = {-2.0f, 1.0f, 4.0f};
  const QuantizedActivationMatrix q = absmax_quantize(a, 1e-12f);
  CHECK(q.gamma[0] == doctest::Approx(4.0 / 127).epsilon(1e-6));
  CHECK(q.values == std::vector<std::int8_t>{-64, 32, 127});

  FloatMatrix fixed(1, 1);
  fixed.data = {127.0f};
  const QuantizedActivationMatrix qf = absmax_quantize(fixed, 1e-6f);
  CHECK(qf.gamma[0] == 1.0f);
  CHECK(qf.values[0] == 127);

  const QuantizedActivationMatrix qz = absmax_quantize(FloatMatrix(2, 3, 0.0f), 1e-6f);
  for (float g : qz.gamma) CHECK(g == 0.0f);
  for (auto v : qz.values) CHECK(v == 0);

  CHECK_THROWS_AS(absmax_quantize(FloatMatrix{}, 1e-6f), Error);
}

TEST_CASE("quantization ranges hold on random matrices") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> dist(-6.0f, 6.0f);
  for (int it = 0; it < 50; ++it) {
    FloatMatrix w(1 + it % 13, 1 + (it * 7) % 17);
    for (float& v : w.data) v = dist(rng);
    const TernaryWeightMatrix t = absmean_quantize(w);
    for (auto c : t.codes) {
      CHECK(c >= -1);
      CHECK(c <= 1);
    }
    double sum = 0.0;
    for (float v : w.data) sum += std::fabs(v);
    CHECK(t.beta == doctest::Approx(sum / w.size()).epsilon(1e-6));

    const QuantizedActivationMatrix q = absmax_quantize(w);
    for (std::size_t i = 0; i < w.rows; ++i) {
      float amax = 0.0f;
      for (std::size_t j = 0; j < w.cols; ++j) amax = std::max(amax, std::fabs(w.at(i, j)));
      CHECK(q.gamma[i] == doctest::Approx(amax / 127.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("dequantize examples and errors") {
  IntAccumulatorMatrix acc(1, 1);
  acc.values = {10};
  CHECK(dequantize(acc, {0.5f}, 2.0f).data[0] == 10.0f);

  IntAccumulatorMatrix acc2(1, 2);
  acc2.values = {3, -4};
  const FloatMatrix out = dequantize(acc2, {0.25f}, 0.5f);
  CHECK(out.data[0] == 0.375f);
  CHECK(out.data[1] == -0.5f);

  const FloatMatrix zero = dequantize(acc2, {0.25f}, 0.0f);
  CHECK(zero.data[0] == 0.0f);
  CHECK(zero.data[1] == 0.0f);

  CHECK_THROWS_AS(dequantize(acc2, {0.25f, 0.5f}, 1.0f), Error);
}

TEST_CASE("bitlinear equals its defining pipeline bitwise") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  FloatMatrix a(2, 16);
  for (float& v : a.data) v = dist(rng);
  FloatMatrix wf(16, 8);
  for (float& v : wf.data) v = dist(rng);
  const TernaryWeightMatrix w = absmean_quantize(wf);

  const FloatMatrix direct = bitlinear_forward(a, w);
  const QuantizedActivationMatrix q = absmax_quantize(a);
  const FloatMatrix composed = dequantize(int_matmul(q, w), q.gamma, w.beta);
  CHECK(std::memcmp(direct.data.data(), composed.data.data(), direct.data.size() * 4) == 0);

  // One-hot activation row with a +1 column: output is gamma * (codes hit).
  FloatMatrix onehot(1, 4, 0.0f);
  onehot.at(0, 2) = 2.0f;
  TernaryWeightMatrix col(4, 1, 1.0f);
  for (auto& c : col.codes) c = 1;
  const FloatMatrix sel = bitlinear_forward(onehot, col);
  const QuantizedActivationMatrix qs = absmax_quantize(onehot);
  CHECK(sel.at(0, 0) == static_cast<float>(qs.values[2]) * qs.gamma[0] * 1.0f);

  const FloatMatrix nothing = bitlinear_forward(FloatMatrix(3, 4, 0.0f), col);
  for (float v : nothing.data) CHECK(v == 0.0f);

  CHECK_THROWS_AS(bitlinear_forward(FloatMatrix(2, 5, 1.0f), col), Error);
}

TEST_CASE("integer route agrees with the dyadic-scale float route exactly") {
  std::mt19937 rng(31);
  for (int it = 0; it < 30; ++it) {
    const std::size_t m = 1 + it % 4, k = 1 + (it * 3) % 16, n = 1 + (it * 5) % 8;
    QuantizedActivationMatrix a;
    a.rows = m;
    a.cols = k;
    a.values.resize(m * k);
    for (auto& v : a.values) v = static_cast<std::int8_t>(static_cast<int>(rng() % 201) - 100);
    a.gamma.resize(m);
    for (auto& g : a.gamma) g = std::ldexp(1.0f, static_cast<int>(rng() % 5) - 2);
    TernaryWeightMatrix w(k, n, std::ldexp(1.0f, static_cast<int>(rng() % 3) - 1));
    for (auto& c : w.codes) c = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);

    const FloatMatrix int_route = dequantize(int_matmul(a, w), a.gamma, w.beta);
    FloatMatrix da(m, k), dw(k, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j)
        da.at(i, j) = static_cast<float>(a.values[i * k + j]) * a.gamma[i];
    for (std::size_t i = 0; i < dw.size(); ++i)
      dw.data[i] = static_cast<float>(w.codes[i]) * w.beta;
    const FloatMatrix float_route = matmul_f32(da, dw);
    REQUIRE(std::memcmp(int_route.data.data(), float_route.data.data(),
                        int_route.data.size() * 4) == 0);
  }
}

TEST_CASE("scale recovery and power-of-two rescaling invariance") {
  std::mt19937 rng(41);
  for (int it = 0; it < 40; ++it) {
    const std::size_t r = 1 + it % 9, c = 1 + (it * 3) % 11;
    TernaryWeightMatrix codes(r, c);
    bool nonzero = false;
    for (auto& v : codes.codes) {
      v = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
      nonzero = nonzero || v != 0;
    }
    if (!nonzero) codes.codes[0] = -1;
    const float scale = 0.1f + static_cast<float>(rng() % 100) / 13.0f;
    FloatMatrix w(r, c);
    for (std::size_t i = 0; i < w.size(); ++i)
      w.data[i] = scale * static_cast<float>(codes.codes[i]);
    CHECK(absmean_quantize(w, 1e-9f).codes == codes.codes);
  }

  std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
  for (int it = 0; it < 40; ++it) {
    FloatMatrix a(1, 1 + it % 24);
    for (float& v : a.data) v = dist(rng);
    const QuantizedActivationMatrix base = absmax_quantize(a, 1e-12f);
    const float factor = std::ldexp(1.0f, static_cast<int>(rng() % 7) - 3);
    for (float& v : a.data) v *= factor;
    const QuantizedActivationMatrix scaled = absmax_quantize(a, 1e-12f);
    CHECK(scaled.values == base.values);
  }
}
