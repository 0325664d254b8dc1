#include <doctest.h>

#include <cmath>
#include <random>

#include "ternavit/distill.hpp"

using namespace ternavit;

TEST_CASE("cross entropy closed forms") {
  for (std::size_t c : {2, 9, 11}) {
    FloatVector uniform(c, 1.25f);
    CHECK(cross_entropy(uniform, c - 1) ==
          doctest::Approx(std::log(static_cast<double>(c))).epsilon(1e-9));
  }

  FloatVector skew(2);
  skew.data = {std::log(3.0f), 0.0f};
  CHECK(cross_entropy(skew, 1) == doctest::Approx(std::log(4.0)).epsilon(1e-6));

  FloatVector confident(2);
  confident.data = {80.0f, -80.0f};
  CHECK(cross_entropy(confident, 0) < 1e-9);

  CHECK_THROWS_AS(cross_entropy(skew, 2), Error);
  CHECK_THROWS_AS(cross_entropy(FloatVector{}, 0), Error);
}

TEST_CASE("KD divergence closed form, identity, and non-negativity") {
  FloatVector teacher(2), student(2, 0.0f);
  teacher.data = {std::log(3.0f), 0.0f};
  const double want = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  CHECK(kd_divergence(student, teacher, 1.0) == doctest::Approx(want).epsilon(1e-5));
  CHECK(want == doctest::Approx(0.1308).epsilon(1e-3));

  std::mt19937 rng(3);
  std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
  for (int it = 0; it < 200; ++it) {
    FloatVector s(5), t(5);
    for (auto& v : s.data) v = dist(rng);
    for (auto& v : t.data) v = dist(rng);
    const double temp = 0.5 + (it % 8) * 0.5;
    CHECK(kd_divergence(s, t, temp) >= 0.0);
    CHECK(kd_divergence(s, s, temp) == 0.0);

    // Shift invariance of softmax: an additive constant changes nothing.
    FloatVector shifted = s;
    for (auto& v : shifted.data) v += 2.5f;
    CHECK(kd_divergence(shifted, s, 1.0) < 1e-10);
    FloatVector bumped = s;
    bumped.data[0] += 1.5f;
    CHECK(kd_divergence(bumped, s, 1.0) > 0.0);
  }

  CHECK_THROWS_AS(kd_divergence(FloatVector(3), FloatVector(4), 1.0), Error);
  CHECK_THROWS_AS(kd_divergence(student, teacher, 0.0), Error);
}

TEST_CASE("feature loss closed forms") {
  FloatMatrix id(2, 2);
  id.at(0, 0) = id.at(1, 1) = 1.0f;

  FloatMatrix s(1, 2), t(1, 2);
  s.data = {1.0f, 2.0f};
  t.data = {2.0f, 4.0f};
  CHECK(feature_loss(s, t, {id}) == doctest::Approx(2.5).epsilon(1e-12));

  CHECK(feature_loss(t, t, {id}) == 0.0);

  const FloatMatrix zeros(3, 2, 0.0f);
  const FloatMatrix ones(3, 2, 1.0f);
  CHECK(feature_loss(zeros, ones, {id}) == doctest::Approx(1.0).epsilon(1e-12));

  FloatMatrix proj(2, 3, 0.5f);
  CHECK_THROWS_AS(feature_loss(s, t, {proj}), Error);
}

TEST_CASE("total loss composition") {
  DistillWeights w;
  CHECK(total_loss(1.0, 2.0, 3.0, w) == 6.0);
  CHECK(total_loss(1.0, 2.0, 3.0, {0, 0, 0, 1.0}) == 0.0);
  CHECK(total_loss(1.5, 2.0, 3.0, {1, 0, 0, 1.0}) == 1.5);

  // The three derived closed forms sum under unit weights.
  const double ce = std::log(4.0);
  const double kd = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  const double feat = 2.5;
  CHECK(total_loss(ce, kd, feat, w) == doctest::Approx(ce + kd + feat).epsilon(1e-12));

  CHECK_THROWS_AS(total_loss(1.0, 1.0, 1.0, {-1.0, 0, 0, 1.0}), Error);
  CHECK_THROWS_AS(total_loss(std::nan(""), 1.0, 1.0, w), Error);
}
