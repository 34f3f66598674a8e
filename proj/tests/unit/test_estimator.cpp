#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "opmi/estimator.hpp"
#include "opmi/theory.hpp"

using namespace opmi;

namespace {

std::vector<double> normals(std::uint64_t seed, double sd, int count) {
  auto s = derive_stream(seed, {0});
  std::vector<double> v(count);
  for (auto& x : v) x = sd * s.normal();
  return v;
}

}  // namespace

TEST(Histogram, HandCountedExample) {
  // Range [0, 1] in two bins [0, 0.5) and [0.5, 1].
  const std::vector<double> s0 = {0.0, 0.2, 0.7, 1.0};
  const std::vector<double> s1 = {0.1, 0.6, 0.9, 1.0};
  const auto pair = build_histogram_pair(s0, s1, 2);
  EXPECT_DOUBLE_EQ(pair.h0.lo, 0.0);
  EXPECT_DOUBLE_EQ(pair.h0.hi, 1.0);
  EXPECT_EQ(pair.h0.pmf, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(pair.h1.pmf, (std::vector<double>{0.25, 0.75}));
  EXPECT_DOUBLE_EQ(histogram_advantage(pair), 0.25);
}

TEST(Histogram, IdenticalSamplesGiveZero) {
  const auto v = normals(1, 1.0, 5000);
  EXPECT_EQ(histogram_advantage(build_histogram_pair(v, v, 150)), 0.0);
  const std::vector<double> constant(100, 3.0);
  EXPECT_EQ(histogram_advantage(build_histogram_pair(constant, constant, 10)), 0.0);
}

TEST(Histogram, DisjointSupportsGiveOne) {
  std::vector<double> lo(1000), hi(1000);
  for (int i = 0; i < 1000; ++i) {
    lo[i] = -2.0 + 0.001 * i;
    hi[i] = 1.0 + 0.001 * i;
  }
  EXPECT_DOUBLE_EQ(histogram_advantage(build_histogram_pair(lo, hi, 150)), 1.0);
  EXPECT_DOUBLE_EQ(histogram_advantage(build_histogram_pair(hi, lo, 150)), 1.0);
}

TEST(Histogram, SwapAndPermutationInvariance) {
  auto a = normals(2, 1.0, 20000);
  auto b = normals(3, 1.7, 20000);
  const double adv = histogram_advantage(build_histogram_pair(a, b, 150));
  EXPECT_NEAR(histogram_advantage(build_histogram_pair(b, a, 150)), adv, 1e-12);
  std::reverse(a.begin(), a.end());
  std::rotate(b.begin(), b.begin() + 777, b.end());
  EXPECT_NEAR(histogram_advantage(build_histogram_pair(a, b, 150)), adv, 1e-12);
}

TEST(Histogram, MatchesClosedFormAtLargeSampleSize) {
  const auto a = normals(4, 1.0, 100000);
  const auto b = normals(5, 2.0, 100000);
  EXPECT_NEAR(histogram_advantage(build_histogram_pair(a, b, 150)), advantage_point(1.0, 4.0), 0.02);
}

TEST(Histogram, RuleAdvantageEqualsTotalVariation) {
  const auto a = normals(6, 1.0, 30000);
  const auto b = normals(7, 1.5, 30000);
  const auto pair = build_histogram_pair(a, b, 100);
  EXPECT_NEAR(histogram_rule_advantage(pair, a, b), histogram_advantage(pair), 1e-12);
}

TEST(Histogram, RejectsBadInput) {
  const std::vector<double> ok = {1.0, 2.0};
  const std::vector<double> empty;
  const std::vector<double> bad = {1.0, std::nan("")};
  EXPECT_THROW(build_histogram_pair(empty, ok, 10), std::invalid_argument);
  EXPECT_THROW(build_histogram_pair(ok, ok, 1), std::invalid_argument);
  EXPECT_THROW(build_histogram_pair(ok, bad, 10), std::invalid_argument);
}

TEST(Threshold, MonteCarloMatchesClosedForm) {
  for (auto [v0, v1] : {std::pair{1.0, 4.0}, std::pair{3.0, 1.2}}) {
    auto s = derive_stream(8, {0});
    const int count = 200000;
    int tp = 0, fp = 0;
    for (int i = 0; i < count; ++i) {
      tp += threshold_adversary(v0, v1, std::sqrt(v1) * s.normal());
      fp += threshold_adversary(v0, v1, std::sqrt(v0) * s.normal());
    }
    EXPECT_NEAR(static_cast<double>(tp - fp) / count, advantage_from_threshold(v0, v1), 0.01);
    EXPECT_DOUBLE_EQ(advantage_from_threshold(v0, v1), advantage_point(v0, v1));
  }
  EXPECT_THROW(threshold_adversary(1.0, 1.0, 0.5), std::domain_error);
}
