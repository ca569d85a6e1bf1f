#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "mcbudget/distribution.hpp"
#include "support.hpp"

using namespace mcb;
using mcb::testing::dist_of;

namespace {

std::vector<Time> repeat(std::initializer_list<std::pair<Time, int>> runs) {
  std::vector<Time> out;
  for (auto [v, k] : runs) out.insert(out.end(), static_cast<std::size_t>(k), v);
  return out;
}

// Skewness straight from the expanded sample list, no shared code path.
double skewness_of_samples(const std::vector<Time>& xs) {
  double mean = 0;
  for (Time x : xs) mean += static_cast<double>(x);
  mean /= static_cast<double>(xs.size());
  double m2 = 0, m3 = 0;
  for (Time x : xs) {
    const double d = static_cast<double>(x) - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(xs.size());
  m3 /= static_cast<double>(xs.size());
  return m3 / std::pow(m2, 1.5);
}

EmpiricalDistribution random_dist(std::mt19937_64& rng) {
  std::uniform_int_distribution<Time> v(1, 50);
  std::uniform_int_distribution<std::uint64_t> c(1, 30);
  std::uniform_int_distribution<int> k(1, 8);
  std::vector<EmpiricalDistribution::Point> pts;
  const int n = k(rng);
  for (int i = 0; i < n; ++i) pts.push_back({v(rng), c(rng)});
  return EmpiricalDistribution::from_counts(pts);
}

}  // namespace

TEST(FromSamples, CollapsesToCounts) {
  const auto d = from_samples(repeat({{1, 10}, {2, 20}, {3, 70}}));
  ASSERT_EQ(d.support_size(), 3u);
  EXPECT_EQ(d.total(), 100u);
  EXPECT_DOUBLE_EQ(d.probability(0), 0.1);
  EXPECT_DOUBLE_EQ(d.probability(1), 0.2);
  EXPECT_DOUBLE_EQ(d.probability(2), 0.7);
}

TEST(FromSamples, SingleAndConstant) {
  const std::vector<Time> one{5};
  const auto a = from_samples(one);
  EXPECT_EQ(a.total(), 1u);
  EXPECT_EQ(a.max(), 5);
  EXPECT_TRUE(a.is_constant());

  const std::vector<Time> four{2, 2, 2, 2};
  const auto b = from_samples(four);
  EXPECT_EQ(b.total(), 4u);
  EXPECT_EQ(b.support_size(), 1u);
  EXPECT_DOUBLE_EQ(meet_prob(b, 2), 1.0);
}

TEST(FromSamples, RejectsEmptyAndDegenerate) {
  const std::vector<Time> none;
  EXPECT_THROW(
      {
        try {
          from_samples(none);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "empty sample set");
          throw;
        }
      },
      Error);
  const std::vector<Time> zeros{0, 0, 0};
  EXPECT_THROW(
      {
        try {
          from_samples(zeros);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "degenerate distribution");
          throw;
        }
      },
      Error);
  const std::vector<Time> negative{3, -1};
  EXPECT_THROW(from_samples(negative), Error);
}

TEST(FromCounts, MergesUnsortedDuplicates) {
  const auto d = dist_of({{3, 5}, {1, 2}, {3, 1}});
  ASSERT_EQ(d.support_size(), 2u);
  EXPECT_EQ(d.points()[0], (EmpiricalDistribution::Point{1, 2}));
  EXPECT_EQ(d.points()[1], (EmpiricalDistribution::Point{3, 6}));
  EXPECT_THROW(dist_of({{1, 0}}), Error);
}

TEST(Vwcet, WorkedExampleValues) {
  EXPECT_NEAR(vwcet(dist_of({{1, 10}, {2, 20}, {3, 70}})), 0.2582, 1e-4);
  EXPECT_NEAR(vwcet(dist_of({{1, 40}, {2, 50}, {3, 10}})), 0.4830, 1e-4);
  EXPECT_DOUBLE_EQ(vwcet(dist_of({{5, 1}})), 0.0);
}

TEST(Skewness, SymmetricIsZero) {
  EXPECT_NEAR(skewness(dist_of({{1, 25}, {2, 50}, {3, 25}})), 0.0, 1e-12);
}

TEST(Skewness, MassNearMaximumIsNegative) {
  // Frozen from the expanded-sample moment formula: -1.3979162339514475.
  const auto d = dist_of({{1, 10}, {2, 20}, {3, 70}});
  EXPECT_NEAR(skewness(d), -1.3979162339514475, 1e-9);
  EXPECT_NEAR(skewness(d), skewness_of_samples(repeat({{1, 10}, {2, 20}, {3, 70}})), 1e-9);
}

TEST(Skewness, MirrorImageFlipsSign) {
  EXPECT_NEAR(skewness(dist_of({{1, 70}, {2, 20}, {3, 10}})), 1.3979162339514475, 1e-9);
}

TEST(Skewness, UndefinedForConstant) {
  EXPECT_THROW(
      {
        try {
          skewness(dist_of({{4, 9}}));
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "undefined skewness");
          throw;
        }
      },
      Error);
}

TEST(Percentile, CumulativeWalk) {
  const auto t1 = dist_of({{1, 10}, {2, 20}, {3, 70}});
  const auto t2 = dist_of({{1, 40}, {2, 50}, {3, 10}});
  EXPECT_EQ(percentile(t2, 50), 2);
  EXPECT_EQ(percentile(t1, 60), 3);
  EXPECT_EQ(percentile(t1, 100), 3);
  EXPECT_EQ(percentile(t2, 40), 1);  // boundary: cumulative exactly 0.4
  EXPECT_EQ(median(t2), 2);
}

TEST(Percentile, OutOfRange) {
  const auto d = dist_of({{1, 1}, {2, 1}});
  EXPECT_THROW(percentile(d, 0), Error);
  EXPECT_THROW(percentile(d, -5), Error);
  EXPECT_THROW(percentile(d, 100.5), Error);
}

TEST(MeetProb, Values) {
  const auto t1 = dist_of({{1, 10}, {2, 20}, {3, 70}});
  const auto t2 = dist_of({{1, 40}, {2, 50}, {3, 10}});
  EXPECT_DOUBLE_EQ(meet_prob(t2, 1), 0.4);
  EXPECT_DOUBLE_EQ(meet_prob(t1, 3), 1.0);
  EXPECT_DOUBLE_EQ(meet_prob(t1, 0), 0.0);
  EXPECT_DOUBLE_EQ(meet_prob(t1, 99), 1.0);
}

TEST(DistributionProperties, RandomInstances) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 300; ++iter) {
    const auto d = random_dist(rng);
    const double v = vwcet(d);
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_EQ(v == 0.0, d.is_constant());

    // Scale invariance.
    std::vector<EmpiricalDistribution::Point> scaled;
    for (const auto& p : d.points()) scaled.push_back({p.value * 7, p.count});
    EXPECT_NEAR(vwcet(EmpiricalDistribution::from_counts(scaled)), v, 1e-12);

    // meet_prob monotone in b, 1 at the max.
    double prev = 0.0;
    for (Time b = 0; b <= d.max() + 1; ++b) {
      const double p = meet_prob(d, b);
      EXPECT_GE(p, prev);
      prev = p;
    }
    EXPECT_DOUBLE_EQ(meet_prob(d, d.max()), 1.0);

    // percentile monotone in q and always in the support.
    Time last = 0;
    for (double q = 1; q <= 100; q += 1.5) {
      const Time x = percentile(d, q);
      EXPECT_TRUE(d.contains(x));
      EXPECT_GE(x, last);
      last = x;
    }
    EXPECT_EQ(percentile(d, 100), d.max());

    if (!d.is_constant()) {
      // Reflection about the mean flips skewness.
      std::vector<EmpiricalDistribution::Point> mirrored;
      for (const auto& p : d.points()) mirrored.push_back({d.max() + d.min() - p.value, p.count});
      EXPECT_NEAR(skewness(EmpiricalDistribution::from_counts(mirrored)), -skewness(d), 1e-9);

      // More mass at the maximum strictly lowers vwcet.
      std::vector<EmpiricalDistribution::Point> heavier(d.points().begin(), d.points().end());
      heavier.back().count += 5;
      EXPECT_LT(vwcet(EmpiricalDistribution::from_counts(heavier)), v);
    }
  }
}

TEST(Draw, FollowsCounts) {
  const auto d = dist_of({{1, 40}, {2, 50}, {3, 10}});
  Rng rng(11);
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ones += d.draw(rng) == 1;
  EXPECT_NEAR(ones / static_cast<double>(n), 0.4, 3 * std::sqrt(0.24 / n));
}
