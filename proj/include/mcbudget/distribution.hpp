#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mcbudget/common.hpp"

namespace mcb {

// Empirical execution-time distribution: observed values with occurrence
// counts. Probability of a value is count / total.
class EmpiricalDistribution {
 public:
  struct Point {
    Time value;
    std::uint64_t count;
    friend bool operator==(const Point&, const Point&) = default;
  };

  // Builds from (value, count) pairs in any order; repeated values merge.
  static EmpiricalDistribution from_counts(std::span<const Point> pairs) {
    std::map<Time, std::uint64_t> merged;
    for (const auto& p : pairs) {
      if (p.value < 0) throw Error("negative execution time");
      if (p.count == 0) throw Error("zero occurrence count");
      merged[p.value] += p.count;
    }
    return EmpiricalDistribution(merged);
  }

  static EmpiricalDistribution from_samples(std::span<const Time> samples) {
    std::map<Time, std::uint64_t> merged;
    for (Time s : samples) {
      if (s < 0) throw Error("negative execution time");
      ++merged[s];
    }
    return EmpiricalDistribution(merged);
  }

  const std::vector<Point>& points() const noexcept { return points_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t support_size() const noexcept { return points_.size(); }
  Time min() const noexcept { return points_.front().value; }
  Time max() const noexcept { return points_.back().value; }
  bool is_constant() const noexcept { return points_.size() == 1; }

  double probability(std::size_t index) const {
    return static_cast<double>(points_.at(index).count) / static_cast<double>(total_);
  }

  // Number of occurrences with value <= b.
  std::uint64_t count_at_most(Time b) const noexcept {
    std::uint64_t acc = 0;
    for (const auto& p : points_) {
      if (p.value > b) break;
      acc += p.count;
    }
    return acc;
  }

  bool contains(Time v) const noexcept {
    return std::binary_search(points_.begin(), points_.end(), Point{v, 0},
                              [](const Point& a, const Point& b) { return a.value < b.value; });
  }

  // Maps a uniform draw in [0, total) onto the support.
  Time value_at_rank(std::uint64_t rank) const {
    std::uint64_t acc = 0;
    for (const auto& p : points_) {
      acc += p.count;
      if (rank < acc) return p.value;
    }
    throw Error("rank out of range");
  }

  template <class URBG>
  Time draw(URBG& rng) const {
    std::uniform_int_distribution<std::uint64_t> pick(0, total_ - 1);
    return value_at_rank(pick(rng));
  }

  friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;

 private:
  explicit EmpiricalDistribution(const std::map<Time, std::uint64_t>& merged) {
    if (merged.empty()) throw Error("empty sample set");
    points_.reserve(merged.size());
    for (const auto& [v, c] : merged) {
      points_.push_back({v, c});
      total_ += c;
    }
    if (points_.back().value == 0) throw Error("degenerate distribution");
  }

  std::vector<Point> points_;
  std::uint64_t total_ = 0;
};

inline EmpiricalDistribution from_samples(std::span<const Time> samples) {
  return EmpiricalDistribution::from_samples(samples);
}

// P(C <= b).
inline double meet_prob(const EmpiricalDistribution& dist, Time b) {
  return static_cast<double>(dist.count_at_most(b)) / static_cast<double>(dist.total());
}

// Coefficient of variation to the maximum, as a ratio:
//   sqrt(sum_i p_i (x_i - M)^2) / M,  M = max value.
// Multiply by 100 for the percent form.
inline double vwcet(const EmpiricalDistribution& dist) {
  const long double m = static_cast<long double>(dist.max());
  long double acc = 0;
  for (const auto& p : dist.points()) {
    const long double d = static_cast<long double>(p.value) - m;
    acc += static_cast<long double>(p.count) * d * d;
  }
  acc /= static_cast<long double>(dist.total());
  return static_cast<double>(std::sqrt(acc) / m);
}

struct Moments {
  double mean;
  double m2;
  double m3;
};

inline Moments central_moments(const EmpiricalDistribution& dist) {
  const long double total = static_cast<long double>(dist.total());
  long double mean = 0;
  for (const auto& p : dist.points()) mean += static_cast<long double>(p.count) * p.value;
  mean /= total;
  long double m2 = 0, m3 = 0;
  for (const auto& p : dist.points()) {
    const long double d = p.value - mean;
    const long double w = static_cast<long double>(p.count) / total;
    m2 += w * d * d;
    m3 += w * d * d * d;
  }
  return {static_cast<double>(mean), static_cast<double>(m2), static_cast<double>(m3)};
}

// Population third standardized moment m3 / m2^(3/2), no bias correction.
inline double skewness(const EmpiricalDistribution& dist) {
  if (dist.is_constant()) throw Error("undefined skewness");
  const Moments m = central_moments(dist);
  return m.m3 / std::pow(m.m2, 1.5);
}

// Smallest support value v with P(C <= v) >= q/100, q in (0, 100].
inline Time percentile(const EmpiricalDistribution& dist, double q) {
  if (!(q > 0.0 && q <= 100.0)) throw Error("percentile out of range (0, 100]");
  const long double need = static_cast<long double>(q) * static_cast<long double>(dist.total());
  std::uint64_t acc = 0;
  for (const auto& p : dist.points()) {
    acc += p.count;
    if (static_cast<long double>(acc) * 100.0L >= need) return p.value;
  }
  return dist.max();
}

inline Time median(const EmpiricalDistribution& dist) { return percentile(dist, 50.0); }

}  // namespace mcb
