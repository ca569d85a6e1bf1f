#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcbudget/assign.hpp"
#include "mcbudget/task.hpp"

namespace mcb {

template <class T>
struct Interval {
  T lo;
  T hi;
};

// S1: most distributions right-tailed; S2: most left-tailed; S3: unconstrained.
enum class Scenario { S1 = 1, S2 = 2, S3 = 3 };

inline Scenario parse_scenario(int s) {
  if (s < 1 || s > 3) throw Error("scenario must be 1, 2 or 3");
  return static_cast<Scenario>(s);
}

enum class SkewBucket { Positive, Middle, Negative, Any };

inline std::string_view to_string(SkewBucket b) {
  switch (b) {
    case SkewBucket::Positive: return "positive";
    case SkewBucket::Middle: return "middle";
    case SkewBucket::Negative: return "negative";
    case SkewBucket::Any: return "any";
  }
  return "?";
}

struct GenConfig {
  std::size_t n_tasks = 6;
  Interval<double> u_max_range{1.0, 1.45};  // total WCET utilization of the set
  Interval<Time> period_range{4, 102};  // in time units
  Time ticks_per_unit = 1000;            // execution times are integer ticks
  Interval<double> deadline_fraction_range{0.5, 1.0};
  Interval<double> u_reduction_range{1.0, 45.0};  // percent, drawn per task
  Interval<double> sd_divisor_range{2.0, 40.0};
  Scenario scenario = Scenario::S3;
  std::vector<double> percentiles{80.0, 60.0, 50.0};
  std::uint64_t seed = 0;
  std::size_t samples_per_task = 1000;
  std::size_t hi_tasks = 0;  // the last `hi_tasks` tasks are HI
  TvKind tv_kind = TvKind::Vwcet;
  double major_fraction = 0.8;
  double middle_fraction = 0.1;
  double skew_threshold = 2.0;
  std::size_t max_redraws = 10'000;
};

inline void validate(const GenConfig& cfg) {
  if (cfg.n_tasks < 1) throw Error("n_tasks must be >= 1");
  if (cfg.u_max_range.lo <= 0 || cfg.u_max_range.lo > cfg.u_max_range.hi) throw Error("bad u_max_range");
  if (cfg.period_range.lo < 1 || cfg.period_range.lo > cfg.period_range.hi) throw Error("bad period_range");
  if (cfg.ticks_per_unit < 1) throw Error("ticks_per_unit must be >= 1");
  if (cfg.deadline_fraction_range.lo <= 0 || cfg.deadline_fraction_range.hi > 1 ||
      cfg.deadline_fraction_range.lo > cfg.deadline_fraction_range.hi)
    throw Error("bad deadline_fraction_range");
  if (cfg.u_reduction_range.lo < 0 || cfg.u_reduction_range.hi >= 100 ||
      cfg.u_reduction_range.lo > cfg.u_reduction_range.hi)
    throw Error("bad u_reduction_range");
  if (cfg.sd_divisor_range.lo <= 0 || cfg.sd_divisor_range.lo > cfg.sd_divisor_range.hi)
    throw Error("bad sd_divisor_range");
  if (cfg.percentiles.empty()) throw Error("empty percentile list");
  if (cfg.hi_tasks > cfg.n_tasks) throw Error("more HI tasks than tasks");
  if (cfg.major_fraction < 0 || cfg.middle_fraction < 0 || cfg.major_fraction + cfg.middle_fraction > 1)
    throw Error("bad bucket fractions");
}

struct BucketCounts {
  std::size_t major;
  std::size_t middle;
  std::size_t minor;
};

// Major bucket rounds up, middle rounds down, the rest goes to the minor
// bucket. For n = 6 at 80/10/10 this is 5/0/1.
inline BucketCounts bucket_counts(const GenConfig& cfg) {
  const double n = static_cast<double>(cfg.n_tasks);
  std::size_t major = static_cast<std::size_t>(std::ceil(cfg.major_fraction * n - 1e-9));
  major = std::min(major, cfg.n_tasks);
  std::size_t middle = static_cast<std::size_t>(std::floor(cfg.middle_fraction * n + 1e-9));
  middle = std::min(middle, cfg.n_tasks - major);
  return {major, middle, cfg.n_tasks - major - middle};
}

inline std::vector<SkewBucket> bucket_plan(const GenConfig& cfg) {
  std::vector<SkewBucket> plan;
  const BucketCounts c = bucket_counts(cfg);
  auto push = [&](std::size_t k, SkewBucket b) { plan.insert(plan.end(), k, b); };
  switch (cfg.scenario) {
    case Scenario::S1:
      push(c.major, SkewBucket::Positive);
      push(c.middle, SkewBucket::Middle);
      push(c.minor, SkewBucket::Negative);
      break;
    case Scenario::S2:
      push(c.minor, SkewBucket::Positive);
      push(c.middle, SkewBucket::Middle);
      push(c.major, SkewBucket::Negative);
      break;
    case Scenario::S3:
      push(cfg.n_tasks, SkewBucket::Any);
      break;
  }
  return plan;
}

inline bool in_bucket(const EmpiricalDistribution& dist, SkewBucket bucket, double threshold) {
  if (bucket == SkewBucket::Any) return true;
  if (dist.is_constant()) return false;
  const double s = skewness(dist);
  switch (bucket) {
    case SkewBucket::Positive: return s > threshold;
    case SkewBucket::Negative: return s < -threshold;
    case SkewBucket::Middle: return s >= -threshold && s <= threshold;
    case SkewBucket::Any: return true;
  }
  return false;
}

// UUniFast: n positive utilizations, uniform over the simplex summing to u_total.
template <class URBG>
std::vector<double> generate_utilizations(std::size_t n, double u_total, URBG& rng) {
  if (n < 1 || !(u_total > 0)) throw Error("generate_utilizations needs n >= 1 and u_total > 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  double sum = u_total;
  for (std::size_t i = 1; i < n; ++i) {
    double r = unit(rng);
    while (r == 0.0) r = unit(rng);
    const double next = sum * std::pow(r, 1.0 / static_cast<double>(n - i));
    out.push_back(sum - next);
    sum = next;
  }
  out.push_back(sum);
  return out;
}

inline Time round_half_up(double x) { return static_cast<Time>(std::floor(x + 0.5)); }

// Truncated-normal execution times on [bcet, wcet], rounded to ticks, with
// both endpoints present at least once.
template <class URBG>
std::vector<Time> draw_execution_samples(Time bcet, Time wcet, double mean, double sd, std::size_t count,
                                         URBG& rng) {
  std::vector<Time> samples{bcet, wcet};
  if (bcet == wcet) {
    samples.resize(std::max<std::size_t>(count, 1), wcet);
    return samples;
  }
  std::normal_distribution<double> normal(mean, sd);
  while (samples.size() < count) {
    const double x = normal(rng);
    if (x < static_cast<double>(bcet) || x > static_cast<double>(wcet)) continue;
    samples.push_back(std::clamp(round_half_up(x), bcet, wcet));
  }
  return samples;
}

template <class URBG>
TaskSet generate_taskset(const GenConfig& cfg, URBG& rng) {
  validate(cfg);
  const std::size_t n = cfg.n_tasks;
  const std::vector<SkewBucket> plan = bucket_plan(cfg);

  std::uniform_real_distribution<double> u_total_dist(cfg.u_max_range.lo, cfg.u_max_range.hi);
  const double u_total = u_total_dist(rng);
  const std::vector<double> u_max = generate_utilizations(n, u_total, rng);

  TaskSet ts;
  ts.tv_kind = cfg.tv_kind;
  std::uniform_int_distribution<Time> period_dist(cfg.period_range.lo, cfg.period_range.hi);
  std::uniform_real_distribution<double> reduction_dist(cfg.u_reduction_range.lo, cfg.u_reduction_range.hi);
  std::uniform_real_distribution<double> divisor_dist(cfg.sd_divisor_range.lo, cfg.sd_divisor_range.hi);
  for (std::size_t i = 0; i < n; ++i) {
    // A redraw keeps the task's utilization and redraws everything else, so
    // a task whose WCET and BCET round together can still reach its bucket.
    std::optional<EmpiricalDistribution> dist;
    Time period = 0, deadline = 0;
    for (std::size_t attempt = 0; attempt < cfg.max_redraws && !dist; ++attempt) {
      period = period_dist(rng) * cfg.ticks_per_unit;
      const double tp = static_cast<double>(period);
      Time d_lo = static_cast<Time>(std::ceil(tp * cfg.deadline_fraction_range.lo - 1e-9));
      Time d_hi = static_cast<Time>(std::floor(tp * cfg.deadline_fraction_range.hi + 1e-9));
      d_lo = std::clamp<Time>(d_lo, 1, period);
      d_hi = std::clamp<Time>(d_hi, d_lo, period);
      deadline = std::uniform_int_distribution<Time>(d_lo, d_hi)(rng);

      const double u_min = u_max[i] * (1.0 - reduction_dist(rng) / 100.0);
      const Time wcet = std::max<Time>(1, round_half_up(u_max[i] * tp));
      const Time bcet = std::min(wcet, std::max<Time>(1, round_half_up(u_min * tp)));

      std::uniform_real_distribution<double> mean_dist(static_cast<double>(bcet), static_cast<double>(wcet));
      const double mean = mean_dist(rng);
      const double sd = static_cast<double>(wcet - bcet) / divisor_dist(rng);
      auto candidate = EmpiricalDistribution::from_samples(
          draw_execution_samples(bcet, wcet, mean, sd, cfg.samples_per_task, rng));
      if (in_bucket(candidate, plan[i], cfg.skew_threshold)) dist = std::move(candidate);
    }
    if (!dist) throw Error("scenario bucket unreachable");

    const Criticality crit = i + cfg.hi_tasks >= n ? Criticality::Hi : Criticality::Lo;
    ts.tasks.push_back(make_task(static_cast<int>(i), std::move(*dist), cfg.percentiles, crit, deadline, period,
                                 cfg.tv_kind));
  }
  return ts;
}

// Task set for trial `trial` from its own stream under cfg.seed.
inline TaskSet generate_trial(const GenConfig& cfg, std::uint64_t trial) {
  Rng rng = make_rng(cfg.seed, trial);
  return generate_taskset(cfg, rng);
}

struct DiscardVerdict {
  bool keep = true;
  std::string reason;  // "bcet-utilization" or "no-solution" when discarded
};

inline long double bcet_utilization(const TaskSet& ts) {
  long double u = 0;
  for (const auto& t : ts.tasks) u += static_cast<long double>(t.dist.min()) / t.period;
  return u;
}

inline DiscardVerdict discard_check(const TaskSet& ts, std::span<const AssignmentResult> results) {
  ConcreteTaskSet best_case;
  for (const auto& t : ts.tasks) best_case.push_back({t.dist.min(), t.criticality, t.deadline, t.period});
  if (detail::utilization_vs_one(best_case) > 0) return {false, "bcet-utilization"};
  for (const auto& r : results)
    if (r.assigned()) return {true, {}};
  return {false, "no-solution"};
}

}  // namespace mcb
