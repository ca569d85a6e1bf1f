#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "mcbudget/task.hpp"

namespace mcb {

enum class Priority { RateMonotonic, DeadlineMonotonic };

enum class SchedPolicy { Rm, Dm, Edf };

inline std::string_view to_string(SchedPolicy p) {
  switch (p) {
    case SchedPolicy::Rm: return "rm";
    case SchedPolicy::Dm: return "dm";
    case SchedPolicy::Edf: return "edf";
  }
  return "?";
}

inline SchedPolicy parse_sched_policy(std::string_view s) {
  if (s == "rm") return SchedPolicy::Rm;
  if (s == "dm") return SchedPolicy::Dm;
  if (s == "edf") return SchedPolicy::Edf;
  throw Error("unknown scheduling policy: " + std::string(s));
}

struct SchedVerdict {
  bool schedulable = false;
  // Fixed priority only, indexed by task. An entry above D_i is the first
  // iterate that crossed the deadline, not a fixed point.
  std::vector<Time> response_times;
};

// Task indices from highest to lowest priority. Ties break by lower index.
template <class Tasks>
std::vector<std::size_t> priority_order(const Tasks& tasks, Priority prio) {
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t i) {
    return prio == Priority::RateMonotonic ? tasks[i].period : tasks[i].deadline;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

inline Time ceil_div(Time a, Time b) { return (a + b - 1) / b; }

// Response-time analysis for preemptive fixed-priority scheduling with
// constrained deadlines. Iteration stops as soon as R exceeds D_i.
inline SchedVerdict rta_fixed_priority(const ConcreteTaskSet& cts, Priority prio) {
  SchedVerdict v;
  v.schedulable = true;
  v.response_times.assign(cts.size(), 0);
  const auto order = priority_order(cts, prio);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const ConcreteTask& ti = cts[order[rank]];
    Time r = ti.budget;
    while (r <= ti.deadline) {
      Time next = ti.budget;
      for (std::size_t h = 0; h < rank; ++h) {
        const ConcreteTask& tj = cts[order[h]];
        next += ceil_div(r, tj.period) * tj.budget;
      }
      if (next == r) break;
      r = next;
    }
    v.response_times[order[rank]] = r;
    if (r > ti.deadline) v.schedulable = false;
  }
  return v;
}

namespace detail {

using i128 = __int128;

inline i128 gcd128(i128 a, i128 b) {
  while (b != 0) {
    const i128 r = a % b;
    a = b;
    b = r;
  }
  return a < 0 ? -a : a;
}

// Sign of (sum_i C_i / T_i) - 1, exact while the reduced fraction fits in
// 100 bits, long double otherwise.
inline int utilization_vs_one(const ConcreteTaskSet& cts) {
  constexpr i128 kLimit = i128{1} << 100;
  i128 num = 0, den = 1;
  for (const auto& t : cts) {
    num = num * t.period + i128{t.budget} * den;
    den = den * t.period;
    const i128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (den > kLimit || num > kLimit) {
      long double u = 0;
      for (const auto& x : cts) u += static_cast<long double>(x.budget) / x.period;
      return u > 1.0L ? 1 : (u < 1.0L ? -1 : 0);
    }
  }
  return num > den ? 1 : (num < den ? -1 : 0);
}

inline Time saturating_lcm(Time a, Time b) {
  const Time g = std::gcd(a, b);
  const Time k = a / g;
  if (k > std::numeric_limits<Time>::max() / b) return std::numeric_limits<Time>::max();
  return k * b;
}

}  // namespace detail

inline Time hyperperiod(const ConcreteTaskSet& cts) {
  Time h = 1;
  for (const auto& t : cts) h = detail::saturating_lcm(h, t.period);
  return h;
}

// Processor demand in [0, t] under synchronous release.
inline Time demand_bound(const ConcreteTaskSet& cts, Time t) {
  Time h = 0;
  for (const auto& x : cts)
    if (t >= x.deadline) h += ((t - x.deadline) / x.period + 1) * x.budget;
  return h;
}

// Upper limit of the deadline points that need checking.
inline Time demand_check_horizon(const ConcreteTaskSet& cts) {
  const Time hp = hyperperiod(cts);
  if (detail::utilization_vs_one(cts) == 0) return hp;
  long double u = 0, slack = 0;
  Time max_d = 0;
  for (const auto& t : cts) {
    const long double ui = static_cast<long double>(t.budget) / t.period;
    u += ui;
    slack += (t.period - t.deadline) * ui;
    max_d = std::max(max_d, t.deadline);
  }
  long double bound = std::ceil(slack / (1.0L - u));
  if (!(bound < static_cast<long double>(hp))) return hp;
  return std::min(hp, std::max(max_d, static_cast<Time>(bound)));
}

// EDF processor-demand test. The deadline points up to the horizon are
// visited with Quick Processor-demand Analysis, which skips points that
// cannot be the first violation.
inline SchedVerdict edf_demand_test(const ConcreteTaskSet& cts) {
  SchedVerdict v;
  if (cts.empty()) {
    v.schedulable = true;
    return v;
  }
  if (detail::utilization_vs_one(cts) > 0) return v;
  const Time horizon = demand_check_horizon(cts);
  Time d_min = std::numeric_limits<Time>::max();
  for (const auto& t : cts) d_min = std::min(d_min, t.deadline);

  // Largest absolute deadline strictly below `bound`, or nullopt.
  auto last_deadline_before = [&](Time bound) -> std::optional<Time> {
    std::optional<Time> best;
    for (const auto& t : cts) {
      if (bound <= t.deadline) continue;
      const Time k = (bound - 1 - t.deadline) / t.period;
      const Time d = k * t.period + t.deadline;
      if (!best || d > *best) best = d;
    }
    return best;
  };

  auto t = last_deadline_before(horizon == std::numeric_limits<Time>::max() ? horizon : horizon + 1);
  if (!t) {
    v.schedulable = true;
    return v;
  }
  Time h = demand_bound(cts, *t);
  while (h <= *t && h > d_min) {
    if (h < *t) {
      t = h;
    } else {
      t = last_deadline_before(*t);
      if (!t) break;
    }
    h = demand_bound(cts, *t);
  }
  v.schedulable = !t || h <= d_min;
  return v;
}

inline SchedVerdict analyze(const ConcreteTaskSet& cts, SchedPolicy policy) {
  switch (policy) {
    case SchedPolicy::Rm: return rta_fixed_priority(cts, Priority::RateMonotonic);
    case SchedPolicy::Dm: return rta_fixed_priority(cts, Priority::DeadlineMonotonic);
    case SchedPolicy::Edf: return edf_demand_test(cts);
  }
  throw Error("unknown scheduling policy");
}

template <class T>
concept SchedulabilityTest = requires(T& test, const ConcreteTaskSet& cts) {
  { test(cts) } -> std::convertible_to<bool>;
};

// Stateless test selected by policy.
struct PolicyTest {
  SchedPolicy policy = SchedPolicy::Rm;
  bool operator()(const ConcreteTaskSet& cts) const { return analyze(cts, policy).schedulable; }
};

// Counts how many verdicts a search asked for.
template <SchedulabilityTest Test>
class CountingTest {
 public:
  explicit CountingTest(Test test) : test_(std::move(test)) {}

  bool operator()(const ConcreteTaskSet& cts) {
    ++calls_;
    return static_cast<bool>(test_(cts));
  }

  std::size_t calls() const noexcept { return calls_; }

 private:
  Test test_;
  std::size_t calls_ = 0;
};

// Exact probability that the first job of `target` finishes after its
// deadline, released synchronously with all higher-priority tasks, by
// enumerating every joint execution-time outcome of the jobs released
// before that deadline.
inline double prob_deadline_miss_bruteforce(const TaskSet& ts, std::size_t target, Priority prio,
                                            std::uint64_t max_outcomes = 10'000'000) {
  if (target >= ts.size()) throw Error("target task out of range");
  const auto order = priority_order(ts.tasks, prio);
  const Time horizon = ts.tasks[target].deadline;

  struct Job {
    std::size_t rank;
    Time release;
    const EmpiricalDistribution* dist;
  };
  std::vector<Job> jobs;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Task& t = ts.tasks[order[rank]];
    if (order[rank] == target) {
      jobs.push_back({rank, 0, &t.dist});
      break;
    }
    for (Time r = 0; r < horizon; r += t.period) jobs.push_back({rank, r, &t.dist});
  }
  // Jobs are already in priority order: by task rank, then release.
  const std::size_t target_job = jobs.size() - 1;

  long double outcomes = 1;
  for (const auto& j : jobs) outcomes *= static_cast<long double>(j.dist->support_size());
  if (outcomes > static_cast<long double>(max_outcomes)) throw Error("instance too large for brute force");

  std::vector<std::size_t> pick(jobs.size(), 0);
  std::vector<Time> remaining(jobs.size());
  long double miss = 0;
  for (;;) {
    long double p = 1;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      p *= jobs[k].dist->probability(pick[k]);
      remaining[k] = jobs[k].dist->points()[pick[k]].value;
    }

    Time now = 0;
    std::optional<Time> finish;
    if (remaining[target_job] == 0) finish = 0;
    while (!finish) {
      std::optional<std::size_t> run;
      Time next_release = std::numeric_limits<Time>::max();
      for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (jobs[k].release > now) {
          next_release = std::min(next_release, jobs[k].release);
        } else if (remaining[k] > 0 && !run) {
          run = k;
        }
      }
      if (!run) {
        now = next_release;
        continue;
      }
      const Time slice = std::min(remaining[*run], next_release - now);
      now += slice;
      remaining[*run] -= slice;
      if (*run == target_job && remaining[*run] == 0) finish = now;
    }
    if (*finish > horizon) miss += p;

    std::size_t k = 0;
    while (k < jobs.size() && ++pick[k] == jobs[k].dist->support_size()) pick[k++] = 0;
    if (k == jobs.size()) break;
  }
  return static_cast<double>(miss);
}

}  // namespace mcb
