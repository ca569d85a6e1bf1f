#pragma once

// Test-only fixtures and oracles. The oracles are written independently of
// the library's algorithms: tick-by-tick stepping instead of event jumps,
// exhaustive deadline enumeration instead of QPA, recursion instead of the
// odometer search.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "mcbudget/mcbudget.hpp"

namespace mcb::testing {

inline EmpiricalDistribution dist_of(std::initializer_list<std::pair<Time, std::uint64_t>> pairs) {
  std::vector<EmpiricalDistribution::Point> pts;
  for (auto [v, c] : pairs) pts.push_back({v, c});
  return EmpiricalDistribution::from_counts(pts);
}

// The three-task example: two LO tasks and one HI task, RM, D = T.
inline TaskSet worked_example(TvKind kind = TvKind::Vwcet) {
  TaskSet ts;
  ts.tv_kind = kind;
  ts.tasks.push_back(make_task(0, dist_of({{1, 10}, {2, 20}, {3, 70}}), {30, 10}, Criticality::Lo, 6, 6, kind));
  ts.tasks.push_back(make_task(1, dist_of({{1, 40}, {2, 50}, {3, 10}}), {90, 40}, Criticality::Lo, 9, 9, kind));
  ts.tasks.push_back(make_task(2, dist_of({{1, 10}, {2, 10}, {3, 80}}), {20, 10}, Criticality::Hi, 12, 12, kind));
  return ts;
}

inline ConcreteTaskSet concrete(std::initializer_list<std::array<Time, 3>> cdt) {
  ConcreteTaskSet out;
  for (const auto& x : cdt) out.push_back({x[0], Criticality::Lo, x[1], x[2]});
  return out;
}

struct TickResult {
  bool miss = false;
  std::vector<Time> first_response;  // -1 if job 0 unfinished
  std::vector<Time> worst_response;
};

// Steps one tick at a time from synchronous release; every job runs for
// exactly its budget. `edf` selects earliest absolute deadline, otherwise
// the fixed priority given by `rank` (lower is higher).
inline TickResult tick_simulate(const ConcreteTaskSet& cts, Time horizon, bool edf, const std::vector<int>& rank) {
  struct J {
    std::size_t task;
    Time release, deadline, left;
    bool first;
  };
  TickResult r;
  r.first_response.assign(cts.size(), -1);
  r.worst_response.assign(cts.size(), 0);
  std::vector<J> active;
  for (Time t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < cts.size(); ++i)
      if (t % cts[i].period == 0) active.push_back({i, t, t + cts[i].deadline, cts[i].budget, t == 0});
    for (const auto& j : active)
      if (j.deadline <= t && j.left > 0) r.miss = true;
    int best = -1;
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (best < 0) {
        best = static_cast<int>(k);
        continue;
      }
      const J& a = active[k];
      const J& b = active[static_cast<std::size_t>(best)];
      const bool better = edf ? std::tie(a.deadline, a.release, a.task) < std::tie(b.deadline, b.release, b.task)
                              : std::tie(rank[a.task], a.release) < std::tie(rank[b.task], b.release);
      if (better) best = static_cast<int>(k);
    }
    if (best < 0) continue;
    J& j = active[static_cast<std::size_t>(best)];
    if (--j.left == 0) {
      const Time resp = t + 1 - j.release;
      if (t + 1 > j.deadline) r.miss = true;
      if (j.first) r.first_response[j.task] = resp;
      r.worst_response[j.task] = std::max(r.worst_response[j.task], resp);
      active.erase(active.begin() + best);
    }
  }
  for (const auto& j : active)
    if (j.deadline <= horizon) r.miss = true;
  return r;
}

inline std::vector<int> rm_rank(const ConcreteTaskSet& cts) {
  std::vector<int> idx(cts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return cts[a].period < cts[b].period; });
  std::vector<int> rank(cts.size());
  for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = static_cast<int>(r);
  return rank;
}

inline Time lcm_all(const ConcreteTaskSet& cts) {
  Time h = 1;
  for (const auto& t : cts) h = std::lcm(h, t.period);
  return h;
}

// Demand check at every absolute deadline up to the hyperperiod.
inline bool edf_exhaustive(const ConcreteTaskSet& cts) {
  long double u = 0;
  for (const auto& t : cts) u += static_cast<long double>(t.budget) / t.period;
  if (u > 1.0L + 1e-15L) return false;
  const Time h = lcm_all(cts);
  Time max_d = 0;
  for (const auto& t : cts) max_d = std::max(max_d, t.deadline);
  for (const auto& t : cts) {
    for (Time d = t.deadline; d <= h + max_d; d += t.period) {
      Time dem = 0;
      for (const auto& x : cts)
        if (d >= x.deadline) dem += ((d - x.deadline) / x.period + 1) * x.budget;
      if (dem > d) return false;
    }
  }
  return true;
}

// Best LO score by plain recursion over catalog choices.
inline std::optional<double> brute_force_best_score(const TaskSet& ts, const std::function<bool(const ConcreteTaskSet&)>& test) {
  std::optional<double> best;
  ConcreteTaskSet cts;
  for (const auto& t : ts.tasks) cts.push_back({t.catalog.wcet().value, t.criticality, t.deadline, t.period});
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double p) {
    if (i == ts.size()) {
      if (test(cts) && (!best || p > *best)) best = p;
      return;
    }
    const Task& t = ts.tasks[i];
    if (!t.is_lo()) {
      rec(i + 1, p);
      return;
    }
    for (const auto& e : t.catalog) {
      cts[i].budget = e.value;
      rec(i + 1, p * e.meet_prob);
    }
    cts[i].budget = t.catalog.wcet().value;
  };
  rec(0, 1.0);
  return best;
}

// Small random concrete set with integer budgets, constrained deadlines.
template <class URBG>
ConcreteTaskSet random_concrete(URBG& rng, std::size_t n, Time max_period) {
  std::uniform_int_distribution<Time> per(2, max_period);
  ConcreteTaskSet cts;
  for (std::size_t i = 0; i < n; ++i) {
    const Time t = per(rng);
    std::uniform_int_distribution<Time> dl((t + 1) / 2, t);
    const Time d = dl(rng);
    std::uniform_int_distribution<Time> c(1, std::max<Time>(1, d / static_cast<Time>(n)));
    cts.push_back({c(rng), Criticality::Lo, d, t});
  }
  return cts;
}

// Task set built from random small distributions with catalog = full support.
template <class URBG>
TaskSet random_taskset(URBG& rng, std::size_t n, std::size_t support, Time max_period, std::size_t hi = 0) {
  TaskSet ts;
  std::uniform_int_distribution<Time> per(4, max_period);
  std::uniform_int_distribution<std::uint64_t> cnt(1, 20);
  for (std::size_t i = 0; i < n; ++i) {
    const Time t = per(rng);
    std::uniform_int_distribution<Time> dl((t + 1) / 2, t);
    const Time d = dl(rng);
    const Time top = std::max<Time>(static_cast<Time>(support), t / 2);
    std::uniform_int_distribution<Time> val(1, top);
    std::vector<Time> vals;
    while (vals.size() < support) {
      const Time v = val(rng);
      if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
    }
    std::vector<EmpiricalDistribution::Point> pts;
    for (Time v : vals) pts.push_back({v, cnt(rng)});
    auto dist = EmpiricalDistribution::from_counts(pts);
    // Percentiles hitting every support point.
    std::vector<double> qs;
    for (const auto& p : dist.points()) qs.push_back(100.0 * static_cast<double>(dist.count_at_most(p.value)) / static_cast<double>(dist.total()) - 1e-9);
    const Criticality crit = i + hi >= n ? Criticality::Hi : Criticality::Lo;
    ts.tasks.push_back(make_task(static_cast<int>(i), std::move(dist), qs, crit, d, t, TvKind::Vwcet));
  }
  return ts;
}

}  // namespace mcb::testing
