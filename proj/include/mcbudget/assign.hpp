#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "mcbudget/sched.hpp"
#include "mcbudget/task.hpp"

namespace mcb {

// Order in which LO tasks are picked for budget reduction.
struct OrderingStrategy {
  enum class Kind { TvVwcet, TvSkewness, PeriodAsc, DeadlineAsc, Random };

  Kind kind = Kind::TvVwcet;
  std::uint64_t seed = 0;

  static OrderingStrategy vwcet() { return {Kind::TvVwcet, 0}; }
  static OrderingStrategy skewness() { return {Kind::TvSkewness, 0}; }
  static OrderingStrategy periods() { return {Kind::PeriodAsc, 0}; }
  static OrderingStrategy deadlines() { return {Kind::DeadlineAsc, 0}; }
  static OrderingStrategy random(std::uint64_t seed) { return {Kind::Random, seed}; }
};

// LO task indices in selection order: highest variability first, or
// shortest period/deadline first, or a seeded shuffle. Equal keys keep the
// lower id first.
inline std::vector<std::size_t> selection_order(const TaskSet& ts, const OrderingStrategy& strategy) {
  std::vector<std::size_t> lo;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.tasks[i].is_lo()) lo.push_back(i);

  using K = OrderingStrategy::Kind;
  switch (strategy.kind) {
    case K::TvVwcet:
    case K::TvSkewness: {
      const TvKind tv = strategy.kind == K::TvVwcet ? TvKind::Vwcet : TvKind::Skewness;
      std::vector<double> key(ts.size(), 0.0);
      for (std::size_t i : lo) key[i] = variability(ts.tasks[i].dist, tv);
      std::stable_sort(lo.begin(), lo.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
      break;
    }
    case K::PeriodAsc:
      std::stable_sort(lo.begin(), lo.end(),
                       [&](std::size_t a, std::size_t b) { return ts.tasks[a].period < ts.tasks[b].period; });
      break;
    case K::DeadlineAsc:
      std::stable_sort(lo.begin(), lo.end(),
                       [&](std::size_t a, std::size_t b) { return ts.tasks[a].deadline < ts.tasks[b].deadline; });
      break;
    case K::Random: {
      // Fisher-Yates with an explicit draw so the permutation depends only on the seed.
      Rng rng(strategy.seed);
      for (std::size_t i = lo.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(lo[i - 1], lo[pick(rng)]);
      }
      break;
    }
  }
  return lo;
}

struct AssignmentResult {
  std::optional<BudgetAssignment> assignment;  // nullopt when infeasible
  double score_lo = 0.0;
  double score_hi = 0.0;
  std::size_t test_calls = 0;

  bool assigned() const noexcept { return assignment.has_value(); }
};

namespace detail {

inline AssignmentResult assigned(const TaskSet& ts, BudgetAssignment b, std::size_t calls) {
  AssignmentResult r;
  r.score_lo = score(ts, b, ScoreScope::Lo);
  r.score_hi = score(ts, b, ScoreScope::Hi);
  r.assignment = std::move(b);
  r.test_calls = calls;
  return r;
}

inline AssignmentResult infeasible(std::size_t calls) {
  AssignmentResult r;
  r.test_calls = calls;
  return r;
}

inline ConcreteTaskSet concrete(const TaskSet& ts, const BudgetAssignment& b) {
  ConcreteTaskSet out;
  out.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Task& t = ts.tasks[i];
    out.push_back({b.budgets[i], t.criticality, t.deadline, t.period});
  }
  return out;
}

}  // namespace detail

// Time-variability heuristic. HI tasks keep their WCET; LO tasks start at
// WCET and are lowered one at a time, in `ordering`, along their catalog
// until the set passes the test.
template <SchedulabilityTest Test>
AssignmentResult heuristic_assign(const TaskSet& ts, const OrderingStrategy& ordering, Test test) {
  CountingTest<Test> counted(std::move(test));
  BudgetAssignment b = wcet_assignment(ts);
  ConcreteTaskSet cts = detail::concrete(ts, b);
  auto set_budget = [&](std::size_t i, Time v) {
    b.budgets[i] = v;
    cts[i].budget = v;
  };

  // Feasibility gate: LO tasks at their smallest budget.
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.tasks[i].is_lo()) set_budget(i, ts.tasks[i].catalog.minimum().value);
  if (!counted(cts)) return detail::infeasible(counted.calls());

  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.tasks[i].is_lo()) set_budget(i, ts.tasks[i].catalog.wcet().value);

  const std::vector<std::size_t> candidates = selection_order(ts, ordering);
  std::size_t next = 0;
  while (!counted(cts)) {
    if (next == candidates.size()) return detail::infeasible(counted.calls());
    const std::size_t i = candidates[next++];
    const BudgetCatalog& cat = ts.tasks[i].catalog;
    for (std::size_t r = 1; r < cat.size(); ++r) {
      set_budget(i, cat[r].value);
      if (counted(cts)) return detail::assigned(ts, std::move(b), counted.calls());
    }
    if (next == candidates.size()) return detail::infeasible(counted.calls());
  }
  return detail::assigned(ts, std::move(b), counted.calls());
}

// Number of LO catalog combinations, saturating at UINT64_MAX.
inline std::uint64_t search_space_size(const TaskSet& ts) {
  std::uint64_t n = 1;
  for (const auto& t : ts.tasks) {
    if (!t.is_lo()) continue;
    if (n > std::numeric_limits<std::uint64_t>::max() / t.catalog.size()) return std::numeric_limits<std::uint64_t>::max();
    n *= t.catalog.size();
  }
  return n;
}

// Exhaustive search over all LO catalog combinations, HI tasks at WCET.
// Maximizes score(LO); equal scores prefer the lexicographically larger
// budget vector in task-id order.
template <SchedulabilityTest Test>
AssignmentResult optimal_assign(const TaskSet& ts, Test test, std::uint64_t max_configurations = 10'000'000) {
  if (search_space_size(ts) > max_configurations) throw Error("search space too large");
  CountingTest<Test> counted(std::move(test));

  std::vector<std::size_t> lo;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.tasks[i].is_lo()) lo.push_back(i);

  BudgetAssignment b = wcet_assignment(ts);
  ConcreteTaskSet cts = detail::concrete(ts, b);
  std::vector<std::size_t> rank(lo.size(), 0);

  std::optional<BudgetAssignment> best;
  double best_score = -1.0;
  for (;;) {
    if (counted(cts)) {
      const double s = score(ts, b, ScoreScope::Lo);
      const double tol = 1e-12 * std::max(1.0, std::abs(best_score));
      if (!best || s > best_score + tol || (std::abs(s - best_score) <= tol && b.budgets > best->budgets)) {
        best = b;
        best_score = std::max(best_score, s);
      }
    }
    std::size_t k = 0;
    for (; k < lo.size(); ++k) {
      const std::size_t i = lo[k];
      const BudgetCatalog& cat = ts.tasks[i].catalog;
      if (++rank[k] < cat.size()) {
        b.budgets[i] = cts[i].budget = cat[rank[k]].value;
        break;
      }
      rank[k] = 0;
      b.budgets[i] = cts[i].budget = cat[0].value;
    }
    if (k == lo.size()) break;
  }
  if (!best) return detail::infeasible(counted.calls());
  return detail::assigned(ts, std::move(*best), counted.calls());
}

// Every LO task at its median, HI tasks at WCET; one test call.
template <SchedulabilityTest Test>
AssignmentResult medians_assign(const TaskSet& ts, Test test) {
  CountingTest<Test> counted(std::move(test));
  BudgetAssignment b = wcet_assignment(ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Task& t = ts.tasks[i];
    if (!t.is_lo()) continue;
    const Time m = median(t.dist);
    if (!t.catalog.contains(m)) throw Error("median not in catalog of task " + std::to_string(t.id));
    b.budgets[i] = m;
  }
  if (!counted(detail::concrete(ts, b))) return detail::infeasible(counted.calls());
  return detail::assigned(ts, std::move(b), counted.calls());
}

// The comparison algorithms by name.
enum class Algorithm { Vwcet, Skw, Periods, Deadlines, Random, Medians, Opt };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::Vwcet,  Algorithm::Skw,     Algorithm::Periods,
                                               Algorithm::Deadlines, Algorithm::Random, Algorithm::Medians,
                                               Algorithm::Opt};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Vwcet: return "vwcet";
    case Algorithm::Skw: return "skw";
    case Algorithm::Periods: return "periods";
    case Algorithm::Deadlines: return "deadlines";
    case Algorithm::Random: return "random";
    case Algorithm::Medians: return "medians";
    case Algorithm::Opt: return "opt";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == s) return a;
  throw Error("unknown algorithm: " + std::string(s));
}

struct AssignOptions {
  std::uint64_t random_seed = 0;
  std::uint64_t max_configurations = 10'000'000;
};

template <SchedulabilityTest Test>
AssignmentResult run_algorithm(Algorithm algo, const TaskSet& ts, Test test, const AssignOptions& opts = {}) {
  switch (algo) {
    case Algorithm::Vwcet: return heuristic_assign(ts, OrderingStrategy::vwcet(), std::move(test));
    case Algorithm::Skw: return heuristic_assign(ts, OrderingStrategy::skewness(), std::move(test));
    case Algorithm::Periods: return heuristic_assign(ts, OrderingStrategy::periods(), std::move(test));
    case Algorithm::Deadlines: return heuristic_assign(ts, OrderingStrategy::deadlines(), std::move(test));
    case Algorithm::Random: return heuristic_assign(ts, OrderingStrategy::random(opts.random_seed), std::move(test));
    case Algorithm::Medians: return medians_assign(ts, std::move(test));
    case Algorithm::Opt: return optimal_assign(ts, std::move(test), opts.max_configurations);
  }
  throw Error("unknown algorithm");
}

}  // namespace mcb
