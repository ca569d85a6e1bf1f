#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mcbudget/distribution.hpp"

namespace mcb {

enum class Criticality { Lo, Hi };

// Dispersion parameter used as a task's execution-time variability.
enum class TvKind { Vwcet, Skewness };

inline std::string_view to_string(Criticality c) { return c == Criticality::Lo ? "LO" : "HI"; }
inline std::string_view to_string(TvKind k) { return k == TvKind::Vwcet ? "vwcet" : "skewness"; }

// Skewness of a constant distribution is undefined; such tasks sort last.
inline double variability(const EmpiricalDistribution& dist, TvKind kind) {
  if (kind == TvKind::Vwcet) return vwcet(dist);
  if (dist.is_constant()) return -std::numeric_limits<double>::infinity();
  return skewness(dist);
}

struct BudgetOption {
  Time value;
  double meet_prob;
  friend bool operator==(const BudgetOption&, const BudgetOption&) = default;
};

// Candidate budgets b_1 > b_2 > ... > b_m. b_1 is the WCET with meet
// probability 1; every value is in the distribution's support.
class BudgetCatalog {
 public:
  BudgetCatalog() = default;

  static BudgetCatalog build(const EmpiricalDistribution& dist, std::span<const double> percentiles) {
    std::vector<Time> values{dist.max()};
    for (double q : percentiles) values.push_back(percentile(dist, q));
    std::sort(values.begin(), values.end(), std::greater<>{});
    values.erase(std::unique(values.begin(), values.end()), values.end());
    BudgetCatalog cat;
    for (Time v : values) cat.entries_.push_back({v, meet_prob(dist, v)});
    return cat;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const BudgetOption& operator[](std::size_t r) const { return entries_.at(r); }
  const BudgetOption& wcet() const { return entries_.front(); }
  const BudgetOption& minimum() const { return entries_.back(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool contains(Time v) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(), [v](const auto& e) { return e.value == v; });
  }

  friend bool operator==(const BudgetCatalog&, const BudgetCatalog&) = default;

 private:
  std::vector<BudgetOption> entries_;
};

inline BudgetCatalog build_catalog(const EmpiricalDistribution& dist, std::span<const double> percentiles) {
  return BudgetCatalog::build(dist, percentiles);
}

struct Task {
  int id = 0;
  EmpiricalDistribution dist;
  std::vector<double> percentiles;
  BudgetCatalog catalog;
  double tv = 0.0;
  Criticality criticality = Criticality::Lo;
  Time deadline = 1;
  Time period = 1;

  bool is_lo() const noexcept { return criticality == Criticality::Lo; }
};

inline Task make_task(int id, EmpiricalDistribution dist, std::vector<double> percentiles,
                      Criticality crit, Time deadline, Time period, TvKind tv_kind) {
  if (deadline <= 0 || period <= 0) throw Error("deadline and period must be positive");
  if (deadline > period) throw Error("deadline exceeds period");
  if (percentiles.empty()) throw Error("empty percentile list");
  BudgetCatalog cat = BudgetCatalog::build(dist, percentiles);
  const double tv = variability(dist, tv_kind);
  return Task{id, std::move(dist), std::move(percentiles), std::move(cat), tv, crit, deadline, period};
}

struct TaskSet {
  TvKind tv_kind = TvKind::Vwcet;
  std::vector<Task> tasks;

  std::size_t size() const noexcept { return tasks.size(); }
  const Task& operator[](std::size_t i) const { return tasks.at(i); }

  std::size_t count_lo() const {
    return static_cast<std::size_t>(std::count_if(tasks.begin(), tasks.end(), [](const Task& t) { return t.is_lo(); }));
  }

  // Largest catalog size over LO tasks (the m of the complexity bounds).
  std::size_t max_lo_catalog() const {
    std::size_t m = 0;
    for (const auto& t : tasks)
      if (t.is_lo()) m = std::max(m, t.catalog.size());
    return m;
  }
};

// Ids must be dense 0-based indices in order.
inline void validate(const TaskSet& ts) {
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const Task& t = ts.tasks[i];
    if (t.id != static_cast<int>(i)) throw Error("task ids must be dense 0-based indices in order");
    if (t.deadline <= 0 || t.deadline > t.period) throw Error("task requires 0 < D <= T");
  }
}

struct BudgetAssignment {
  std::vector<Time> budgets;

  std::size_t size() const noexcept { return budgets.size(); }
  Time operator[](std::size_t i) const { return budgets.at(i); }
  friend bool operator==(const BudgetAssignment&, const BudgetAssignment&) = default;
};

inline BudgetAssignment wcet_assignment(const TaskSet& ts) {
  BudgetAssignment b;
  for (const auto& t : ts.tasks) b.budgets.push_back(t.catalog.wcet().value);
  return b;
}

struct ConcreteTask {
  Time budget;
  Criticality criticality;
  Time deadline;
  Time period;
  friend bool operator==(const ConcreteTask&, const ConcreteTask&) = default;
};

using ConcreteTaskSet = std::vector<ConcreteTask>;

inline void check_assignment(const TaskSet& ts, const BudgetAssignment& b) {
  if (b.size() != ts.size()) throw Error("assignment size does not match task set");
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (!ts.tasks[i].catalog.contains(b.budgets[i])) throw Error("budget not in catalog");
}

// Gamma_B: every task's execution time fixed to its assigned budget.
inline ConcreteTaskSet instantiate(const TaskSet& ts, const BudgetAssignment& b) {
  check_assignment(ts, b);
  ConcreteTaskSet out;
  out.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Task& t = ts.tasks[i];
    out.push_back({b.budgets[i], t.criticality, t.deadline, t.period});
  }
  return out;
}

enum class ScoreScope { All, Lo, Hi };

// Product of p_i(B_i) over the tasks in scope. Empty scope scores 1.
inline double score(const TaskSet& ts, const BudgetAssignment& b, ScoreScope scope) {
  if (b.size() != ts.size()) throw Error("assignment size does not match task set");
  double s = 1.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Task& t = ts.tasks[i];
    if (scope == ScoreScope::Lo && !t.is_lo()) continue;
    if (scope == ScoreScope::Hi && t.is_lo()) continue;
    s *= meet_prob(t.dist, b.budgets[i]);
  }
  return s;
}

}  // namespace mcb
