#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "mcbudget/sched.hpp"
#include "mcbudget/task.hpp"

namespace mcb {

struct SimConfig {
  SchedPolicy policy = SchedPolicy::Rm;
  Time duration = 600'000;  // 10 min at 1 kHz
  bool enforcement = true;
  std::uint64_t seed = 0;
};

struct TaskStats {
  std::uint64_t released = 0;
  std::uint64_t completed = 0;
  std::uint64_t stopped = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t deadline_misses = 0;
  Time max_response = 0;                // over completed jobs
  std::optional<Time> first_response;  // response time of job 0, if it completed

  double stop_ratio() const noexcept {
    return released == 0 ? 0.0 : static_cast<double>(stopped) / static_cast<double>(released);
  }
};

struct SimReport {
  Time duration = 0;
  Time busy_ticks = 0;
  Time idle_ticks = 0;
  std::vector<TaskStats> tasks;
};

// Preemptive uniprocessor simulation over [0, duration) with synchronous
// periodic releases. Each job draws its actual execution time from its
// task's distribution; with enforcement on, a job that consumes its budget
// without finishing is stopped. Time advances event to event, which is
// equivalent to per-tick stepping since every event falls on a tick.
inline SimReport simulate(const TaskSet& ts, const BudgetAssignment& b, const SimConfig& cfg) {
  check_assignment(ts, b);
  if (cfg.duration < 1) throw Error("simulation duration must be >= 1");
  const std::size_t n = ts.size();

  struct Job {
    std::uint64_t index;
    Time release;
    Time deadline;
    Time actual;
    Time consumed = 0;
  };

  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.emplace_back(derive_seed(cfg.seed, i));

  // Fixed-priority rank; unused under EDF.
  std::vector<std::size_t> rank(n, 0);
  if (cfg.policy != SchedPolicy::Edf) {
    const auto order = priority_order(
        ts.tasks, cfg.policy == SchedPolicy::Rm ? Priority::RateMonotonic : Priority::DeadlineMonotonic);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
  }

  SimReport rep;
  rep.duration = cfg.duration;
  rep.tasks.assign(n, {});
  std::vector<std::deque<Job>> queues(n);
  std::vector<Time> next_release(n, 0);

  auto release_due = [&](Time now) {
    for (std::size_t i = 0; i < n; ++i) {
      while (next_release[i] <= now && next_release[i] < cfg.duration) {
        const Task& t = ts.tasks[i];
        const std::uint64_t k = rep.tasks[i].released++;
        queues[i].push_back({k, next_release[i], next_release[i] + t.deadline, t.dist.draw(streams[i])});
        next_release[i] += t.period;
      }
    }
  };

  auto pick = [&]() -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
      if (queues[i].empty()) continue;
      if (!best) {
        best = i;
        continue;
      }
      if (cfg.policy == SchedPolicy::Edf) {
        const Job& a = queues[i].front();
        const Job& c = queues[*best].front();
        if (a.deadline < c.deadline || (a.deadline == c.deadline && a.release < c.release)) best = i;
      } else if (rank[i] < rank[*best]) {
        best = i;
      }
    }
    return best;
  };

  auto finish = [&](std::size_t i, Time now, bool stopped) {
    Job job = queues[i].front();
    queues[i].pop_front();
    TaskStats& st = rep.tasks[i];
    if (now > job.deadline) ++st.deadline_misses;
    if (stopped) {
      ++st.stopped;
      return;
    }
    ++st.completed;
    const Time response = now - job.release;
    st.max_response = std::max(st.max_response, response);
    if (job.index == 0) st.first_response = response;
  };

  Time now = 0;
  while (now < cfg.duration) {
    release_due(now);
    Time upcoming = cfg.duration;
    for (std::size_t i = 0; i < n; ++i) upcoming = std::min(upcoming, next_release[i]);

    const auto running = pick();
    if (!running) {
      rep.idle_ticks += upcoming - now;
      now = upcoming;
      continue;
    }
    const std::size_t i = *running;
    Job& job = queues[i].front();
    const Time budget = b.budgets[i];
    const bool will_stop = cfg.enforcement && job.actual > budget;
    const Time limit = will_stop ? budget : job.actual;
    const Time end = std::min(upcoming, now + (limit - job.consumed));
    rep.busy_ticks += end - now;
    job.consumed += end - now;
    now = end;
    if (job.consumed == limit) finish(i, now, will_stop);
  }

  for (std::size_t i = 0; i < n; ++i) {
    TaskStats& st = rep.tasks[i];
    st.in_flight = queues[i].size();
    for (const Job& job : queues[i])
      if (job.deadline <= cfg.duration) ++st.deadline_misses;
  }
  return rep;
}

}  // namespace mcb
