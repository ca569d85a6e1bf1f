#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mcbudget/assign.hpp"
#include "mcbudget/generator.hpp"
#include "mcbudget/io.hpp"
#include "mcbudget/simulator.hpp"

namespace mcb {

inline constexpr const char* kVersion = "0.1.0";

enum class Campaign { Scores, Runtime, StopRatio };

inline std::string_view to_string(Campaign c) {
  switch (c) {
    case Campaign::Scores: return "scores";
    case Campaign::Runtime: return "runtime";
    case Campaign::StopRatio: return "stopratio";
  }
  return "?";
}

inline Campaign parse_campaign(std::string_view s) {
  if (s == "scores") return Campaign::Scores;
  if (s == "runtime") return Campaign::Runtime;
  if (s == "stopratio") return Campaign::StopRatio;
  throw Error("unknown campaign: " + std::string(s));
}

struct ExperimentConfig {
  Campaign campaign = Campaign::Scores;
  GenConfig gen;
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::size_t trials = 200;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  SchedPolicy sched = SchedPolicy::Edf;
  std::uint64_t opt_cap = 10'000'000;
  std::size_t n_min = 4;  // runtime campaign sweep
  std::size_t n_max = 10;
  Time sim_duration = 600'000'000;  // stop-ratio campaign horizon in ticks
  std::optional<TaskSet> fixture;   // use this task set for every trial instead of generating
  bool record_wall_time = true;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw Error("trials must be >= 1");
  if (cfg.algorithms.empty()) throw Error("algorithm list is empty");
  if (cfg.n_min < 1 || cfg.n_min > cfg.n_max) throw Error("bad task-count sweep");
  if (cfg.sim_duration < 1) throw Error("simulation duration must be >= 1");
}

struct TrialRow {
  std::size_t n_tasks = 0;
  std::size_t trial = 0;
  Algorithm algo = Algorithm::Vwcet;
  bool feasible = false;
  double score_lo = 0.0;
  std::size_t test_calls = 0;
  std::int64_t wall_ns = 0;
  bool capped = false;
};

struct StopRatioRow {
  std::size_t trial = 0;
  Algorithm algo = Algorithm::Vwcet;
  std::size_t task = 0;
  Time budget = 0;
  double p_meet = 0.0;
  double observed_meet = 0.0;  // 1 - stop ratio
  std::uint64_t released = 0;
  std::uint64_t stopped = 0;
  std::uint64_t deadline_misses = 0;
};

struct DiscardRecord {
  std::size_t n_tasks = 0;
  std::size_t trial = 0;
  std::string reason;
};

struct FiveNumberSummary {
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

struct CampaignResult {
  Campaign campaign = Campaign::Scores;
  std::vector<TrialRow> rows;
  std::vector<StopRatioRow> stop_rows;
  std::vector<DiscardRecord> discards;
  std::size_t kept = 0;
  // Per algorithm, over feasible score_lo values.
  std::vector<std::pair<Algorithm, FiveNumberSummary>> summary;

  const FiveNumberSummary& summary_for(Algorithm a) const {
    for (const auto& [algo, s] : summary)
      if (algo == a) return s;
    throw Error("no summary for " + std::string(to_string(a)));
  }
};

// Linear-interpolation quantile (type 7) of sorted values.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline FiveNumberSummary summarize(std::vector<double> values) {
  FiveNumberSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  s.max = values.back();
  double acc = 0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(values.size());
  return s;
}

inline std::vector<std::pair<Algorithm, FiveNumberSummary>> summarize_rows(const std::vector<TrialRow>& rows,
                                                                           const std::vector<Algorithm>& algos) {
  std::vector<std::pair<Algorithm, FiveNumberSummary>> out;
  for (Algorithm a : algos) {
    std::vector<double> scores;
    for (const auto& r : rows)
      if (r.algo == a && r.feasible) scores.push_back(r.score_lo);
    out.emplace_back(a, summarize(std::move(scores)));
  }
  return out;
}

// Runs fn(i) for i in [0, count) on `workers` threads. The first exception
// thrown by any task is rethrown after all workers join.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Definition of a valid mixed-criticality assignment: the test accepts
// Gamma_B and every HI task runs at its WCET.
inline bool satisfies_mc_schedulability(const TaskSet& ts, const BudgetAssignment& b, SchedPolicy policy) {
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (!ts.tasks[i].is_lo() && b.budgets[i] != ts.tasks[i].catalog.wcet().value) return false;
  return score(ts, b, ScoreScope::Hi) == 1.0 && analyze(instantiate(ts, b), policy).schedulable;
}

namespace detail {

inline constexpr std::uint64_t kRandomOrderStream = 0x52414e444f4dULL;
inline constexpr std::uint64_t kSimulationStream = 0x53494d554cULL;

inline std::uint64_t random_order_seed(std::uint64_t master, std::size_t n, std::size_t trial) {
  return derive_seed(derive_seed(master ^ kRandomOrderStream, n), trial);
}

struct TrialOutcome {
  std::vector<TrialRow> rows;
  std::vector<StopRatioRow> stop_rows;
  std::optional<std::string> discard;
};

inline TaskSet trial_taskset(const ExperimentConfig& cfg, std::size_t n, std::size_t trial, bool sweep) {
  if (cfg.fixture) return *cfg.fixture;
  GenConfig g = cfg.gen;
  g.n_tasks = n;
  g.seed = sweep ? derive_seed(cfg.seed, n) : cfg.seed;
  return generate_trial(g, trial);
}

inline TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t n, std::size_t trial, bool sweep) {
  TrialOutcome out;
  TaskSet ts;
  try {
    ts = trial_taskset(cfg, n, trial, sweep);
  } catch (const Error& e) {
    out.discard = std::string("generation: ") + e.what();
    return out;
  }

  AssignOptions opts;
  opts.random_seed = random_order_seed(cfg.seed, n, trial);
  opts.max_configurations = cfg.opt_cap;

  std::vector<AssignmentResult> results;
  for (Algorithm algo : cfg.algorithms) {
    TrialRow row;
    row.n_tasks = ts.size();
    row.trial = trial;
    row.algo = algo;
    if (algo == Algorithm::Opt && search_space_size(ts) > cfg.opt_cap) {
      row.capped = true;
      out.rows.push_back(row);
      results.emplace_back();
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    AssignmentResult r = run_algorithm(algo, ts, PolicyTest{cfg.sched}, opts);
    const auto t1 = std::chrono::steady_clock::now();
    if (cfg.record_wall_time) row.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    row.feasible = r.assigned();
    row.score_lo = r.assigned() ? r.score_lo : 0.0;
    row.test_calls = r.test_calls;
    if (r.assigned() && !satisfies_mc_schedulability(ts, *r.assignment, cfg.sched))
      throw Error("assignment violates mixed-criticality schedulability");
    out.rows.push_back(row);
    results.push_back(std::move(r));
  }

  if (!sweep) {
    const DiscardVerdict verdict = discard_check(ts, results);
    if (!verdict.keep) {
      out.rows.clear();
      out.discard = verdict.reason;
      return out;
    }
  }

  if (cfg.campaign == Campaign::StopRatio) {
    for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
      if (!results[k].assigned()) continue;
      SimConfig sc;
      sc.policy = cfg.sched;
      sc.duration = cfg.sim_duration;
      sc.enforcement = true;
      sc.seed = derive_seed(derive_seed(cfg.seed ^ kSimulationStream, trial), k);
      const BudgetAssignment& b = *results[k].assignment;
      const SimReport rep = simulate(ts, b, sc);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const TaskStats& st = rep.tasks[i];
        StopRatioRow row;
        row.trial = trial;
        row.algo = cfg.algorithms[k];
        row.task = i;
        row.budget = b.budgets[i];
        row.p_meet = meet_prob(ts.tasks[i].dist, b.budgets[i]);
        row.observed_meet = 1.0 - st.stop_ratio();
        row.released = st.released;
        row.stopped = st.stopped;
        row.deadline_misses = st.deadline_misses;
        out.stop_rows.push_back(row);
      }
    }
  }
  return out;
}

inline CampaignResult assemble(const ExperimentConfig& cfg, std::vector<TrialOutcome>& outcomes,
                               const std::vector<std::pair<std::size_t, std::size_t>>& keys) {
  CampaignResult res;
  res.campaign = cfg.campaign;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& o = outcomes[k];
    if (o.discard) {
      res.discards.push_back({keys[k].first, keys[k].second, *o.discard});
      continue;
    }
    ++res.kept;
    res.rows.insert(res.rows.end(), o.rows.begin(), o.rows.end());
    res.stop_rows.insert(res.stop_rows.end(), o.stop_rows.begin(), o.stop_rows.end());
  }
  res.summary = summarize_rows(res.rows, cfg.algorithms);
  return res;
}

inline std::string discard_summary(const std::vector<DiscardRecord>& discards) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : discards) ++counts[d.reason];
  std::string s;
  for (const auto& [reason, c] : counts) s += (s.empty() ? "" : ", ") + reason + "=" + std::to_string(c);
  return s;
}

}  // namespace detail

inline CampaignResult run_campaign_trials(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.fixture ? cfg.fixture->size() : cfg.gen.n_tasks;
  std::vector<detail::TrialOutcome> outcomes(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) { outcomes[t] = detail::run_trial(cfg, n, t, false); });
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (std::size_t t = 0; t < cfg.trials; ++t) keys.emplace_back(n, t);
  CampaignResult res = detail::assemble(cfg, outcomes, keys);
  if (res.kept == 0)
    throw Error("all " + std::to_string(cfg.trials) + " trials discarded (" + detail::discard_summary(res.discards) + ")");
  return res;
}

// Score comparison: every algorithm on every kept trial.
inline CampaignResult run_score_campaign(ExperimentConfig cfg) {
  cfg.campaign = Campaign::Scores;
  return run_campaign_trials(cfg);
}

// Per-task budget meet probability against the simulated non-stop ratio.
inline CampaignResult run_stop_ratio_campaign(ExperimentConfig cfg) {
  cfg.campaign = Campaign::StopRatio;
  return run_campaign_trials(cfg);
}

// Computation cost of each algorithm as the task count grows. Trials are not
// discarded; Opt rows beyond the enumeration cap are marked capped.
inline CampaignResult run_runtime_campaign(ExperimentConfig cfg) {
  cfg.campaign = Campaign::Runtime;
  validate(cfg);
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (std::size_t n = cfg.n_min; n <= cfg.n_max; ++n)
    for (std::size_t t = 0; t < cfg.trials; ++t) keys.emplace_back(n, t);
  std::vector<detail::TrialOutcome> outcomes(keys.size());
  parallel_for(keys.size(), cfg.jobs,
               [&](std::size_t k) { outcomes[k] = detail::run_trial(cfg, keys[k].first, keys[k].second, true); });
  return detail::assemble(cfg, outcomes, keys);
}

inline CampaignResult run_campaign(const ExperimentConfig& cfg) {
  switch (cfg.campaign) {
    case Campaign::Scores: return run_score_campaign(cfg);
    case Campaign::Runtime: return run_runtime_campaign(cfg);
    case Campaign::StopRatio: return run_stop_ratio_campaign(cfg);
  }
  throw Error("unknown campaign");
}

// ---- output ----------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string raw_csv(const CampaignResult& res) {
  const bool sweep = res.campaign == Campaign::Runtime;
  std::string out = sweep ? "n,trial,algo,feasible,score_lo,test_calls,wall_ns,capped\n"
                          : "trial,algo,feasible,score_lo,test_calls,wall_ns\n";
  for (const auto& r : res.rows) {
    if (sweep) out += std::to_string(r.n_tasks) + ",";
    out += std::to_string(r.trial) + "," + std::string(to_string(r.algo)) + "," + (r.feasible ? "1" : "0") + "," +
           (r.feasible ? format_double(r.score_lo) : "") + "," + std::to_string(r.test_calls) + "," +
           std::to_string(r.wall_ns);
    if (sweep) out += r.capped ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

inline std::string stop_ratio_csv(const CampaignResult& res) {
  std::string out = "trial,algo,task,budget,p_meet,observed_meet,released,stopped,deadline_misses\n";
  for (const auto& r : res.stop_rows) {
    out += std::to_string(r.trial) + "," + std::string(to_string(r.algo)) + "," + std::to_string(r.task) + "," +
           std::to_string(r.budget) + "," + format_double(r.p_meet) + "," + format_double(r.observed_meet) + "," +
           std::to_string(r.released) + "," + std::to_string(r.stopped) + "," + std::to_string(r.deadline_misses) +
           "\n";
  }
  return out;
}

inline io::json summary_json(const CampaignResult& res) {
  io::json algos = io::json::object();
  for (const auto& [a, s] : res.summary) {
    algos[std::string(to_string(a))] = {{"count", s.count}, {"min", s.min},       {"q1", s.q1},
                                        {"median", s.median}, {"q3", s.q3}, {"max", s.max},
                                        {"mean", s.mean}};
  }
  io::json j{{"campaign", std::string(to_string(res.campaign))},
             {"kept_trials", res.kept},
             {"discarded_trials", res.discards.size()},
             {"score_lo", algos}};
  if (res.campaign == Campaign::Runtime) {
    // Mean test calls and wall time per (n, algorithm), capped rows excluded.
    std::map<std::size_t, std::map<std::string, std::pair<double, double>>> acc;
    std::map<std::size_t, std::map<std::string, std::size_t>> cnt;
    for (const auto& r : res.rows) {
      if (r.capped) continue;
      auto& a = acc[r.n_tasks][std::string(to_string(r.algo))];
      a.first += static_cast<double>(r.test_calls);
      a.second += static_cast<double>(r.wall_ns);
      ++cnt[r.n_tasks][std::string(to_string(r.algo))];
    }
    io::json by_n = io::json::array();
    for (const auto& [n, m] : acc) {
      io::json e{{"n", n}};
      for (const auto& [algo, sums] : m) {
        const double c = static_cast<double>(cnt[n][algo]);
        e[algo] = {{"mean_test_calls", sums.first / c}, {"mean_wall_ns", sums.second / c}};
      }
      by_n.push_back(e);
    }
    j["runtime"] = by_n;
  }
  return j;
}

inline io::json manifest_json(const ExperimentConfig& cfg, const CampaignResult& res) {
  io::json algos = io::json::array();
  for (Algorithm a : cfg.algorithms) algos.push_back(std::string(to_string(a)));
  io::json discards = io::json::array();
  for (const auto& d : res.discards) discards.push_back({{"n", d.n_tasks}, {"trial", d.trial}, {"reason", d.reason}});
  std::map<std::string, std::size_t> counts;
  for (const auto& d : res.discards) ++counts[d.reason];
  return io::json{{"tool", "mcbudget"},
                  {"version", kVersion},
                  {"campaign", std::string(to_string(cfg.campaign))},
                  {"trials", cfg.trials},
                  {"jobs", cfg.jobs},
                  {"seed", cfg.seed},
                  {"sched", std::string(to_string(cfg.sched))},
                  {"algorithms", algos},
                  {"opt_cap", cfg.opt_cap},
                  {"n_range", {cfg.n_min, cfg.n_max}},
                  {"sim_duration", cfg.sim_duration},
                  {"fixture", cfg.fixture.has_value()},
                  {"gen", io::to_json(cfg.gen)},
                  {"discard_counts", counts},
                  {"discards", discards}};
}

inline void write_campaign(const ExperimentConfig& cfg, const CampaignResult& res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  io::write_file((fs::path(out_dir) / "raw.csv").string(), raw_csv(res));
  io::write_file((fs::path(out_dir) / "summary.json").string(), summary_json(res).dump(2) + "\n");
  io::write_file((fs::path(out_dir) / "manifest.json").string(), manifest_json(cfg, res).dump(2) + "\n");
  if (res.campaign == Campaign::StopRatio)
    io::write_file((fs::path(out_dir) / "stopratio.csv").string(), stop_ratio_csv(res));
}

}  // namespace mcb
