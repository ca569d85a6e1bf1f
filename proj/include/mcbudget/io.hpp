#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcbudget/assign.hpp"
#include "mcbudget/generator.hpp"
#include "mcbudget/simulator.hpp"
#include "mcbudget/task.hpp"

namespace mcb::io {

using nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// ---- distributions ---------------------------------------------------------

inline json samples_to_json(const EmpiricalDistribution& d) {
  json arr = json::array();
  for (const auto& p : d.points()) arr.push_back({p.value, p.count});
  return arr;
}

inline EmpiricalDistribution samples_from_json(const json& arr) {
  if (!arr.is_array()) throw Error("\"samples\" must be an array of [value, count] pairs");
  std::vector<EmpiricalDistribution::Point> pts;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw Error("sample entry must be [value, count] integers");
    const auto count = e[1].get<std::int64_t>();
    if (count <= 0) throw Error("zero occurrence count");
    pts.push_back({e[0].get<Time>(), static_cast<std::uint64_t>(count)});
  }
  return EmpiricalDistribution::from_counts(pts);
}

inline json to_json(const EmpiricalDistribution& d) { return json{{"samples", samples_to_json(d)}}; }

inline EmpiricalDistribution distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("samples")) throw Error("distribution needs a \"samples\" field");
  return samples_from_json(j.at("samples"));
}

// One execution time per line; blank lines and '#' comments are skipped.
inline EmpiricalDistribution distribution_from_lines(const std::string& text) {
  std::vector<Time> samples;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(line.substr(first), &used);
    } catch (const std::exception&) {
      throw Error("line " + std::to_string(lineno) + ": not an integer");
    }
    const auto rest = line.find_first_not_of(" \t\r", first + used);
    if (rest != std::string::npos) throw Error("line " + std::to_string(lineno) + ": trailing characters");
    samples.push_back(v);
  }
  return EmpiricalDistribution::from_samples(samples);
}

// JSON object or plain newline-separated integers, decided by the first
// non-blank character.
inline EmpiricalDistribution load_distribution(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return distribution_from_json(json::parse(text));
  return distribution_from_lines(text);
}

// ---- task sets -------------------------------------------------------------

inline json to_json(const TaskSet& ts) {
  json tasks = json::array();
  for (const auto& t : ts.tasks) {
    tasks.push_back({{"id", t.id},
                     {"criticality", std::string(to_string(t.criticality))},
                     {"D", t.deadline},
                     {"T", t.period},
                     {"samples", samples_to_json(t.dist)},
                     {"percentiles", t.percentiles}});
  }
  return json{{"tv_kind", std::string(to_string(ts.tv_kind))}, {"tasks", tasks}};
}

inline TaskSet taskset_from_json(const json& j) {
  TaskSet ts;
  const std::string kind = j.value("tv_kind", std::string("vwcet"));
  if (kind == "vwcet") {
    ts.tv_kind = TvKind::Vwcet;
  } else if (kind == "skewness") {
    ts.tv_kind = TvKind::Skewness;
  } else {
    throw Error("unknown tv_kind: " + kind);
  }
  if (!j.contains("tasks") || !j.at("tasks").is_array()) throw Error("task set needs a \"tasks\" array");
  for (const auto& e : j.at("tasks")) {
    const std::string crit = e.at("criticality").get<std::string>();
    if (crit != "LO" && crit != "HI") throw Error("criticality must be LO or HI");
    ts.tasks.push_back(make_task(e.at("id").get<int>(), samples_from_json(e.at("samples")),
                                 e.at("percentiles").get<std::vector<double>>(),
                                 crit == "LO" ? Criticality::Lo : Criticality::Hi, e.at("D").get<Time>(),
                                 e.at("T").get<Time>(), ts.tv_kind));
  }
  std::sort(ts.tasks.begin(), ts.tasks.end(), [](const Task& a, const Task& b) { return a.id < b.id; });
  validate(ts);
  return ts;
}

inline TaskSet load_taskset(const std::string& path) {
  try {
    return taskset_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---- assignments -----------------------------------------------------------

inline json to_json(const AssignmentResult& r) {
  json j;
  j["feasible"] = r.assigned();
  j["budgets"] = r.assigned() ? json(r.assignment->budgets) : json::array();
  if (r.assigned()) {
    j["score_lo"] = r.score_lo;
    j["score_hi"] = r.score_hi;
  } else {
    j["score_lo"] = nullptr;
    j["score_hi"] = nullptr;
  }
  j["sched_test_calls"] = r.test_calls;
  return j;
}

inline BudgetAssignment assignment_from_json(const json& j) {
  if (j.contains("feasible") && !j.at("feasible").get<bool>()) throw Error("assignment is infeasible");
  return BudgetAssignment{j.at("budgets").get<std::vector<Time>>()};
}

// ---- simulation reports ----------------------------------------------------

inline json to_json(const SimReport& rep) {
  json tasks = json::array();
  for (std::size_t i = 0; i < rep.tasks.size(); ++i) {
    const TaskStats& s = rep.tasks[i];
    tasks.push_back({{"id", i},
                     {"released", s.released},
                     {"completed", s.completed},
                     {"stopped", s.stopped},
                     {"in_flight", s.in_flight},
                     {"deadline_misses", s.deadline_misses},
                     {"stop_ratio", s.stop_ratio()},
                     {"max_response", s.max_response}});
  }
  return json{{"duration", rep.duration}, {"busy_ticks", rep.busy_ticks}, {"idle_ticks", rep.idle_ticks},
              {"tasks", tasks}};
}

// ---- generator config ------------------------------------------------------

inline json to_json(const GenConfig& c) {
  const BucketCounts bc = bucket_counts(c);
  return json{{"n_tasks", c.n_tasks},
              {"u_max_range", {c.u_max_range.lo, c.u_max_range.hi}},
              {"period_range", {c.period_range.lo, c.period_range.hi}},
              {"ticks_per_unit", c.ticks_per_unit},
              {"deadline_fraction_range", {c.deadline_fraction_range.lo, c.deadline_fraction_range.hi}},
              {"u_reduction_range_percent", {c.u_reduction_range.lo, c.u_reduction_range.hi}},
              {"u_reduction_drawn", "per-task"},
              {"sd_divisor_range", {c.sd_divisor_range.lo, c.sd_divisor_range.hi}},
              {"scenario", static_cast<int>(c.scenario)},
              {"bucket_counts", {{"major", bc.major}, {"middle", bc.middle}, {"minor", bc.minor}}},
              {"skew_threshold", c.skew_threshold},
              {"percentiles", c.percentiles},
              {"seed", c.seed},
              {"samples_per_task", c.samples_per_task},
              {"hi_tasks", c.hi_tasks},
              {"tv_kind", std::string(to_string(c.tv_kind))},
              {"max_redraws", c.max_redraws},
              {"utilization_sampler", "uunifast"},
              {"truncation", "rejection"}};
}

}  // namespace mcb::io
