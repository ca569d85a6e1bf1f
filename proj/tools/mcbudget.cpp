// mcbudget: budget assignment, analysis and simulation for mixed-criticality
// task sets described by empirical execution-time distributions.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcbudget/mcbudget.hpp"

namespace {

using mcb::io::json;

std::vector<mcb::Algorithm> parse_algos(const std::string& csv) {
  std::vector<mcb::Algorithm> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(mcb::parse_algorithm(item));
  return out;
}

void emit(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    mcb::io::write_file(path, j.dump(2) + "\n");
  }
}

int cmd_stats(const std::string& input, const std::vector<double>& percentiles) {
  const auto dist = mcb::io::load_distribution(input);
  const double v = mcb::vwcet(dist);
  json j;
  j["total"] = dist.total();
  j["support_size"] = dist.support_size();
  j["bcet"] = dist.min();
  j["wcet"] = dist.max();
  j["median"] = mcb::median(dist);
  j["vwcet"] = v;
  j["vwcet_percent"] = v * 100.0;
  j["skewness"] = dist.is_constant() ? json(nullptr) : json(mcb::skewness(dist));
  json cat = json::array();
  for (const auto& e : mcb::build_catalog(dist, percentiles)) cat.push_back({{"budget", e.value}, {"meet_prob", e.meet_prob}});
  j["catalog"] = cat;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_gen(mcb::GenConfig cfg, std::size_t trials, mcb::SchedPolicy sched, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json kept = json::array();
  json discards = json::array();
  std::map<std::string, std::size_t> counts;
  for (std::size_t t = 0; t < trials; ++t) {
    std::string reason;
    try {
      const mcb::TaskSet ts = mcb::generate_trial(cfg, t);
      // Every algorithm is infeasible exactly when the minimal-budget
      // configuration is; the heuristic's gate decides that.
      const std::vector<mcb::AssignmentResult> probe{
          mcb::heuristic_assign(ts, mcb::OrderingStrategy::vwcet(), mcb::PolicyTest{sched})};
      const auto verdict = mcb::discard_check(ts, probe);
      if (verdict.keep) {
        char name[64];
        std::snprintf(name, sizeof name, "taskset_%05zu.json", t);
        mcb::io::write_file((fs::path(out_dir) / name).string(), mcb::io::to_json(ts).dump(2) + "\n");
        kept.push_back({{"trial", t}, {"file", name}});
        continue;
      }
      reason = verdict.reason;
    } catch (const mcb::Error& e) {
      reason = std::string("generation: ") + e.what();
    }
    ++counts[reason];
    discards.push_back({{"trial", t}, {"reason", reason}});
  }
  const json manifest{{"tool", "mcbudget"},  {"version", mcb::kVersion},     {"trials", trials},
                      {"sched", std::string(mcb::to_string(sched))},
                      {"gen", mcb::io::to_json(cfg)}, {"kept", kept},   {"discard_counts", counts},
                      {"discards", discards}};
  mcb::io::write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "kept " << kept.size() << " of " << trials << " task sets in " << out_dir << "\n";
  return 0;
}

int cmd_assign(const std::string& input, const std::string& output, const std::string& algo_name,
               mcb::SchedPolicy sched, std::uint64_t seed, std::uint64_t opt_cap) {
  const mcb::TaskSet ts = mcb::io::load_taskset(input);
  mcb::AssignOptions opts;
  opts.random_seed = seed;
  opts.max_configurations = opt_cap;
  const auto algo = mcb::parse_algorithm(algo_name);
  const auto r = mcb::run_algorithm(algo, ts, mcb::PolicyTest{sched}, opts);
  json j = mcb::io::to_json(r);
  j["algo"] = algo_name;
  j["sched"] = std::string(mcb::to_string(sched));
  emit(output, j);
  return 0;
}

int cmd_simulate(const std::string& input, const std::string& assignment, mcb::SimConfig cfg, const std::string& out) {
  const mcb::TaskSet ts = mcb::io::load_taskset(input);
  const auto b = mcb::io::assignment_from_json(json::parse(mcb::io::read_file(assignment)));
  const auto rep = mcb::simulate(ts, b, cfg);
  json j = mcb::io::to_json(rep);
  j["policy"] = std::string(mcb::to_string(cfg.policy));
  j["enforcement"] = cfg.enforcement;
  j["seed"] = cfg.seed;
  emit(out, j);
  return 0;
}

int cmd_verify(const std::string& input, const std::string& assignment, mcb::SchedPolicy sched) {
  const mcb::TaskSet ts = mcb::io::load_taskset(input);
  const auto b = mcb::io::assignment_from_json(json::parse(mcb::io::read_file(assignment)));
  const bool ok = mcb::satisfies_mc_schedulability(ts, b, sched);
  std::cout << (ok ? "schedulable" : "not schedulable") << "\n";
  return ok ? 0 : 1;
}

int cmd_missprob(const std::string& input, std::size_t target, mcb::SchedPolicy sched, std::uint64_t cap) {
  if (sched == mcb::SchedPolicy::Edf) throw mcb::Error("missprob supports fixed priority only (rm|dm)");
  const mcb::TaskSet ts = mcb::io::load_taskset(input);
  const auto prio = sched == mcb::SchedPolicy::Rm ? mcb::Priority::RateMonotonic : mcb::Priority::DeadlineMonotonic;
  const double p = mcb::prob_deadline_miss_bruteforce(ts, target, prio, cap);
  std::cout << json{{"target", target}, {"miss_probability", p}}.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Execution-time budget assignment for mixed-criticality task sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mcb::kVersion));

  std::string sched_name = "rm";
  const auto sched_check = CLI::IsMember({"rm", "dm", "edf"});

  // stats
  auto* stats = app.add_subcommand("stats", "Dispersion parameters and budget catalog of a sample file");
  std::string stats_input;
  std::vector<double> stats_percentiles{80, 60, 50};
  stats->add_option("--input", stats_input, "JSON {\"samples\": ...} or one integer per line")->required();
  stats->add_option("--percentiles", stats_percentiles, "Catalog percentiles")->delimiter(',');

  // gen
  auto* gen = app.add_subcommand("gen", "Generate random task sets");
  mcb::GenConfig gcfg;
  int gen_scenario = 3;
  std::size_t gen_trials = 10;
  std::string gen_out = "tasksets";
  std::string gen_tv = "vwcet";
  std::string gen_sched = "edf";
  gen->add_option("--n", gcfg.n_tasks, "Tasks per set")->check(CLI::PositiveNumber);
  gen->add_option("--scenario", gen_scenario, "Skewness scenario")->check(CLI::Range(1, 3));
  gen->add_option("--trials", gen_trials, "Number of task sets")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gcfg.seed, "Master seed");
  gen->add_option("--out-dir", gen_out, "Output directory");
  gen->add_option("--samples", gcfg.samples_per_task, "Execution-time samples per task")->check(CLI::PositiveNumber);
  gen->add_option("--hi", gcfg.hi_tasks, "Number of HI tasks (placed last)");
  gen->add_option("--tv-kind", gen_tv, "Variability recorded on tasks")->check(CLI::IsMember({"vwcet", "skewness"}));
  gen->add_option("--sched", gen_sched, "Test used by the no-solution discard rule")->check(sched_check);
  gen->add_option("--percentiles", gcfg.percentiles, "Catalog percentiles")->delimiter(',');
  gen->add_option("--ticks-per-unit", gcfg.ticks_per_unit, "Ticks per period unit")->check(CLI::PositiveNumber);

  // assign
  auto* assign = app.add_subcommand("assign", "Assign budgets to a task set");
  std::string as_input, as_output = "-", as_algo = "vwcet";
  std::uint64_t as_seed = 0, as_cap = 10'000'000;
  assign->add_option("--input", as_input, "Task-set JSON")->required();
  assign->add_option("--output", as_output, "Assignment JSON ('-' for stdout)");
  assign->add_option("--algo", as_algo, "Algorithm")
      ->check(CLI::IsMember({"vwcet", "skw", "periods", "deadlines", "random", "medians", "opt"}));
  assign->add_option("--sched", sched_name, "Schedulability test")->check(sched_check);
  assign->add_option("--seed", as_seed, "Seed for the random ordering");
  assign->add_option("--opt-cap", as_cap, "Enumeration cap for opt");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a task set under an assignment with budget enforcement");
  std::string sim_input, sim_assignment, sim_out = "-", sim_policy = "rm";
  mcb::SimConfig scfg;
  bool no_enforcement = false;
  sim->add_option("--input", sim_input, "Task-set JSON")->required();
  sim->add_option("--assignment", sim_assignment, "Assignment JSON")->required();
  sim->add_option("--policy", sim_policy, "Scheduling policy")->check(sched_check);
  sim->add_option("--duration-ticks", scfg.duration, "Simulated horizon in ticks")->check(CLI::PositiveNumber);
  sim->add_option("--seed", scfg.seed, "Seed for execution-time draws");
  sim->add_option("--out", sim_out, "Report JSON ('-' for stdout)");
  sim->add_flag("--no-enforcement", no_enforcement, "Let jobs overrun their budgets");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an evaluation campaign");
  mcb::ExperimentConfig ecfg;
  std::string ex_campaign = "scores", ex_algos = "vwcet,skw,periods,deadlines,random,medians,opt";
  std::string ex_sched = "edf", ex_out = "results", ex_fixture;
  int ex_scenario = 3;
  bool ex_full = false, ex_no_wall = false;
  exp->add_option("--campaign", ex_campaign, "Campaign")->check(CLI::IsMember({"scores", "runtime", "stopratio"}));
  exp->add_option("--scenario", ex_scenario, "Skewness scenario")->check(CLI::Range(1, 3));
  exp->add_option("--trials", ecfg.trials, "Trials (per task count for runtime)")->check(CLI::PositiveNumber);
  exp->add_option("--seed", ecfg.seed, "Master seed");
  exp->add_option("--algos", ex_algos, "Comma-separated algorithm list");
  exp->add_option("--sched", ex_sched, "Schedulability test and simulation policy")->check(sched_check);
  exp->add_option("--jobs", ecfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  exp->add_option("--out-dir", ex_out, "Output directory");
  exp->add_option("--n", ecfg.gen.n_tasks, "Tasks per generated set")->check(CLI::PositiveNumber);
  exp->add_option("--n-min", ecfg.n_min, "Smallest task count (runtime)")->check(CLI::PositiveNumber);
  exp->add_option("--n-max", ecfg.n_max, "Largest task count (runtime)")->check(CLI::PositiveNumber);
  exp->add_option("--samples", ecfg.gen.samples_per_task, "Samples per generated task")->check(CLI::PositiveNumber);
  exp->add_option("--duration-ticks", ecfg.sim_duration, "Simulation horizon (stopratio)")->check(CLI::PositiveNumber);
  exp->add_option("--opt-cap", ecfg.opt_cap, "Enumeration cap for opt");
  exp->add_option("--ticks-per-unit", ecfg.gen.ticks_per_unit, "Ticks per period unit")->check(CLI::PositiveNumber);
  exp->add_option("--input", ex_fixture, "Use this task set for every trial");
  exp->add_flag("--full", ex_full, "1000 trials");
  exp->add_flag("--no-wall-time", ex_no_wall, "Write wall_ns = 0 for byte-stable output");

  // verify
  auto* verify = app.add_subcommand("verify", "Check an assignment for mixed-criticality schedulability");
  std::string ver_input, ver_assignment;
  verify->add_option("--input", ver_input, "Task-set JSON")->required();
  verify->add_option("--assignment", ver_assignment, "Assignment JSON")->required();
  verify->add_option("--sched", sched_name, "Schedulability test")->check(sched_check);

  // missprob
  auto* miss = app.add_subcommand("missprob", "Exact first-job deadline-miss probability by enumeration");
  std::string miss_input;
  std::size_t miss_target = 0;
  std::uint64_t miss_cap = 10'000'000;
  miss->add_option("--input", miss_input, "Task-set JSON")->required();
  miss->add_option("--target", miss_target, "Target task id")->required();
  miss->add_option("--sched", sched_name, "Fixed-priority policy")->check(CLI::IsMember({"rm", "dm"}));
  miss->add_option("--cap", miss_cap, "Maximum number of outcomes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*stats) return cmd_stats(stats_input, stats_percentiles);
    if (*gen) {
      gcfg.scenario = mcb::parse_scenario(gen_scenario);
      gcfg.tv_kind = gen_tv == "vwcet" ? mcb::TvKind::Vwcet : mcb::TvKind::Skewness;
      return cmd_gen(gcfg, gen_trials, mcb::parse_sched_policy(gen_sched), gen_out);
    }
    if (*assign) return cmd_assign(as_input, as_output, as_algo, mcb::parse_sched_policy(sched_name), as_seed, as_cap);
    if (*sim) {
      scfg.policy = mcb::parse_sched_policy(sim_policy);
      scfg.enforcement = !no_enforcement;
      return cmd_simulate(sim_input, sim_assignment, scfg, sim_out);
    }
    if (*exp) {
      ecfg.campaign = mcb::parse_campaign(ex_campaign);
      ecfg.gen.scenario = mcb::parse_scenario(ex_scenario);
      ecfg.gen.seed = ecfg.seed;
      ecfg.algorithms = parse_algos(ex_algos);
      ecfg.sched = mcb::parse_sched_policy(ex_sched);
      ecfg.record_wall_time = !ex_no_wall;
      if (ex_full) ecfg.trials = 1000;
      if (!ex_fixture.empty()) ecfg.fixture = mcb::io::load_taskset(ex_fixture);
      const auto res = mcb::run_campaign(ecfg);
      mcb::write_campaign(ecfg, res, ex_out);
      std::cout << mcb::summary_json(res).dump(2) << "\n";
      return 0;
    }
    if (*verify) return cmd_verify(ver_input, ver_assignment, mcb::parse_sched_policy(sched_name));
    if (*miss) return cmd_missprob(miss_input, miss_target, mcb::parse_sched_policy(sched_name), miss_cap);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
