#include <gtest/gtest.h>

#include <random>

#include "mcbudget/sched.hpp"
#include "support.hpp"

using namespace mcb;
using namespace mcb::testing;

namespace {

ConcreteTaskSet worked(Time c1, Time c2, Time c3) { return concrete({{c1, 6, 6}, {c2, 9, 9}, {c3, 12, 12}}); }

}  // namespace

TEST(Rta, WorkedExampleHeuristicBudgets) {
  const auto v = rta_fixed_priority(worked(3, 1, 3), Priority::RateMonotonic);
  EXPECT_TRUE(v.schedulable);
  EXPECT_EQ(v.response_times, (std::vector<Time>{3, 4, 11}));
}

TEST(Rta, WorkedExampleAllWcetFails) {
  const auto v = rta_fixed_priority(worked(3, 3, 3), Priority::RateMonotonic);
  EXPECT_FALSE(v.schedulable);
  EXPECT_GT(v.response_times[2], 12);
  EXPECT_EQ(v.response_times[0], 3);
  EXPECT_EQ(v.response_times[1], 6);
}

TEST(Rta, MinimalBudgets) {
  const auto v = rta_fixed_priority(worked(1, 1, 1), Priority::RateMonotonic);
  EXPECT_TRUE(v.schedulable);
  EXPECT_EQ(v.response_times, (std::vector<Time>{1, 2, 3}));
}

TEST(Rta, DeadlineMonotonicUsesDeadlines) {
  // Under RM task 0 (T=5) preempts task 1; under DM task 1 (D=2) goes first.
  const auto cts = concrete({{2, 5, 5}, {2, 2, 10}});
  EXPECT_FALSE(rta_fixed_priority(cts, Priority::RateMonotonic).schedulable);
  const auto dm = rta_fixed_priority(cts, Priority::DeadlineMonotonic);
  EXPECT_TRUE(dm.schedulable);
  EXPECT_EQ(dm.response_times, (std::vector<Time>{4, 2}));
}

TEST(Rta, EqualPeriodsBreakByLowerId) {
  const auto order = priority_order(concrete({{1, 8, 8}, {1, 4, 4}, {1, 8, 8}}), Priority::RateMonotonic);
  EXPECT_EQ(order, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Edf, FullUtilizationImplicitDeadlines) {
  EXPECT_TRUE(edf_demand_test(concrete({{1, 2, 2}, {1, 2, 2}})).schedulable);
}

TEST(Edf, WorkedExampleAllWcet) {
  const auto cts = worked(3, 3, 3);
  EXPECT_EQ(demand_bound(cts, 12), 12);
  EXPECT_EQ(demand_bound(cts, 36), 39);
  EXPECT_FALSE(edf_demand_test(cts).schedulable);
}

TEST(Edf, BudgetExceedsDeadline) {
  const auto cts = concrete({{2, 1, 4}});
  EXPECT_EQ(demand_bound(cts, 1), 2);
  EXPECT_FALSE(edf_demand_test(cts).schedulable);
}

TEST(Edf, OverUtilizedRejected) {
  EXPECT_FALSE(edf_demand_test(concrete({{2, 3, 3}, {2, 4, 4}})).schedulable);
}

TEST(Edf, ConstrainedDeadlineViolationBelowFullUtilization) {
  // U = 0.5 + 0.25 but both demand 3 by t = 2.
  const auto cts = concrete({{2, 2, 4}, {1, 2, 4}});
  EXPECT_FALSE(edf_demand_test(cts).schedulable);
  EXPECT_FALSE(edf_exhaustive(cts));
}

TEST(Edf, HorizonIsHyperperiodAtFullUtilization) {
  const auto cts = concrete({{1, 2, 2}, {1, 3, 6}, {1, 6, 6}});
  EXPECT_EQ(demand_check_horizon(cts), 6);
}

TEST(Edf, AgreesWithExhaustiveAndSimulation) {
  std::mt19937_64 rng(99);
  int accepted = 0;
  for (int iter = 0; iter < 1500; ++iter) {
    const auto cts = random_concrete(rng, 1 + iter % 4, 16);
    const bool qpa = edf_demand_test(cts).schedulable;
    EXPECT_EQ(qpa, edf_exhaustive(cts)) << "iteration " << iter;
    const Time h = lcm_all(cts);
    Time max_d = 0;
    for (const auto& t : cts) max_d = std::max(max_d, t.deadline);
    const bool sim_ok = !tick_simulate(cts, h + max_d, true, {}).miss;
    long double u = 0;
    for (const auto& t : cts) u += static_cast<long double>(t.budget) / t.period;
    if (u <= 1) {
      EXPECT_EQ(qpa, sim_ok) << "iteration " << iter;
    }
    accepted += qpa;
  }
  EXPECT_GT(accepted, 100);
}

TEST(Rta, MatchesTickSimulationOfCriticalInstant) {
  std::mt19937_64 rng(5);
  int accepted = 0;
  for (int iter = 0; iter < 1500; ++iter) {
    const auto cts = random_concrete(rng, 1 + iter % 5, 20);
    const auto v = rta_fixed_priority(cts, Priority::RateMonotonic);
    const auto sim = tick_simulate(cts, lcm_all(cts), false, rm_rank(cts));
    EXPECT_EQ(v.schedulable, !sim.miss) << "iteration " << iter;
    if (v.schedulable) {
      ++accepted;
      EXPECT_EQ(v.response_times, sim.first_response) << "iteration " << iter;
      EXPECT_EQ(v.response_times, sim.worst_response) << "iteration " << iter;
    }
  }
  EXPECT_GT(accepted, 100);
}

TEST(Sustainability, ReducingBudgetKeepsAcceptance) {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 600; ++iter) {
    const auto cts = random_concrete(rng, 2 + iter % 4, 24);
    for (SchedPolicy p : {SchedPolicy::Rm, SchedPolicy::Dm, SchedPolicy::Edf}) {
      if (!analyze(cts, p).schedulable) continue;
      for (std::size_t i = 0; i < cts.size(); ++i) {
        if (cts[i].budget <= 1) continue;
        auto smaller = cts;
        --smaller[i].budget;
        EXPECT_TRUE(analyze(smaller, p).schedulable);
      }
    }
  }
}

TEST(Counting, CountsEveryVerdict) {
  CountingTest counted(PolicyTest{SchedPolicy::Edf});
  const auto cts = worked(1, 1, 1);
  for (int i = 0; i < 5; ++i) counted(cts);
  EXPECT_EQ(counted.calls(), 5u);
}

TEST(BruteForce, WorkedExampleMissProbability) {
  const auto ts = worked_example();
  EXPECT_NEAR(prob_deadline_miss_bruteforce(ts, 2, Priority::RateMonotonic), 0.20472, 1e-9);
}

TEST(BruteForce, PointDistributionsMatchRta) {
  TaskSet ts;
  ts.tasks.push_back(make_task(0, dist_of({{3, 1}}), {50}, Criticality::Lo, 6, 6, TvKind::Vwcet));
  ts.tasks.push_back(make_task(1, dist_of({{1, 1}}), {50}, Criticality::Lo, 9, 9, TvKind::Vwcet));
  ts.tasks.push_back(make_task(2, dist_of({{3, 1}}), {50}, Criticality::Hi, 12, 12, TvKind::Vwcet));
  EXPECT_DOUBLE_EQ(prob_deadline_miss_bruteforce(ts, 2, Priority::RateMonotonic), 0.0);
  ts.tasks[1] = make_task(1, dist_of({{3, 1}}), {50}, Criticality::Lo, 9, 9, TvKind::Vwcet);
  EXPECT_DOUBLE_EQ(prob_deadline_miss_bruteforce(ts, 2, Priority::RateMonotonic), 1.0);
}

TEST(BruteForce, SingleTaskNoInterference) {
  TaskSet ts;
  ts.tasks.push_back(make_task(0, dist_of({{1, 3}, {4, 1}, {7, 2}}), {50}, Criticality::Hi, 7, 10, TvKind::Vwcet));
  EXPECT_DOUBLE_EQ(prob_deadline_miss_bruteforce(ts, 0, Priority::RateMonotonic), 0.0);
}

TEST(BruteForce, CollapsedDistributionsAgreeWithRta) {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 300; ++iter) {
    const auto cts = random_concrete(rng, 1 + iter % 4, 15);
    TaskSet ts;
    for (std::size_t i = 0; i < cts.size(); ++i)
      ts.tasks.push_back(make_task(static_cast<int>(i), dist_of({{cts[i].budget, 1}}), {50}, Criticality::Lo,
                                   cts[i].deadline, cts[i].period, TvKind::Vwcet));
    const auto v = rta_fixed_priority(cts, Priority::RateMonotonic);
    for (std::size_t i = 0; i < cts.size(); ++i) {
      const double p = prob_deadline_miss_bruteforce(ts, i, Priority::RateMonotonic);
      EXPECT_EQ(p, v.response_times[i] > cts[i].deadline ? 1.0 : 0.0) << "iteration " << iter << " task " << i;
    }
  }
}

TEST(BruteForce, CapEnforced) {
  const auto ts = worked_example();
  EXPECT_THROW(
      {
        try {
          prob_deadline_miss_bruteforce(ts, 2, Priority::RateMonotonic, 100);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "instance too large for brute force");
          throw;
        }
      },
      Error);
}
