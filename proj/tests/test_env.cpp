#include <doctest.h>

#include <cmath>
#include <sstream>

#include "resop/bounds.hpp"
#include "resop/env.hpp"
#include "resop/error.hpp"
#include "support/instances.hpp"

using namespace resop;
using namespace resop::env;

namespace {

// Independent enumeration of the decoder loop nest: t outer, i middle, then
// per area a flag and, when the flag came up 1, an amount.
std::vector<StepKind> enumerate_step_kinds(int reservoirs, int areas, int periods,
                                           const std::vector<DecisionStep>& actual) {
  std::vector<StepKind> kinds;
  size_t cursor = 0;
  for (int t = 0; t < periods; ++t)
    for (int i = 0; i < reservoirs; ++i) {
      kinds.push_back(StepKind::Power);
      ++cursor;
      for (int j = 0; j < areas; ++j) {
        kinds.push_back(StepKind::SupplyFlag);
        const bool flag_set = cursor < actual.size() && actual[cursor].chosen == 1;
        ++cursor;
        if (flag_set) {
          kinds.push_back(StepKind::SupplyAmount);
          ++cursor;
        }
      }
    }
  return kinds;
}

}  // namespace

TEST_CASE("ActionSpace grids hit their interval endpoints and stay sorted") {
  const hydro::SystemInstance inst = resop::test::tiny_instance();
  const ActionSpace space = ActionSpace::create(inst, 5, 7);
  CHECK(space.qp_value(0, 0) == inst.reservoirs[0].turbine_flow_lo);
  CHECK(space.qp_value(0, 4) == inst.reservoirs[0].turbine_flow_hi);
  for (int k = 1; k < 5; ++k) CHECK(space.qp_value(0, k) > space.qp_value(0, k - 1));
  CHECK(space.qs_value(0, 0, 0) == 0.0);
  CHECK(space.qs_value(0, 0, 6) == inst.areas[0].supply_max[0] / inst.period_seconds);
  CHECK_THROWS_AS(ActionSpace::create(inst, 1, 5), ContractError);
}

TEST_CASE("degenerate policy: bin 0 everywhere gives qp = Qp_lo and no supply") {
  const hydro::SystemInstance inst = resop::test::tiny_instance();
  const ActionSpace space = ActionSpace::create(inst, 5, 5);
  FixedBinPolicy policy(0, 0, 0);
  Rng rng(1);
  const RolloutResult result = rollout(inst, space, policy, rng);
  for (int t = 0; t < inst.horizon; ++t) {
    CHECK(result.schedule.decisions.turbine_flow(0, t) == inst.reservoirs[0].turbine_flow_lo);
    CHECK(result.schedule.decisions.supply_flag(0, 0, t) == 0);
    CHECK(result.schedule.decisions.supply_flow(0, 0, t) == 0.0);
  }
}

TEST_CASE("I=1 J=1 T=1 step sequence is Power, SupplyFlag, (SupplyAmount)") {
  const hydro::SystemInstance inst = resop::test::loose_instance(1, 1, 1);
  const ActionSpace space = ActionSpace::create(inst, 3, 3);
  {
    FixedBinPolicy no_supply(0, 0, 0);
    Rng rng(2);
    const RolloutResult r = rollout(inst, space, no_supply, rng);
    REQUIRE(r.steps.size() == 2);
    CHECK(r.steps[0].ctx.kind == StepKind::Power);
    CHECK(r.steps[1].ctx.kind == StepKind::SupplyFlag);
  }
  {
    FixedBinPolicy always_supply(0, 1, 1);
    Rng rng(3);
    const RolloutResult r = rollout(inst, space, always_supply, rng);
    REQUIRE(r.steps.size() == 3);
    CHECK(r.steps[2].ctx.kind == StepKind::SupplyAmount);
  }
}

TEST_CASE("forced flags give the full decoder step count T*I*(1+2J)") {
  const hydro::SystemInstance inst = resop::test::loose_instance(2, 2, 3);
  const ActionSpace space = ActionSpace::create(inst, 3, 3);
  FixedBinPolicy always_supply(1, 1, 2);
  Rng rng(4);
  const RolloutResult r = rollout(inst, space, always_supply, rng);
  CHECK(r.steps.size() == 3 * 2 * (1 + 2 * 2));  // 30
}

TEST_CASE("step order matches the independent loop-nest enumeration for I,J,T in 1..4") {
  for (int I = 1; I <= 4; ++I)
    for (int J = 1; J <= 4; ++J)
      for (int T = 1; T <= 4; ++T) {
        const hydro::SystemInstance inst = resop::test::loose_instance(I, J, T);
        const ActionSpace space = ActionSpace::create(inst, 3, 3);
        UniformPolicy policy;
        Rng rng(1000 + I * 100 + J * 10 + T);
        const RolloutResult r = rollout(inst, space, policy, rng);
        const auto expected = enumerate_step_kinds(I, J, T, r.steps);
        REQUIRE(r.steps.size() == expected.size());
        for (size_t k = 0; k < expected.size(); ++k) CHECK(r.steps[k].ctx.kind == expected[k]);
      }
}

TEST_CASE("W accumulation equals partial-schedule recomputation at every flag step") {
  const hydro::SystemInstance inst = resop::test::loose_instance(3, 2, 2);
  const ActionSpace space = ActionSpace::create(inst, 4, 4);
  UniformPolicy policy;
  Rng rng(77);
  const RolloutResult r = rollout(inst, space, policy, rng);
  for (const auto& step : r.steps) {
    if (step.ctx.kind != StepKind::SupplyFlag) continue;
    double delivered = 0.0;
    for (int m = 0; m < step.ctx.reservoir; ++m)
      if (r.schedule.decisions.supply_flag(m, step.ctx.area, step.ctx.period))
        delivered += r.schedule.decisions.supply_flow(m, step.ctx.area, step.ctx.period) *
                     inst.period_seconds;
    CHECK(step.ctx.delivered_water == doctest::Approx(delivered).epsilon(1e-12));
  }
}

TEST_CASE("log-probability bookkeeping sums the per-step logs") {
  const hydro::SystemInstance inst = resop::test::loose_instance(2, 1, 2);
  const ActionSpace space = ActionSpace::create(inst, 5, 5);
  UniformPolicy policy;
  Rng rng(5);
  const RolloutResult r = rollout(inst, space, policy, rng);
  double sum = 0.0;
  for (const auto& step : r.steps) sum += step.log_prob;
  CHECK(r.total_log_prob == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("rollout rejects invalid probability vectors") {
  const hydro::SystemInstance inst = resop::test::loose_instance(1, 0, 1);
  const ActionSpace space = ActionSpace::create(inst, 3, 3);

  struct BadSum : PolicyOracle {
    std::vector<double> action_probabilities(const StepContext& ctx) override {
      return std::vector<double>(ctx.arity, 0.4);
    }
  } bad_sum;
  struct Negative : PolicyOracle {
    std::vector<double> action_probabilities(const StepContext& ctx) override {
      std::vector<double> p(ctx.arity, 0.0);
      p[0] = 1.5;
      p[1] = -0.5;
      return p;
    }
  } negative;
  struct WrongArity : PolicyOracle {
    std::vector<double> action_probabilities(const StepContext& ctx) override {
      return std::vector<double>(ctx.arity + 1, 1.0 / (ctx.arity + 1));
    }
  } wrong_arity;

  Rng rng(6);
  CHECK_THROWS_AS(rollout(inst, space, bad_sum, rng), ContractError);
  CHECK_THROWS_AS(rollout(inst, space, negative, rng), ContractError);
  CHECK_THROWS_AS(rollout(inst, space, wrong_arity, rng), ContractError);
}

TEST_CASE("greedy rollout breaks ties toward the lower bin and is repeatable") {
  const hydro::SystemInstance inst = resop::test::tiny_instance();
  const ActionSpace space = ActionSpace::create(inst, 5, 5);
  UniformPolicy uniform;
  const RolloutResult a = greedy_rollout(inst, space, uniform);
  for (int t = 0; t < inst.horizon; ++t) {
    CHECK(a.schedule.decisions.turbine_flow(0, t) == inst.reservoirs[0].turbine_flow_lo);
    CHECK(a.schedule.decisions.supply_flag(0, 0, t) == 0);
  }
  const RolloutResult b = greedy_rollout(inst, space, uniform);
  CHECK(a.schedule == b.schedule);

  // A one-hot policy makes the sampled rollout equal to the greedy one.
  FixedBinPolicy one_hot(3, 1, 2);
  Rng rng(9);
  const RolloutResult sampled = rollout(inst, space, one_hot, rng);
  const RolloutResult greedy = greedy_rollout(inst, space, one_hot);
  CHECK(sampled.schedule == greedy.schedule);
}

TEST_CASE("episode_reward gates on feasibility and supports soft penalties") {
  const hydro::SystemInstance inst = resop::test::tiny_instance();
  const decomp::ObjectiveBounds bounds = resop::test::hand_bounds();
  const decomp::WeightVector w{0.5, 0.25, 0.25};

  hydro::Decisions d = hydro::Decisions::zeros(inst);
  d.turbine_flow(0, 0) = 150.0;
  d.turbine_flow(0, 1) = 150.0;
  const hydro::OperationSchedule feasible = hydro::derive_trajectory(inst, d);
  const double expected = decomp::scalarize(hydro::objective_triple(inst, feasible), w, bounds);
  CHECK(episode_reward(inst, feasible, w, bounds) == doctest::Approx(expected).epsilon(1e-12));

  d.turbine_flow(0, 0) = 6000.0;
  const hydro::OperationSchedule infeasible = hydro::derive_trajectory(inst, d);
  CHECK(episode_reward(inst, infeasible, w, bounds) == 0.0);
  const double soft = episode_reward(inst, infeasible, w, bounds, {0.5});
  const hydro::FeasibilityReport report = hydro::check_constraints(inst, infeasible);
  const double scalar = decomp::scalarize(hydro::objective_triple(inst, infeasible), w, bounds);
  CHECK(soft == doctest::Approx(scalar - 0.5 * report.total_normalized_violation).epsilon(1e-12));
}

TEST_CASE("trace CSV has one row per decision step") {
  const hydro::SystemInstance inst = resop::test::loose_instance(1, 1, 2);
  const ActionSpace space = ActionSpace::create(inst, 3, 3);
  UniformPolicy policy;
  Rng rng(8);
  const RolloutResult r = rollout(inst, space, policy, rng);
  std::ostringstream os;
  write_trace_csv(os, r.steps);
  int lines = 0;
  std::string line;
  std::istringstream is(os.str());
  while (std::getline(is, line)) ++lines;
  CHECK(lines == static_cast<int>(r.steps.size()) + 1);
}

TEST_CASE("estimate_bounds_sampled brackets fresh feasible samples on the desk dataset") {
  const hydro::SystemInstance& inst = resop::test::desk_instance();
  const ActionSpace space = ActionSpace::create(inst, 51, 51);
  const decomp::ObjectiveBounds bounds = decomp::estimate_bounds_sampled(inst, space, 1000, 42);
  bounds.validate();

  Rng rng(4242);
  int found = 0;
  while (found < 100) {
    const hydro::Decisions d = random_grid_decisions(inst, space, rng);
    const hydro::OperationSchedule sched = hydro::derive_trajectory(inst, d);
    if (!hydro::check_constraints(inst, sched).feasible) continue;
    ++found;
    const hydro::ObjectiveTriple obj = hydro::objective_triple(inst, sched);
    CHECK(obj.power > bounds.power.min_value);
    CHECK(obj.power < bounds.power.max_value);
    CHECK(obj.aapfd > bounds.aapfd.min_value);
    CHECK(obj.aapfd < bounds.aapfd.max_value);
    CHECK(obj.water_revenue > bounds.water.min_value);
    CHECK(obj.water_revenue < bounds.water.max_value);
  }
}

TEST_CASE("estimate_bounds_sampled reports degenerate instances") {
  // A frozen turbine range and no areas leave a single objective value.
  hydro::SystemInstance inst = resop::test::loose_instance(1, 0, 1);
  inst.reservoirs[0].turbine_flow_lo = 10.0;
  inst.reservoirs[0].turbine_flow_hi = 10.0;
  const ActionSpace space = ActionSpace::create(inst, 2, 2);
  CHECK_THROWS_AS(decomp::estimate_bounds_sampled(inst, space, 50, 7), DataError);
}
