#include "resop/env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "resop/error.hpp"

namespace resop::env {

ActionSpace ActionSpace::create(const hydro::SystemInstance& inst, int qp_bins, int qs_bins) {
  if (qp_bins < 2 || qs_bins < 2)
    throw ContractError("ActionSpace: qp_bins and qs_bins must both be >= 2");
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  ActionSpace space;
  space.qp_bins_ = qp_bins;
  space.qs_bins_ = qs_bins;
  space.qp_grid_ = Grid2<double>(I, qp_bins);
  for (int i = 0; i < I; ++i) {
    const auto& r = inst.reservoirs[i];
    for (int k = 0; k < qp_bins; ++k) {
      const double f = static_cast<double>(k) / (qp_bins - 1);
      space.qp_grid_(i, k) = r.turbine_flow_lo + f * (r.turbine_flow_hi - r.turbine_flow_lo);
    }
    space.qp_grid_(i, qp_bins - 1) = r.turbine_flow_hi;  // endpoint exact
  }
  space.qs_grid_ = Grid3<double>(J, T, qs_bins);
  for (int j = 0; j < J; ++j)
    for (int t = 0; t < T; ++t) {
      const double cap = inst.areas[j].supply_max[t] / inst.period_seconds;
      for (int k = 0; k < qs_bins; ++k)
        space.qs_grid_(j, t, k) = cap * static_cast<double>(k) / (qs_bins - 1);
      space.qs_grid_(j, t, qs_bins - 1) = cap;
    }
  return space;
}

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Power: return "power";
    case StepKind::SupplyFlag: return "supply_flag";
    case StepKind::SupplyAmount: return "supply_amount";
  }
  return "?";
}

namespace {

void validate_probabilities(const std::vector<double>& probs, const StepContext& ctx) {
  if (static_cast<int>(probs.size()) != ctx.arity) {
    std::ostringstream os;
    os << "policy returned " << probs.size() << " probabilities for a " << step_kind_name(ctx.kind)
       << " step of arity " << ctx.arity;
    throw ContractError(os.str());
  }
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      std::ostringstream os;
      os << "policy returned an invalid probability " << p << " at a " << step_kind_name(ctx.kind)
         << " step";
      throw ContractError(os.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "policy probabilities sum to " << sum << " (must be 1 within 1e-6) at a "
       << step_kind_name(ctx.kind) << " step";
    throw ContractError(os.str());
  }
}

int argmax_lowest_tie(const std::vector<double>& probs) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(probs.size()); ++k)
    if (probs[k] > probs[best]) best = k;
  return best;
}

// Shared implementation of the sampled and greedy rollout: the Algorithm-1
// loop nest with selection injected.
template <class Select>
RolloutResult run_episode(const hydro::SystemInstance& inst, const ActionSpace& space,
                          PolicyOracle& policy, Select&& select) {
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  const double dt = inst.period_seconds;

  hydro::Decisions decisions = hydro::Decisions::zeros(inst);
  RolloutResult result;
  result.steps.reserve(static_cast<size_t>(T) * I * (1 + 2 * J));

  policy.begin_episode(inst, space);

  // Running storage per reservoir drives the elevation observations; the
  // final schedule is re-derived from the decisions alone.
  std::vector<double> storage(I);
  for (int i = 0; i < I; ++i) storage[i] = inst.reservoirs[i].initial_storage;
  auto observed_elevation = [&](int i) {
    const auto& curve = inst.reservoirs[i].curve;
    return curve.elevation_of_storage(
        std::clamp(storage[i], curve.storage_min(), curve.storage_max()));
  };

  Grid2<double> delivered(J, T, 0.0);  // W_{j,t}, m^3, from reservoirs already decided

  auto decide = [&](StepContext ctx) {
    auto probs = policy.action_probabilities(ctx);
    validate_probabilities(probs, ctx);
    const int chosen = select(probs);
    policy.notify_chosen(ctx, chosen);
    const double log_prob = std::log(probs[chosen]);
    result.total_log_prob += log_prob;
    result.steps.push_back({ctx, chosen, log_prob, 0.0});
    return chosen;
  };

  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < I; ++i) {
      const auto& r = inst.reservoirs[i];

      StepContext power_ctx;
      power_ctx.kind = StepKind::Power;
      power_ctx.reservoir = i;
      power_ctx.period = t;
      power_ctx.arity = space.qp_bins();
      power_ctx.elevation = observed_elevation(i);
      const int qp_bin = decide(power_ctx);
      const double qp = space.qp_value(i, qp_bin);
      decisions.turbine_flow(i, t) = qp;
      result.steps.back().action_value = qp;
      storage[i] += (r.inflow[t] - qp) * dt;

      for (int j = 0; j < J; ++j) {
        StepContext flag_ctx;
        flag_ctx.kind = StepKind::SupplyFlag;
        flag_ctx.reservoir = i;
        flag_ctx.area = j;
        flag_ctx.period = t;
        flag_ctx.arity = 2;
        flag_ctx.elevation = observed_elevation(i);
        flag_ctx.distance_km = inst.areas[j].distance_km[i];
        flag_ctx.delivered_water = delivered(j, t);
        const int flag = decide(flag_ctx);
        decisions.supply_flag(i, j, t) = static_cast<uint8_t>(flag);
        result.steps.back().action_value = flag;

        if (flag != 0) {
          StepContext amount_ctx = flag_ctx;
          amount_ctx.kind = StepKind::SupplyAmount;
          amount_ctx.arity = space.qs_bins();
          const int qs_bin = decide(amount_ctx);
          const double qs = space.qs_value(j, t, qs_bin);
          decisions.supply_flow(i, j, t) = qs;
          result.steps.back().action_value = qs;
          storage[i] -= qs * dt;
          delivered(j, t) += qs * dt;
        }
      }
    }
  }

  result.schedule = hydro::derive_trajectory(inst, std::move(decisions));
  return result;
}

}  // namespace

RolloutResult rollout(const hydro::SystemInstance& inst, const ActionSpace& space,
                      PolicyOracle& policy, Rng& rng) {
  return run_episode(inst, space, policy,
                     [&rng](const std::vector<double>& probs) { return rng.sample_categorical(probs); });
}

RolloutResult greedy_rollout(const hydro::SystemInstance& inst, const ActionSpace& space,
                             PolicyOracle& policy) {
  return run_episode(inst, space, policy, argmax_lowest_tie);
}

double episode_reward(const hydro::SystemInstance& inst, const hydro::OperationSchedule& sched,
                      const decomp::WeightVector& weights, const decomp::ObjectiveBounds& bounds,
                      const RewardOptions& options) {
  const hydro::FeasibilityReport report = hydro::check_constraints(inst, sched);
  if (report.feasible) return decomp::scalarize(hydro::objective_triple(inst, sched), weights, bounds);
  if (options.soft_penalty_lambda > 0.0)
    return decomp::scalarize(hydro::objective_triple(inst, sched), weights, bounds) -
           options.soft_penalty_lambda * report.total_normalized_violation;
  return 0.0;
}

hydro::Decisions random_grid_decisions(const hydro::SystemInstance& inst, const ActionSpace& space,
                                       Rng& rng) {
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  hydro::Decisions d = hydro::Decisions::zeros(inst);
  for (int i = 0; i < I; ++i)
    for (int t = 0; t < T; ++t) d.turbine_flow(i, t) = space.qp_value(i, rng.uniform_index(space.qp_bins()));
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      for (int t = 0; t < T; ++t) {
        const int flag = rng.uniform_index(2);
        d.supply_flag(i, j, t) = static_cast<uint8_t>(flag);
        d.supply_flow(i, j, t) = flag ? space.qs_value(j, t, rng.uniform_index(space.qs_bins())) : 0.0;
      }
  return d;
}

void write_trace_csv(std::ostream& os, const std::vector<DecisionStep>& steps) {
  os.precision(17);
  os << "kind,reservoir,area,period,chosen,action_value,log_prob\n";
  for (const auto& s : steps) {
    os << step_kind_name(s.ctx.kind) << ',' << s.ctx.reservoir << ','
       << (s.ctx.area < 0 ? std::string("") : std::to_string(s.ctx.area)) << ',' << s.ctx.period + 1
       << ',' << s.chosen << ',' << s.action_value << ',' << s.log_prob << '\n';
  }
}

}  // namespace resop::env
