#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "resop/decomposition.hpp"
#include "resop/hydro.hpp"
#include "resop/rng.hpp"

namespace resop::env {

// Categorical grids over the continuous decision ranges. K_p values per
// reservoir on [Qp_lo, Qp_hi]; K_s values per (area, period) on
// [0, W_max/dt]. Categorical heads give exact log-probabilities and an
// enumerable space for the optimality oracle.
class ActionSpace {
 public:
  static ActionSpace create(const hydro::SystemInstance& inst, int qp_bins, int qs_bins);

  int qp_bins() const { return qp_bins_; }
  int qs_bins() const { return qs_bins_; }

  double qp_value(int reservoir, int bin) const { return qp_grid_(reservoir, bin); }
  double qs_value(int area, int period, int bin) const { return qs_grid_((area), period, bin); }

 private:
  int qp_bins_ = 0, qs_bins_ = 0;
  Grid2<double> qp_grid_;  // [I][K_p]
  Grid3<double> qs_grid_;  // [J][T][K_s]
};

enum class StepKind : uint8_t { Power, SupplyFlag, SupplyAmount };

const char* step_kind_name(StepKind kind);

// Everything a policy may observe when asked for one action distribution.
// Quantities are raw (unnormalized); normalization conventions live with the
// policy.
struct StepContext {
  StepKind kind = StepKind::Power;
  int reservoir = -1;
  int area = -1;   // -1 for Power steps
  int period = -1;
  int arity = 0;   // K_p, 2, or K_s
  double elevation = 0.0;        // current L_{i,t}, updated within the period
  double distance_km = 0.0;      // l_{i,j}; supply steps only
  double delivered_water = 0.0;  // W_{j,t} from reservoirs decided earlier this period, m^3
};

struct DecisionStep {
  StepContext ctx;
  int chosen = -1;
  double log_prob = 0.0;
  double action_value = 0.0;  // grid value for Power/SupplyAmount, 0/1 for SupplyFlag
};

// Action-distribution oracle consulted by the rollout. Implementations must
// be safe for concurrent read-only evaluation across episodes.
class PolicyOracle {
 public:
  virtual ~PolicyOracle() = default;
  virtual void begin_episode(const hydro::SystemInstance& inst, const ActionSpace& space) {}
  // Must return ctx.arity probabilities summing to 1 (checked to 1e-6).
  virtual std::vector<double> action_probabilities(const StepContext& ctx) = 0;
  // Called once per step with the sampled (or greedy) choice.
  virtual void notify_chosen(const StepContext& ctx, int index) {}
};

// Uniform distribution at every step; the random policy of the reward-curve
// comparison and of rejection sampling.
class UniformPolicy : public PolicyOracle {
 public:
  std::vector<double> action_probabilities(const StepContext& ctx) override {
    return std::vector<double>(ctx.arity, 1.0 / ctx.arity);
  }
};

// Always assigns probability 1 to one fixed bin per step kind (tests).
class FixedBinPolicy : public PolicyOracle {
 public:
  FixedBinPolicy(int power_bin, int flag_bin, int amount_bin)
      : power_bin_(power_bin), flag_bin_(flag_bin), amount_bin_(amount_bin) {}
  std::vector<double> action_probabilities(const StepContext& ctx) override {
    std::vector<double> p(ctx.arity, 0.0);
    switch (ctx.kind) {
      case StepKind::Power: p[power_bin_] = 1.0; break;
      case StepKind::SupplyFlag: p[flag_bin_] = 1.0; break;
      case StepKind::SupplyAmount: p[amount_bin_] = 1.0; break;
    }
    return p;
  }

 private:
  int power_bin_, flag_bin_, amount_bin_;
};

struct RolloutResult {
  hydro::OperationSchedule schedule;
  std::vector<DecisionStep> steps;
  double total_log_prob = 0.0;
};

// Executes the decoder loop nest: periods outer, reservoirs middle, areas
// inner; power decided first, elevation updated by Q^p and Q^r, then per area
// a supply flag and, when the flag is set, a supply amount, elevation updated
// after each. The completed schedule is re-derived by hydro for scoring.
RolloutResult rollout(const hydro::SystemInstance& inst, const ActionSpace& space,
                      PolicyOracle& policy, Rng& rng);

// Identical control flow, argmax selection, ties broken toward the lower bin.
RolloutResult greedy_rollout(const hydro::SystemInstance& inst, const ActionSpace& space,
                             PolicyOracle& policy);

struct RewardOptions {
  // 0 keeps the hard rule: infeasible episodes score 0. Positive lambda
  // switches to reward minus lambda * total normalized violation.
  double soft_penalty_lambda = 0.0;
};

double episode_reward(const hydro::SystemInstance& inst, const hydro::OperationSchedule& sched,
                      const decomp::WeightVector& weights, const decomp::ObjectiveBounds& bounds,
                      const RewardOptions& options = {});

// One uniformly random schedule over the grids (flags fair coins).
hydro::Decisions random_grid_decisions(const hydro::SystemInstance& inst, const ActionSpace& space,
                                       Rng& rng);

// One row per decision step: kind, indices, chosen grid value, log-prob.
void write_trace_csv(std::ostream& os, const std::vector<DecisionStep>& steps);

}  // namespace resop::env
