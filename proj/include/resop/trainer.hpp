#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "resop/bounds.hpp"
#include "resop/decomposition.hpp"
#include "resop/env.hpp"
#include "resop/policy.hpp"
#include "resop/stats.hpp"

namespace resop::train {

using stats::paired_t_test;
using stats::TTestResult;

struct TrainConfig {
  int batch_size = 128;
  int epochs = 5;
  int iterations_per_epoch = 200;
  double lr_high = 1e-3;  // epochs before lr_switch_epoch
  double lr_low = 1e-4;   // epochs at or after it
  int lr_switch_epoch = 3;
  double ttest_alpha = 0.05;
  int eval_batch = 16;  // paired episodes in the epoch-end baseline test
  uint64_t seed = 1;
  double soft_penalty_lambda = 0.0;  // 0 keeps the hard zero-reward rule
  // Episode gradients accumulate into this many fixed buffers merged in
  // order, so results are independent of the number of OpenMP threads.
  int grad_groups = 8;
  int zero_reward_warn_after = 50;

  void validate() const;
  double lr_for_epoch(int epoch) const { return epoch < lr_switch_epoch ? lr_high : lr_low; }
};

struct IterationRecord {
  int epoch = 0;
  int iteration = 0;  // global, 0-based
  double mean_reward = 0.0;
  double baseline_reward = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  policy::PolicyModel model;
  std::vector<IterationRecord> curve;
  int baseline_swaps = 0;
  double final_greedy_reward = 0.0;
  bool aborted = false;
  std::string diagnostic;  // set when aborted or when zero-reward streaks occurred
};

// REINFORCE with a greedy-decoded frozen baseline (advantage = episode reward
// minus the baseline model's greedy reward), Adam with the scheduled learning
// rate, and a paired one-sided t-test at each epoch end that promotes the
// learner into the baseline on significance.
TrainResult train_subproblem(const hydro::SystemInstance& inst, const env::ActionSpace& space,
                             const decomp::WeightVector& weights,
                             const decomp::ObjectiveBounds& bounds,
                             const policy::EncoderConfig& encoder_config,
                             const TrainConfig& config);

struct SweepEntry {
  int index = 0;
  decomp::WeightVector weights;
  bool feasible = false;  // greedy decode of the trained model passed the checks
  hydro::ObjectiveTriple objectives;
  double reward = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

// Trains one subproblem per weight vector (seed derived per index), greedy
// decodes each final model, and records its objective triple. Per-subproblem
// failures are recorded, not propagated. The callback, when given, receives
// each trained model right after its entry is final (checkpoint writing).
std::vector<SweepEntry> train_sweep(
    const hydro::SystemInstance& inst, const env::ActionSpace& space,
    const decomp::ObjectiveBounds& bounds, const policy::EncoderConfig& encoder_config,
    const TrainConfig& config,
    const std::function<void(const SweepEntry&, const policy::PolicyModel&)>& on_model = {});

// Objective extrema via single-objective training: seeds with the same random
// sample phase as the sampling estimator (so its bounds always contain the
// sampled ones for equal seeds), then runs one maximizing and one minimizing
// REINFORCE pass per objective, unioning every feasible episode seen plus the
// greedy decodes into the extrema before widening.
decomp::ObjectiveBounds estimate_bounds_trained(const hydro::SystemInstance& inst,
                                                const env::ActionSpace& space, int budget,
                                                uint64_t seed,
                                                const policy::EncoderConfig& encoder_config,
                                                const TrainConfig& config,
                                                const decomp::SampleBoundsOptions& opts = {});

// Rewards of `count` random feasible schedules (uniform over the grids,
// infeasible draws rejected). Throws DataError when attempts run out.
std::vector<double> random_feasible_rewards(const hydro::SystemInstance& inst,
                                            const env::ActionSpace& space,
                                            const decomp::WeightVector& weights,
                                            const decomp::ObjectiveBounds& bounds, int count,
                                            uint64_t seed, long max_attempts);

// Greedy-decode reward of a model under the given weights/bounds.
double greedy_reward(const policy::PolicyModel& model, const hydro::SystemInstance& inst,
                     const env::ActionSpace& space, const decomp::WeightVector& weights,
                     const decomp::ObjectiveBounds& bounds, double soft_penalty_lambda = 0.0);

void write_curve_csv(std::ostream& os, const std::vector<IterationRecord>& curve);

}  // namespace resop::train
