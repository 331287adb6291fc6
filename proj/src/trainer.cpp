#include "resop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include "resop/error.hpp"
#include "resop/parallel.hpp"

namespace resop::train {

void TrainConfig::validate() const {
  if (batch_size < 1 || epochs < 1 || iterations_per_epoch < 1 || eval_batch < 2 ||
      grad_groups < 1)
    throw DataError("train config: counts must be positive (eval_batch >= 2)");
  if (lr_high <= 0.0 || lr_low <= 0.0) throw DataError("train config: learning rates must be > 0");
  if (lr_low > lr_high) throw DataError("train config: lr schedule must be nonincreasing");
  if (!(ttest_alpha > 0.0 && ttest_alpha < 1.0))
    throw DataError("train config: ttest_alpha must be in (0,1)");
}

double greedy_reward(const policy::PolicyModel& model, const hydro::SystemInstance& inst,
                     const env::ActionSpace& space, const decomp::WeightVector& weights,
                     const decomp::ObjectiveBounds& bounds, double soft_penalty_lambda) {
  policy::PolicyEpisode episode(model, /*record=*/false);
  const env::RolloutResult result = env::greedy_rollout(inst, space, episode);
  return env::episode_reward(inst, result.schedule, weights, bounds, {soft_penalty_lambda});
}

namespace {

policy::PolicyModel clone_model(const policy::PolicyModel& model) {
  policy::PolicyModel copy(model.instance(), model.space(), model.config(), model.seed());
  copy.params().restore_values(model.params().snapshot_values());
  return copy;
}

// Runs `batch_size` episodes split over a fixed number of contiguous groups.
// Groups may execute on different threads; episodes within a group run in
// order and gradients land in the group's own buffer, merged in group order
// afterwards, so the result is independent of the thread count.
template <class EpisodeFn>
void run_batch_grouped(int batch_size, int group_count, EpisodeFn&& fn) {
  const int chunk = (batch_size + group_count - 1) / group_count;
  parallel::for_each_index(group_count, [&](int g) {
    const int lo = g * chunk;
    const int hi = std::min(batch_size, lo + chunk);
    for (int b = lo; b < hi; ++b) fn(g, b);
  });
}

}  // namespace

TrainResult train_subproblem(const hydro::SystemInstance& inst, const env::ActionSpace& space,
                             const decomp::WeightVector& weights,
                             const decomp::ObjectiveBounds& bounds,
                             const policy::EncoderConfig& encoder_config,
                             const TrainConfig& config) {
  config.validate();
  bounds.validate();
  const env::RewardOptions reward_options{config.soft_penalty_lambda};

  policy::PolicyModel model(inst, space, encoder_config,
                            Rng::derive_seed(config.seed, 0x6d6f64656cULL));
  policy::PolicyModel baseline = clone_model(model);
  double baseline_reward =
      greedy_reward(baseline, inst, space, weights, bounds, config.soft_penalty_lambda);

  ad::Adam adam;
  const int group_count = std::min(config.grad_groups, config.batch_size);
  std::vector<ad::GradBuffer> group_buffers;
  group_buffers.reserve(group_count);
  for (int g = 0; g < group_count; ++g) group_buffers.emplace_back(model.params());

  TrainResult result{clone_model(model)};
  result.curve.reserve(static_cast<size_t>(config.epochs) * config.iterations_per_epoch);
  std::vector<double> last_good = model.params().snapshot_values();
  std::vector<double> rewards(config.batch_size, 0.0);
  int zero_streak = 0;

  for (int epoch = 0; epoch < config.epochs && !result.aborted; ++epoch) {
    const double lr = config.lr_for_epoch(epoch);
    for (int iter = 0; iter < config.iterations_per_epoch; ++iter) {
      const long global_iter = static_cast<long>(epoch) * config.iterations_per_epoch + iter;
      for (auto& buf : group_buffers) buf.clear();
      const double adv_scale = 1.0 / static_cast<double>(config.batch_size);

      run_batch_grouped(config.batch_size, group_count, [&](int group, int b) {
        Rng rng(Rng::derive_seed(config.seed, static_cast<uint64_t>(global_iter),
                                 static_cast<uint64_t>(b)));
        policy::PolicyEpisode episode(model, /*record=*/true);
        const env::RolloutResult rollout_result = env::rollout(inst, space, episode, rng);
        const double reward =
            env::episode_reward(inst, rollout_result.schedule, weights, bounds, reward_options);
        rewards[b] = reward;
        const double advantage = reward - baseline_reward;
        if (advantage != 0.0) {
          ad::Graph& g = episode.graph();
          const ad::Tensor loss = g.scale(episode.total_log_prob(), -advantage * adv_scale);
          g.backward(loss, group_buffers[group]);
        }
      });

      model.params().zero_grad();
      for (auto& buf : group_buffers) buf.add_into(model.params());
      adam.step(model.params(), lr);

      double mean_reward = 0.0;
      bool all_zero = true;
      for (double r : rewards) {
        mean_reward += r;
        all_zero &= (r == 0.0);
      }
      mean_reward *= adv_scale;
      result.curve.push_back(
          {epoch, static_cast<int>(global_iter), mean_reward, baseline_reward, lr});

      if (all_zero) {
        if (++zero_streak == config.zero_reward_warn_after) {
          std::ostringstream os;
          os << "warning: " << zero_streak
             << " consecutive all-zero-reward iterations; every sampled schedule is infeasible "
                "and the gradient is zero -- consider soft-penalty mode "
                "(soft_penalty_lambda > 0)";
          result.diagnostic = os.str();
          std::cerr << "[train] " << os.str() << "\n";
        }
      } else {
        zero_streak = 0;
      }

      if (!model.params().values_finite()) {
        model.params().restore_values(last_good);
        result.aborted = true;
        std::ostringstream os;
        os << "aborted: non-finite parameters after epoch " << epoch << " iteration " << iter
           << "; parameters restored to the last finite state";
        result.diagnostic = os.str();
        break;
      }
      last_good = model.params().snapshot_values();
    }

    if (result.aborted) break;

    // Epoch-end promotion: greedy decode both models over the eval batch and
    // run the paired one-sided test; identical decodes give zero variance and
    // the documented limit convention decides.
    const double learner_greedy =
        greedy_reward(model, inst, space, weights, bounds, config.soft_penalty_lambda);
    std::vector<double> learner_samples(config.eval_batch, learner_greedy);
    std::vector<double> baseline_samples(config.eval_batch, baseline_reward);
    const TTestResult tt = paired_t_test(learner_samples, baseline_samples, config.ttest_alpha);
    if (tt.significant) {
      baseline.params().restore_values(model.params().snapshot_values());
      baseline_reward = learner_greedy;
      ++result.baseline_swaps;
    }
  }

  result.final_greedy_reward =
      greedy_reward(model, inst, space, weights, bounds, config.soft_penalty_lambda);
  result.model = std::move(model);
  return result;
}

std::vector<SweepEntry> train_sweep(
    const hydro::SystemInstance& inst, const env::ActionSpace& space,
    const decomp::ObjectiveBounds& bounds, const policy::EncoderConfig& encoder_config,
    const TrainConfig& config,
    const std::function<void(const SweepEntry&, const policy::PolicyModel&)>& on_model) {
  const std::vector<decomp::WeightVector> grid = decomp::weight_grid();
  std::vector<SweepEntry> entries;
  entries.reserve(grid.size());
  for (size_t a = 0; a < grid.size(); ++a) {
    TrainConfig sub_config = config;
    sub_config.seed = Rng::derive_seed(config.seed, 0x7377656570ULL, a);
    SweepEntry entry;
    entry.index = static_cast<int>(a);
    entry.weights = grid[a];
    try {
      TrainResult trained = train_subproblem(inst, space, grid[a], bounds, encoder_config, sub_config);
      policy::PolicyEpisode episode(trained.model, /*record=*/false);
      const env::RolloutResult decoded = env::greedy_rollout(inst, space, episode);
      const hydro::FeasibilityReport report = hydro::check_constraints(inst, decoded.schedule);
      entry.feasible = report.feasible;
      entry.objectives = hydro::objective_triple(inst, decoded.schedule);
      entry.reward = env::episode_reward(inst, decoded.schedule, grid[a], bounds,
                                         {config.soft_penalty_lambda});
      entry.aborted = trained.aborted;
      entry.diagnostic = trained.diagnostic;
      if (!entry.feasible && entry.diagnostic.empty())
        entry.diagnostic = "greedy decode infeasible: " +
                           (report.violations.empty() ? std::string("(no detail)")
                                                      : report.violations.front().describe());
      if (on_model) on_model(entry, trained.model);
    } catch (const std::exception& e) {
      entry.aborted = true;
      entry.diagnostic = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

decomp::ObjectiveBounds estimate_bounds_trained(const hydro::SystemInstance& inst,
                                                const env::ActionSpace& space, int budget,
                                                uint64_t seed,
                                                const policy::EncoderConfig& encoder_config,
                                                const TrainConfig& config,
                                                const decomp::SampleBoundsOptions& opts) {
  if (budget < 1) throw ContractError("estimate_bounds: budget must be >= 1");

  // Phase 1: the same sampling pass (and seed streams) as the sampling
  // estimator, so these extrema contain what `sample` would report.
  std::vector<hydro::ObjectiveTriple> triples(budget);
  std::vector<uint8_t> feasible(budget, 0);
  parallel::for_each_index(budget, [&](int b) {
    Rng rng(Rng::derive_seed(seed, static_cast<uint64_t>(b)));
    const hydro::Decisions d = env::random_grid_decisions(inst, space, rng);
    const hydro::OperationSchedule sched = hydro::derive_trajectory(inst, d);
    if (hydro::check_constraints(inst, sched).feasible) {
      triples[b] = hydro::objective_triple(inst, sched);
      feasible[b] = 1;
    }
  });
  std::vector<hydro::ObjectiveTriple> kept;
  for (int b = 0; b < budget; ++b)
    if (feasible[b]) kept.push_back(triples[b]);
  if (kept.size() < 2)
    throw DataError("bound training: the seeding sample phase found fewer than 2 feasible "
                    "schedules within the budget");

  const auto stats_of = [&kept](auto proj) {
    double mean = 0.0;
    for (const auto& o : kept) mean += proj(o);
    mean /= static_cast<double>(kept.size());
    double ss = 0.0;
    for (const auto& o : kept) {
      const double d = proj(o) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(kept.size()));
    return std::pair<double, double>(mean, sd > 0.0 ? sd : 1.0);
  };

  // Phase 2: one maximizing and one minimizing REINFORCE pass per objective.
  // Rewards are z-scored against the sample statistics; infeasible episodes
  // contribute no gradient; the advantage baseline is the feasible batch
  // mean. Every feasible episode seen is unioned into the extrema.
  struct Task {
    int objective;  // 0 power, 1 aapfd, 2 water
    double sign;
  };
  const Task tasks[] = {{0, 1.0}, {0, -1.0}, {1, 1.0}, {1, -1.0}, {2, 1.0}, {2, -1.0}};
  auto component = [](const hydro::ObjectiveTriple& o, int k) {
    return k == 0 ? o.power : (k == 1 ? o.aapfd : o.water_revenue);
  };

  for (size_t task_index = 0; task_index < std::size(tasks); ++task_index) {
    const Task task = tasks[task_index];
    const auto [mean, sd] = stats_of([&](const hydro::ObjectiveTriple& o) {
      return component(o, task.objective);
    });
    policy::PolicyModel model(
        inst, space, encoder_config,
        Rng::derive_seed(seed, 0x626f756e64ULL, task_index));
    ad::Adam adam;
    const int group_count = std::min(config.grad_groups, config.batch_size);
    std::vector<ad::GradBuffer> buffers;
    for (int g = 0; g < group_count; ++g) buffers.emplace_back(model.params());

    struct EpisodeOut {
      double score = 0.0;
      bool feasible = false;
      hydro::ObjectiveTriple obj;
    };
    std::vector<EpisodeOut> outs(config.batch_size);
    std::vector<std::vector<ad::Tensor>> pending;  // unused; gradients applied in 2nd pass

    const int total_iters = config.epochs * config.iterations_per_epoch;
    for (int iter = 0; iter < total_iters; ++iter) {
      // Pass 1 (parallel): roll out, score, record log-prob graphs lazily by
      // re-rolling in pass 2 only for episodes with nonzero advantage would
      // double work; instead keep the episode graphs alive per group.
      std::vector<std::unique_ptr<policy::PolicyEpisode>> episodes(config.batch_size);
      run_batch_grouped(config.batch_size, group_count, [&](int, int b) {
        Rng rng(Rng::derive_seed(seed, 0x7461736bULL + task_index, iter, b));
        episodes[b] = std::make_unique<policy::PolicyEpisode>(model, /*record=*/true);
        const env::RolloutResult rr = env::rollout(inst, space, *episodes[b], rng);
        EpisodeOut out;
        out.feasible = hydro::check_constraints(inst, rr.schedule).feasible;
        if (out.feasible) {
          out.obj = hydro::objective_triple(inst, rr.schedule);
          out.score = task.sign * (component(out.obj, task.objective) - mean) / sd;
        }
        outs[b] = out;
      });

      double feasible_mean = 0.0;
      int feasible_count = 0;
      for (const auto& out : outs)
        if (out.feasible) {
          feasible_mean += out.score;
          ++feasible_count;
          kept.push_back(out.obj);
        }
      if (feasible_count == 0) continue;
      feasible_mean /= feasible_count;

      for (auto& buf : buffers) buf.clear();
      const double adv_scale = 1.0 / static_cast<double>(feasible_count);
      run_batch_grouped(config.batch_size, group_count, [&](int group, int b) {
        if (!outs[b].feasible) return;
        const double advantage = outs[b].score - feasible_mean;
        if (advantage == 0.0) return;
        ad::Graph& g = episodes[b]->graph();
        g.backward(g.scale(episodes[b]->total_log_prob(), -advantage * adv_scale),
                   buffers[group]);
      });
      model.params().zero_grad();
      for (auto& buf : buffers) buf.add_into(model.params());
      adam.step(model.params(), config.lr_for_epoch(iter / config.iterations_per_epoch));
      if (!model.params().values_finite())
        throw DataError("bound training diverged to non-finite parameters");
    }

    policy::PolicyEpisode greedy(model, /*record=*/false);
    const env::RolloutResult decoded = env::greedy_rollout(inst, space, greedy);
    if (hydro::check_constraints(inst, decoded.schedule).feasible)
      kept.push_back(hydro::objective_triple(inst, decoded.schedule));
  }

  return decomp::finalize_bounds(kept, opts, "trained", seed);
}

std::vector<double> random_feasible_rewards(const hydro::SystemInstance& inst,
                                            const env::ActionSpace& space,
                                            const decomp::WeightVector& weights,
                                            const decomp::ObjectiveBounds& bounds, int count,
                                            uint64_t seed, long max_attempts) {
  std::vector<double> rewards;
  rewards.reserve(count);
  Rng rng(seed);
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(rewards.size()) < count;
       ++attempt) {
    const hydro::Decisions d = env::random_grid_decisions(inst, space, rng);
    const hydro::OperationSchedule sched = hydro::derive_trajectory(inst, d);
    if (!hydro::check_constraints(inst, sched).feasible) continue;
    rewards.push_back(decomp::scalarize(hydro::objective_triple(inst, sched), weights, bounds));
  }
  if (static_cast<int>(rewards.size()) < count) {
    std::ostringstream os;
    os << "random_feasible_rewards: found only " << rewards.size() << " of " << count
       << " feasible schedules within " << max_attempts << " attempts";
    throw DataError(os.str());
  }
  return rewards;
}

void write_curve_csv(std::ostream& os, const std::vector<IterationRecord>& curve) {
  os.precision(17);
  os << "iteration,epoch,mean_reward,baseline_reward,lr\n";
  for (const auto& rec : curve)
    os << rec.iteration << ',' << rec.epoch << ',' << rec.mean_reward << ',' << rec.baseline_reward
       << ',' << rec.lr << '\n';
}

}  // namespace resop::train
