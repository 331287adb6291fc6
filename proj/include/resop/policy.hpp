#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "resop/autodiff.hpp"
#include "resop/env.hpp"
#include "resop/hydro.hpp"

namespace resop::policy {

// Two-stage: static entity information is embedded and self-attended first,
// the dynamic state (elevation, delivered water, distance) is fused in by a
// linear+relu layer at decode time. Direct: raw static and dynamic inputs are
// concatenated into the encoder tokens and the stack reruns at every step.
enum class EncoderVariant { TwoStage, Direct };

std::string variant_name(EncoderVariant v);
EncoderVariant variant_from_name(const std::string& name);

struct EncoderConfig {
  int embedding_size = 128;
  int num_heads = 8;
  int num_blocks = 1;  // attention + feed-forward blocks stacked per encoder
  EncoderVariant variant = EncoderVariant::TwoStage;

  void validate() const;  // embedding_size divisible by num_heads
};

// Per-instance min-max feature scaling; raw physical inputs mix m^3/s, m and
// km, which destabilizes training unnormalized.
struct InstanceScalers {
  double res_lo[3] = {}, res_hi[3] = {};    // [p_min, p_max, inflow] over (i,t)
  double area_lo[2] = {}, area_hi[2] = {};  // [w_min, w_max] over (j,t)
  double dist_lo = 0.0, dist_hi = 0.0;      // l_{i,j} over (i,j)

  static InstanceScalers compute(const hydro::SystemInstance& inst);
  static double minmax(double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.0;
  }
};

class PolicyGraphBuilder;

// The policy network: per-entity encoders with multi-head self-attention
// across periods, plus three categorical output heads (turbine flow bin,
// supply flag, supply-flow bin). All parameters live in one ParameterStore
// and appear in checkpoints.
class PolicyModel {
 public:
  PolicyModel(const hydro::SystemInstance& inst, const env::ActionSpace& space,
              EncoderConfig config, uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  const hydro::SystemInstance& instance() const { return *inst_; }
  const env::ActionSpace& space() const { return *space_; }
  const InstanceScalers& scalers() const { return scalers_; }
  uint64_t seed() const { return seed_; }

  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  // Static encoder outputs (two-stage variant): per reservoir/area a [T, d]
  // value matrix. The direct variant has no static embeddings.
  std::vector<std::vector<double>> encode_reservoirs() const;  // [I] of T*d row-major
  std::vector<std::vector<double>> encode_areas() const;       // [J] of T*d row-major

  // Distribution values without gradient tracking.
  std::vector<double> power_distribution(int reservoir, int period, double elevation) const;
  std::vector<double> supply_flag_distribution(int reservoir, int area, int period,
                                               double elevation, double delivered_water) const;
  std::vector<double> supply_amount_distribution(int reservoir, int area, int period,
                                                 double elevation, double delivered_water) const;

  double normalized_elevation(int reservoir, int period, double elevation) const;
  double normalized_distance(double distance_km) const;
  double normalized_delivered(int area, int period, double delivered_water) const;

  void save_checkpoint(std::ostream& os,
                       const std::map<std::string, std::string>& extra_meta = {}) const;
  void save_checkpoint(const std::string& path,
                       const std::map<std::string, std::string>& extra_meta = {}) const;
  // Rebuilds a model against the given instance/space; the checkpoint header
  // pins variant and dimensions and must agree with both.
  static PolicyModel load_checkpoint(std::istream& is, const hydro::SystemInstance& inst,
                                     const env::ActionSpace& space);
  static PolicyModel load_checkpoint(const std::string& path, const hydro::SystemInstance& inst,
                                     const env::ActionSpace& space);

 private:
  friend class PolicyGraphBuilder;
  struct BlockIds {
    std::vector<int> wq, wk, wv;  // per head
    int wo = -1, bo = -1;
    int ff_w1 = -1, ff_b1 = -1, ff_w2 = -1, ff_b2 = -1;
  };
  struct EncoderIds {
    int embed_w = -1, embed_b = -1;
    std::vector<BlockIds> blocks;
  };

  void register_encoder(EncoderIds& ids, const std::string& prefix, int input_width, Rng& rng);

  const hydro::SystemInstance* inst_;
  const env::ActionSpace* space_;
  EncoderConfig config_;
  InstanceScalers scalers_;
  uint64_t seed_;
  ad::ParameterStore params_;

  EncoderIds res_encoder_, area_encoder_;
  int fuse_power_w_ = -1, fuse_power_b_ = -1;   // two-stage only
  int fuse_supply_w_ = -1, fuse_supply_b_ = -1; // two-stage only
  int head_power_w_ = -1, head_power_b_ = -1;
  int head_flag_w_ = -1, head_flag_b_ = -1;
  int head_amount_w_ = -1, head_amount_b_ = -1;
};

// Builds per-step action distributions inside one autodiff graph. Two-stage
// static embeddings are constructed lazily once per builder and shared by all
// steps, so gradients flow through the encoders exactly once per episode.
class PolicyGraphBuilder {
 public:
  explicit PolicyGraphBuilder(const PolicyModel& model);

  ad::Tensor distribution(const env::StepContext& ctx);
  ad::Graph& graph() { return graph_; }

  // Static embedding tensors (two-stage only; builds them on demand).
  ad::Tensor reservoir_embedding(int reservoir);
  ad::Tensor area_embedding(int area);

 private:
  ad::Tensor encoder_stack(ad::Tensor tokens, const PolicyModel::EncoderIds& ids);
  ad::Tensor reservoir_tokens_static(int reservoir);
  ad::Tensor area_tokens_static(int area);

  const PolicyModel& model_;
  ad::Graph graph_;
  std::vector<std::optional<ad::Tensor>> res_cache_, area_cache_;
};

// PolicyOracle adapter running the model inside a fresh graph per episode.
// With recording enabled, the chosen log-probability node of every step is
// kept so the episode's REINFORCE loss can be backpropagated.
class PolicyEpisode : public env::PolicyOracle {
 public:
  explicit PolicyEpisode(const PolicyModel& model, bool record = false);

  void begin_episode(const hydro::SystemInstance& inst, const env::ActionSpace& space) override;
  std::vector<double> action_probabilities(const env::StepContext& ctx) override;
  void notify_chosen(const env::StepContext& ctx, int index) override;

  ad::Tensor total_log_prob();  // scalar; requires recording and >= 1 step
  ad::Graph& graph() { return builder_->graph(); }

 private:
  const PolicyModel& model_;
  bool record_;
  std::unique_ptr<PolicyGraphBuilder> builder_;
  ad::Tensor last_distribution_;
  std::vector<ad::Tensor> chosen_log_probs_;
};

// Recomputes the summed log-probability of an already-recorded action
// sequence as a pure function of the parameters (finite-difference probes).
double replay_log_prob(const PolicyModel& model, const std::vector<env::DecisionStep>& steps);
ad::Tensor replay_log_prob_graph(PolicyGraphBuilder& builder,
                                 const std::vector<env::DecisionStep>& steps);

}  // namespace resop::policy
