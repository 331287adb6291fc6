#include "resop/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resop/error.hpp"

namespace resop::policy {

std::string variant_name(EncoderVariant v) {
  return v == EncoderVariant::TwoStage ? "two_stage" : "direct";
}

EncoderVariant variant_from_name(const std::string& name) {
  if (name == "two_stage") return EncoderVariant::TwoStage;
  if (name == "direct") return EncoderVariant::Direct;
  throw DataError("unknown encoder variant '" + name + "' (expected two_stage or direct)");
}

void EncoderConfig::validate() const {
  if (embedding_size < 1 || num_heads < 1 || num_blocks < 1)
    throw DataError("encoder config: sizes must be positive");
  if (embedding_size % num_heads != 0)
    throw DataError("encoder config: embedding_size " + std::to_string(embedding_size) +
                    " not divisible by num_heads " + std::to_string(num_heads));
}

InstanceScalers InstanceScalers::compute(const hydro::SystemInstance& inst) {
  InstanceScalers s;
  auto init = [](double* lo, double* hi, int n) {
    for (int k = 0; k < n; ++k) {
      lo[k] = std::numeric_limits<double>::infinity();
      hi[k] = -std::numeric_limits<double>::infinity();
    }
  };
  auto feed = [](double* lo, double* hi, int k, double v) {
    lo[k] = std::min(lo[k], v);
    hi[k] = std::max(hi[k], v);
  };
  init(s.res_lo, s.res_hi, 3);
  init(s.area_lo, s.area_hi, 2);
  s.dist_lo = std::numeric_limits<double>::infinity();
  s.dist_hi = -s.dist_lo;
  for (const auto& r : inst.reservoirs)
    for (int t = 0; t < inst.horizon; ++t) {
      feed(s.res_lo, s.res_hi, 0, r.power_min[t]);
      feed(s.res_lo, s.res_hi, 1, r.power_max[t]);
      feed(s.res_lo, s.res_hi, 2, r.inflow[t]);
    }
  for (const auto& a : inst.areas) {
    for (int t = 0; t < inst.horizon; ++t) {
      feed(s.area_lo, s.area_hi, 0, a.supply_min[t]);
      feed(s.area_lo, s.area_hi, 1, a.supply_max[t]);
    }
    for (double d : a.distance_km) {
      s.dist_lo = std::min(s.dist_lo, d);
      s.dist_hi = std::max(s.dist_hi, d);
    }
  }
  if (inst.areas.empty()) s.dist_lo = s.dist_hi = 0.0;
  return s;
}

// --- PolicyModel ---

void PolicyModel::register_encoder(EncoderIds& ids, const std::string& prefix, int input_width,
                                   Rng& rng) {
  const int d = config_.embedding_size;
  const int dh = d / config_.num_heads;
  ids.embed_w = params_.add(prefix + ".embed.W", input_width, d, input_width, rng);
  ids.embed_b = params_.add(prefix + ".embed.b", 1, d, input_width, rng);
  ids.blocks.resize(config_.num_blocks);
  for (int b = 0; b < config_.num_blocks; ++b) {
    BlockIds& blk = ids.blocks[b];
    const std::string bp = prefix + ".block" + std::to_string(b);
    for (int h = 0; h < config_.num_heads; ++h) {
      const std::string hp = bp + ".head" + std::to_string(h);
      blk.wq.push_back(params_.add(hp + ".Wq", d, dh, d, rng));
      blk.wk.push_back(params_.add(hp + ".Wk", d, dh, d, rng));
      blk.wv.push_back(params_.add(hp + ".Wv", d, dh, d, rng));
    }
    blk.wo = params_.add(bp + ".Wo", d, d, d, rng);
    blk.bo = params_.add(bp + ".bo", 1, d, d, rng);
    blk.ff_w1 = params_.add(bp + ".ff.W1", d, d, d, rng);
    blk.ff_b1 = params_.add(bp + ".ff.b1", 1, d, d, rng);
    blk.ff_w2 = params_.add(bp + ".ff.W2", d, d, d, rng);
    blk.ff_b2 = params_.add(bp + ".ff.b2", 1, d, d, rng);
  }
}

PolicyModel::PolicyModel(const hydro::SystemInstance& inst, const env::ActionSpace& space,
                         EncoderConfig config, uint64_t seed)
    : inst_(&inst), space_(&space), config_(config), seed_(seed) {
  config_.validate();
  scalers_ = InstanceScalers::compute(inst);
  Rng rng(seed);
  const int d = config_.embedding_size;
  const bool two_stage = config_.variant == EncoderVariant::TwoStage;

  // Token widths: static features only for the two-stage encoders; the direct
  // encoders take the dynamic state inside the tokens.
  register_encoder(res_encoder_, "res", two_stage ? 3 : 4, rng);
  register_encoder(area_encoder_, "area", two_stage ? 2 : 5, rng);

  if (two_stage) {
    fuse_power_w_ = params_.add("fuse_power.W", d + 1, d, d + 1, rng);
    fuse_power_b_ = params_.add("fuse_power.b", 1, d, d + 1, rng);
    fuse_supply_w_ = params_.add("fuse_supply.W", d + 3, d, d + 3, rng);
    fuse_supply_b_ = params_.add("fuse_supply.b", 1, d, d + 3, rng);
  }
  head_power_w_ = params_.add("head_power.W", d, space.qp_bins(), d, rng);
  head_power_b_ = params_.add("head_power.b", 1, space.qp_bins(), d, rng);
  head_flag_w_ = params_.add("head_flag.W", d, 2, d, rng);
  head_flag_b_ = params_.add("head_flag.b", 1, 2, d, rng);
  head_amount_w_ = params_.add("head_amount.W", d, space.qs_bins(), d, rng);
  head_amount_b_ = params_.add("head_amount.b", 1, space.qs_bins(), d, rng);
}

double PolicyModel::normalized_elevation(int reservoir, int period, double elevation) const {
  const auto& r = inst_->reservoirs[reservoir];
  const double lo = r.elevation_min[period], hi = r.elevation_max[period];
  return hi > lo ? (elevation - lo) / (hi - lo) : 0.0;
}

double PolicyModel::normalized_distance(double distance_km) const {
  return InstanceScalers::minmax(distance_km, scalers_.dist_lo, scalers_.dist_hi);
}

double PolicyModel::normalized_delivered(int area, int period, double delivered_water) const {
  const double cap = inst_->areas[area].supply_max[period];
  return cap > 0.0 ? delivered_water / cap : 0.0;
}

std::vector<std::vector<double>> PolicyModel::encode_reservoirs() const {
  if (config_.variant != EncoderVariant::TwoStage)
    throw ContractError("encode_reservoirs: the direct variant has no static embeddings");
  PolicyGraphBuilder builder(*this);
  std::vector<std::vector<double>> out;
  out.reserve(inst_->num_reservoirs());
  for (int i = 0; i < inst_->num_reservoirs(); ++i)
    out.push_back(builder.reservoir_embedding(i).values());
  return out;
}

std::vector<std::vector<double>> PolicyModel::encode_areas() const {
  if (config_.variant != EncoderVariant::TwoStage)
    throw ContractError("encode_areas: the direct variant has no static embeddings");
  PolicyGraphBuilder builder(*this);
  std::vector<std::vector<double>> out;
  out.reserve(inst_->num_areas());
  for (int j = 0; j < inst_->num_areas(); ++j) out.push_back(builder.area_embedding(j).values());
  return out;
}

std::vector<double> PolicyModel::power_distribution(int reservoir, int period,
                                                    double elevation) const {
  PolicyGraphBuilder builder(*this);
  env::StepContext ctx;
  ctx.kind = env::StepKind::Power;
  ctx.reservoir = reservoir;
  ctx.period = period;
  ctx.arity = space_->qp_bins();
  ctx.elevation = elevation;
  return builder.distribution(ctx).values();
}

std::vector<double> PolicyModel::supply_flag_distribution(int reservoir, int area, int period,
                                                          double elevation,
                                                          double delivered_water) const {
  PolicyGraphBuilder builder(*this);
  env::StepContext ctx;
  ctx.kind = env::StepKind::SupplyFlag;
  ctx.reservoir = reservoir;
  ctx.area = area;
  ctx.period = period;
  ctx.arity = 2;
  ctx.elevation = elevation;
  ctx.distance_km = inst_->areas[area].distance_km[reservoir];
  ctx.delivered_water = delivered_water;
  return builder.distribution(ctx).values();
}

std::vector<double> PolicyModel::supply_amount_distribution(int reservoir, int area, int period,
                                                            double elevation,
                                                            double delivered_water) const {
  PolicyGraphBuilder builder(*this);
  env::StepContext ctx;
  ctx.kind = env::StepKind::SupplyAmount;
  ctx.reservoir = reservoir;
  ctx.area = area;
  ctx.period = period;
  ctx.arity = space_->qs_bins();
  ctx.elevation = elevation;
  ctx.distance_km = inst_->areas[area].distance_km[reservoir];
  ctx.delivered_water = delivered_water;
  return builder.distribution(ctx).values();
}

void PolicyModel::save_checkpoint(std::ostream& os,
                                  const std::map<std::string, std::string>& extra_meta) const {
  std::map<std::string, std::string> meta = extra_meta;
  meta["variant"] = variant_name(config_.variant);
  meta["embedding_size"] = std::to_string(config_.embedding_size);
  meta["num_heads"] = std::to_string(config_.num_heads);
  meta["num_blocks"] = std::to_string(config_.num_blocks);
  meta["qp_bins"] = std::to_string(space_->qp_bins());
  meta["qs_bins"] = std::to_string(space_->qs_bins());
  meta["reservoirs"] = std::to_string(inst_->num_reservoirs());
  meta["areas"] = std::to_string(inst_->num_areas());
  meta["horizon"] = std::to_string(inst_->horizon);
  meta["seed"] = std::to_string(seed_);
  params_.save(os, meta);
}

void PolicyModel::save_checkpoint(const std::string& path,
                                  const std::map<std::string, std::string>& extra_meta) const {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  save_checkpoint(os, extra_meta);
}

PolicyModel PolicyModel::load_checkpoint(std::istream& is, const hydro::SystemInstance& inst,
                                         const env::ActionSpace& space) {
  auto [store, meta] = ad::ParameterStore::load(is);
  auto need = [&meta](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw DataError("checkpoint: missing meta key '" + key + "'");
    return it->second;
  };
  EncoderConfig config;
  config.variant = variant_from_name(need("variant"));
  config.embedding_size = std::stoi(need("embedding_size"));
  config.num_heads = std::stoi(need("num_heads"));
  config.num_blocks = std::stoi(need("num_blocks"));
  auto check_dim = [&](const std::string& key, int expected) {
    const int got = std::stoi(need(key));
    if (got != expected)
      throw DataError("checkpoint " + key + " = " + std::to_string(got) +
                      " does not match the loaded instance/action space (" +
                      std::to_string(expected) + ")");
  };
  check_dim("qp_bins", space.qp_bins());
  check_dim("qs_bins", space.qs_bins());
  check_dim("reservoirs", inst.num_reservoirs());
  check_dim("areas", inst.num_areas());
  check_dim("horizon", inst.horizon);

  PolicyModel model(inst, space, config, std::stoull(need("seed")));
  if (store.count() != model.params_.count())
    throw DataError("checkpoint parameter count does not match the " +
                    variant_name(config.variant) + " layout");
  for (int k = 0; k < store.count(); ++k) {
    const auto& src = store.at(k);
    const int dst_id = model.params_.find(src.name);
    if (dst_id < 0) throw DataError("checkpoint: unexpected tensor '" + src.name + "'");
    auto& dst = model.params_.at(dst_id);
    if (src.rows != dst.rows || src.cols != dst.cols)
      throw DataError("checkpoint tensor '" + src.name + "' has the wrong shape");
    dst.values = src.values;
  }
  return model;
}

PolicyModel PolicyModel::load_checkpoint(const std::string& path,
                                         const hydro::SystemInstance& inst,
                                         const env::ActionSpace& space) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  return load_checkpoint(is, inst, space);
}

// --- PolicyGraphBuilder ---

PolicyGraphBuilder::PolicyGraphBuilder(const PolicyModel& model)
    : model_(model), graph_(model.params()) {
  res_cache_.resize(model.instance().num_reservoirs());
  area_cache_.resize(model.instance().num_areas());
}

ad::Tensor PolicyGraphBuilder::encoder_stack(ad::Tensor tokens,
                                             const PolicyModel::EncoderIds& ids) {
  const auto& cfg = model_.config();
  const int dh = cfg.embedding_size / cfg.num_heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  ad::Graph& g = graph_;

  ad::Tensor x = g.add_rowvec(g.matmul(tokens, g.param(ids.embed_w)), g.param(ids.embed_b));
  for (const auto& blk : ids.blocks) {
    std::vector<ad::Tensor> head_outputs;
    head_outputs.reserve(cfg.num_heads);
    for (int h = 0; h < cfg.num_heads; ++h) {
      ad::Tensor q = g.matmul(x, g.param(blk.wq[h]));
      ad::Tensor k = g.matmul(x, g.param(blk.wk[h]));
      ad::Tensor v = g.matmul(x, g.param(blk.wv[h]));
      ad::Tensor attn = g.softmax_rows(g.scale(g.matmul(q, g.transpose(k)), score_scale));
      head_outputs.push_back(g.matmul(attn, v));
    }
    ad::Tensor merged =
        g.add_rowvec(g.matmul(g.concat_cols(head_outputs), g.param(blk.wo)), g.param(blk.bo));
    ad::Tensor h1 = g.add(x, merged);
    ad::Tensor ff = g.add_rowvec(
        g.matmul(g.relu(g.add_rowvec(g.matmul(h1, g.param(blk.ff_w1)), g.param(blk.ff_b1))),
                 g.param(blk.ff_w2)),
        g.param(blk.ff_b2));
    x = g.add(h1, ff);
  }
  return x;
}

ad::Tensor PolicyGraphBuilder::reservoir_tokens_static(int reservoir) {
  const auto& inst = model_.instance();
  const auto& s = model_.scalers();
  const auto& r = inst.reservoirs[reservoir];
  const int T = inst.horizon;
  std::vector<double> tokens(static_cast<size_t>(T) * 3);
  for (int t = 0; t < T; ++t) {
    tokens[t * 3 + 0] = InstanceScalers::minmax(r.power_min[t], s.res_lo[0], s.res_hi[0]);
    tokens[t * 3 + 1] = InstanceScalers::minmax(r.power_max[t], s.res_lo[1], s.res_hi[1]);
    tokens[t * 3 + 2] = InstanceScalers::minmax(r.inflow[t], s.res_lo[2], s.res_hi[2]);
  }
  return graph_.constant(T, 3, std::move(tokens));
}

ad::Tensor PolicyGraphBuilder::area_tokens_static(int area) {
  const auto& inst = model_.instance();
  const auto& s = model_.scalers();
  const auto& a = inst.areas[area];
  const int T = inst.horizon;
  std::vector<double> tokens(static_cast<size_t>(T) * 2);
  for (int t = 0; t < T; ++t) {
    tokens[t * 2 + 0] = InstanceScalers::minmax(a.supply_min[t], s.area_lo[0], s.area_hi[0]);
    tokens[t * 2 + 1] = InstanceScalers::minmax(a.supply_max[t], s.area_lo[1], s.area_hi[1]);
  }
  return graph_.constant(T, 2, std::move(tokens));
}

ad::Tensor PolicyGraphBuilder::reservoir_embedding(int reservoir) {
  if (model_.config().variant != EncoderVariant::TwoStage)
    throw ContractError("reservoir_embedding: direct variant has no static embeddings");
  if (!res_cache_[reservoir])
    res_cache_[reservoir] = encoder_stack(reservoir_tokens_static(reservoir), model_.res_encoder_);
  return *res_cache_[reservoir];
}

ad::Tensor PolicyGraphBuilder::area_embedding(int area) {
  if (model_.config().variant != EncoderVariant::TwoStage)
    throw ContractError("area_embedding: direct variant has no static embeddings");
  if (!area_cache_[area])
    area_cache_[area] = encoder_stack(area_tokens_static(area), model_.area_encoder_);
  return *area_cache_[area];
}

ad::Tensor PolicyGraphBuilder::distribution(const env::StepContext& ctx) {
  const auto& inst = model_.instance();
  const auto& s = model_.scalers();
  ad::Graph& g = graph_;
  const bool power_step = ctx.kind == env::StepKind::Power;
  const double lnorm = model_.normalized_elevation(ctx.reservoir, ctx.period, ctx.elevation);

  int head_w = -1, head_b = -1;
  switch (ctx.kind) {
    case env::StepKind::Power: head_w = model_.head_power_w_; head_b = model_.head_power_b_; break;
    case env::StepKind::SupplyFlag: head_w = model_.head_flag_w_; head_b = model_.head_flag_b_; break;
    case env::StepKind::SupplyAmount:
      head_w = model_.head_amount_w_;
      head_b = model_.head_amount_b_;
      break;
  }

  ad::Tensor features;  // [1, d]
  if (model_.config().variant == EncoderVariant::TwoStage) {
    if (power_step) {
      ad::Tensor token = g.gather_rows(reservoir_embedding(ctx.reservoir), {ctx.period});
      ad::Tensor fused = g.concat_cols({token, g.row({lnorm})});
      features = g.relu(g.add_rowvec(g.matmul(fused, g.param(model_.fuse_power_w_)),
                                     g.param(model_.fuse_power_b_)));
    } else {
      ad::Tensor token = g.gather_rows(area_embedding(ctx.area), {ctx.period});
      const double dnorm = model_.normalized_distance(ctx.distance_km);
      const double wnorm = model_.normalized_delivered(ctx.area, ctx.period, ctx.delivered_water);
      ad::Tensor fused = g.concat_cols({token, g.row({lnorm, dnorm, wnorm})});
      features = g.relu(g.add_rowvec(g.matmul(fused, g.param(model_.fuse_supply_w_)),
                                     g.param(model_.fuse_supply_b_)));
    }
  } else {
    // Direct embedding: dynamic state rides inside the encoder tokens and the
    // stack reruns for the current step.
    const int T = inst.horizon;
    if (power_step) {
      const auto& r = inst.reservoirs[ctx.reservoir];
      std::vector<double> tokens(static_cast<size_t>(T) * 4);
      for (int t = 0; t < T; ++t) {
        tokens[t * 4 + 0] = InstanceScalers::minmax(r.power_min[t], s.res_lo[0], s.res_hi[0]);
        tokens[t * 4 + 1] = InstanceScalers::minmax(r.power_max[t], s.res_lo[1], s.res_hi[1]);
        tokens[t * 4 + 2] = InstanceScalers::minmax(r.inflow[t], s.res_lo[2], s.res_hi[2]);
        tokens[t * 4 + 3] = lnorm;
      }
      ad::Tensor enc = encoder_stack(g.constant(T, 4, std::move(tokens)), model_.res_encoder_);
      features = g.gather_rows(enc, {ctx.period});
    } else {
      const auto& a = inst.areas[ctx.area];
      const double dnorm = model_.normalized_distance(ctx.distance_km);
      const double wnorm = model_.normalized_delivered(ctx.area, ctx.period, ctx.delivered_water);
      std::vector<double> tokens(static_cast<size_t>(T) * 5);
      for (int t = 0; t < T; ++t) {
        tokens[t * 5 + 0] = InstanceScalers::minmax(a.supply_min[t], s.area_lo[0], s.area_hi[0]);
        tokens[t * 5 + 1] = InstanceScalers::minmax(a.supply_max[t], s.area_lo[1], s.area_hi[1]);
        tokens[t * 5 + 2] = lnorm;
        tokens[t * 5 + 3] = dnorm;
        tokens[t * 5 + 4] = wnorm;
      }
      ad::Tensor enc = encoder_stack(g.constant(T, 5, std::move(tokens)), model_.area_encoder_);
      features = g.gather_rows(enc, {ctx.period});
    }
  }
  return g.softmax_rows(g.add_rowvec(g.matmul(features, g.param(head_w)), g.param(head_b)));
}

// --- PolicyEpisode ---

PolicyEpisode::PolicyEpisode(const PolicyModel& model, bool record)
    : model_(model), record_(record), builder_(std::make_unique<PolicyGraphBuilder>(model)) {}

void PolicyEpisode::begin_episode(const hydro::SystemInstance&, const env::ActionSpace&) {
  builder_ = std::make_unique<PolicyGraphBuilder>(model_);
  chosen_log_probs_.clear();
  last_distribution_ = ad::Tensor();
}

std::vector<double> PolicyEpisode::action_probabilities(const env::StepContext& ctx) {
  last_distribution_ = builder_->distribution(ctx);
  return last_distribution_.values();
}

void PolicyEpisode::notify_chosen(const env::StepContext&, int index) {
  if (!record_) return;
  ad::Graph& g = builder_->graph();
  chosen_log_probs_.push_back(g.log_op(g.pick(last_distribution_, 0, index)));
}

ad::Tensor PolicyEpisode::total_log_prob() {
  if (!record_) throw ContractError("total_log_prob: episode was not recording");
  if (chosen_log_probs_.empty()) throw ContractError("total_log_prob: no steps recorded");
  return builder_->graph().sum_all(builder_->graph().concat_cols(chosen_log_probs_));
}

// --- replay ---

ad::Tensor replay_log_prob_graph(PolicyGraphBuilder& builder,
                                 const std::vector<env::DecisionStep>& steps) {
  if (steps.empty()) throw ContractError("replay_log_prob: empty step list");
  ad::Graph& g = builder.graph();
  std::vector<ad::Tensor> log_probs;
  log_probs.reserve(steps.size());
  for (const auto& step : steps)
    log_probs.push_back(g.log_op(g.pick(builder.distribution(step.ctx), 0, step.chosen)));
  return g.sum_all(g.concat_cols(log_probs));
}

double replay_log_prob(const PolicyModel& model, const std::vector<env::DecisionStep>& steps) {
  PolicyGraphBuilder builder(model);
  return replay_log_prob_graph(builder, steps).scalar();
}

}  // namespace resop::policy
