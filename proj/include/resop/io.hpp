#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "resop/hydro.hpp"
#include "resop/moea.hpp"
#include "resop/policy.hpp"
#include "resop/trainer.hpp"

namespace resop::io {

// --- dataset directory ---
// reservoir_static.csv: id,A,v_beg,tailwater,qp_lo,qp_hi
// reservoirs.csv:       id,t,qr,qe,l_min,l_max,p_min,p_max   (t = 1..T per id)
// curves.csv:           id,storage,elevation                 (>= 2 rows per id)
// areas.csv:            id,t,w_min,w_max,b
// links.csv:            reservoir_id,area_id,t,distance,c    (distance constant per pair)
// All numeric fields are decimal text; a header row is required; UTF-8.
// The period length is system-wide and comes from the run config.
hydro::SystemInstance load_instance(const std::string& dir, double period_seconds);

struct InstanceSummary {
  int reservoirs = 0;
  int areas = 0;
  int horizon = 0;
  double period_seconds = 0.0;
};
InstanceSummary summarize(const hydro::SystemInstance& inst);

// --- run configuration (JSON) ---
struct Config {
  std::string dataset;
  double period_seconds = 2592000.0;  // 30-day months
  int qp_bins = 51;
  int qs_bins = 51;
  policy::EncoderConfig encoder;
  train::TrainConfig train;
  moea::MoeaConfig moea;
  std::string bounds_method = "sample";
  int bounds_budget = 2000;
  double bounds_widen_fraction = 0.05;
  std::string bounds_path = "bounds.txt";
  uint64_t seed = 42;
  double soft_penalty_lambda = 0.0;
  bool parallel = true;
  nlohmann::json raw;  // verbatim snapshot for run metadata
};

Config load_config(const std::string& path);
Config config_from_json(const nlohmann::json& j);

// --- front CSV: method,weight_or_rank,power,aapfd,water_revenue,feasible,seed ---
struct FrontRow {
  std::string method;
  std::string weight_or_rank;
  hydro::ObjectiveTriple objectives;
  bool feasible = true;
  uint64_t seed = 0;
};

void write_front_csv(const std::string& path, const std::vector<FrontRow>& rows);
std::vector<FrontRow> read_front_csv(const std::string& path);

// --- schedule CSV: reservoir,area,period,qp,x,qs,storage,elevation,power ---
void write_schedule_csv(const std::string& path, const hydro::SystemInstance& inst,
                        const hydro::OperationSchedule& sched);
hydro::Decisions read_schedule_csv(const std::string& path, const hydro::SystemInstance& inst);

// --- output hygiene ---
// Temp-file-plus-rename so partially written outputs never appear.
void write_text_atomic(const std::string& path, const std::string& content);
// Sidecar "<output>.meta.json" with the command, seed, and config snapshot;
// content is deterministic (no timestamps).
void write_run_meta(const std::string& output_path, const std::string& command,
                    const Config& config, const nlohmann::json& extra = {});

}  // namespace resop::io
