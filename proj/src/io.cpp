#include "resop/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "resop/error.hpp"

namespace fs = std::filesystem;

namespace resop::io {

namespace {

struct Csv {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;  // 1-based source line per row

  int column(const std::string& name) const {
    for (size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return static_cast<int>(c);
    throw DataError(path + ": missing required column '" + name + "'");
  }
  const std::string& cell(int row, int col) const { return rows[row][col]; }
  std::string where(int row) const { return path + ":" + std::to_string(lines[row]); }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.erase(c.begin());
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t')) c.pop_back();
  }
  return cells;
}

Csv read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  Csv csv;
  csv.path = path;
  std::string line;
  int line_number = 0;
  while (std::getline(is, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (csv.header.empty()) {
      csv.header = std::move(cells);
      continue;
    }
    if (cells.size() != csv.header.size())
      throw DataError(path + ":" + std::to_string(line_number) + ": expected " +
                      std::to_string(csv.header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    csv.rows.push_back(std::move(cells));
    csv.lines.push_back(line_number);
  }
  if (csv.header.empty()) throw DataError(path + ": missing header row");
  return csv;
}

double num(const Csv& csv, int row, int col) {
  const std::string& cell = csv.cell(row, col);
  try {
    size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError(csv.where(row) + ": '" + cell + "' in column '" + csv.header[col] +
                    "' is not a number");
  }
}

int int_num(const Csv& csv, int row, int col) {
  const double v = num(csv, row, col);
  const int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 0)
    throw DataError(csv.where(row) + ": expected an integer in column '" + csv.header[col] + "'");
  return i;
}

// Ordered id -> index map preserving first appearance.
struct IdIndex {
  std::vector<std::string> ids;
  int lookup(const std::string& id) const {
    for (size_t k = 0; k < ids.size(); ++k)
      if (ids[k] == id) return static_cast<int>(k);
    return -1;
  }
  int insert(const std::string& id) {
    const int existing = lookup(id);
    if (existing >= 0) return existing;
    ids.push_back(id);
    return static_cast<int>(ids.size()) - 1;
  }
};

}  // namespace

hydro::SystemInstance load_instance(const std::string& dir, double period_seconds) {
  if (period_seconds <= 0.0) throw DataError("period_seconds must be positive");
  const fs::path base(dir);
  const Csv statics = read_csv((base / "reservoir_static.csv").string());
  const Csv per_period = read_csv((base / "reservoirs.csv").string());
  const Csv curves = read_csv((base / "curves.csv").string());
  const Csv areas_csv = read_csv((base / "areas.csv").string());
  const Csv links = read_csv((base / "links.csv").string());

  hydro::SystemInstance inst;
  inst.period_seconds = period_seconds;

  // Reservoir order follows reservoir_static.csv.
  IdIndex res_ids;
  {
    const int c_id = statics.column("id");
    const int c_a = statics.column("A");
    const int c_vbeg = statics.column("v_beg");
    const int c_tail = statics.column("tailwater");
    const int c_lo = statics.column("qp_lo");
    const int c_hi = statics.column("qp_hi");
    for (size_t r = 0; r < statics.rows.size(); ++r) {
      const std::string id = statics.cell(r, c_id);
      if (res_ids.lookup(id) >= 0)
        throw DataError(statics.where(r) + ": duplicate reservoir id '" + id + "'");
      res_ids.insert(id);
      hydro::ReservoirSpec spec;
      spec.id = id;
      spec.power_coefficient = num(statics, r, c_a);
      spec.initial_storage = num(statics, r, c_vbeg);
      spec.tailwater_elevation = num(statics, r, c_tail);
      spec.turbine_flow_lo = num(statics, r, c_lo);
      spec.turbine_flow_hi = num(statics, r, c_hi);
      inst.reservoirs.push_back(std::move(spec));
    }
  }
  if (inst.reservoirs.empty()) throw DataError(statics.path + ": no reservoirs");

  // Horizon is the maximum period index seen; every series must cover 1..T.
  int horizon = 0;
  {
    const int c_t = per_period.column("t");
    for (size_t r = 0; r < per_period.rows.size(); ++r)
      horizon = std::max(horizon, int_num(per_period, r, c_t));
  }
  if (horizon < 1) throw DataError(per_period.path + ": no periods");
  inst.horizon = horizon;

  {
    const int c_id = per_period.column("id");
    const int c_t = per_period.column("t");
    const int c_qr = per_period.column("qr");
    const int c_qe = per_period.column("qe");
    const int c_lmin = per_period.column("l_min");
    const int c_lmax = per_period.column("l_max");
    const int c_pmin = per_period.column("p_min");
    const int c_pmax = per_period.column("p_max");
    for (auto& spec : inst.reservoirs) {
      spec.inflow.assign(horizon, std::nan(""));
      spec.eco_flow.assign(horizon, std::nan(""));
      spec.elevation_min.assign(horizon, std::nan(""));
      spec.elevation_max.assign(horizon, std::nan(""));
      spec.power_min.assign(horizon, std::nan(""));
      spec.power_max.assign(horizon, std::nan(""));
    }
    for (size_t r = 0; r < per_period.rows.size(); ++r) {
      const int i = res_ids.lookup(per_period.cell(r, c_id));
      if (i < 0)
        throw DataError(per_period.where(r) + ": unknown reservoir id '" +
                        per_period.cell(r, c_id) + "'");
      const int t = int_num(per_period, r, c_t);
      if (t < 1 || t > horizon)
        throw DataError(per_period.where(r) + ": period " + std::to_string(t) +
                        " outside 1.." + std::to_string(horizon));
      auto& spec = inst.reservoirs[i];
      if (!std::isnan(spec.inflow[t - 1]))
        throw DataError(per_period.where(r) + ": duplicate (id, t) row");
      spec.inflow[t - 1] = num(per_period, r, c_qr);
      spec.eco_flow[t - 1] = num(per_period, r, c_qe);
      spec.elevation_min[t - 1] = num(per_period, r, c_lmin);
      spec.elevation_max[t - 1] = num(per_period, r, c_lmax);
      spec.power_min[t - 1] = num(per_period, r, c_pmin);
      spec.power_max[t - 1] = num(per_period, r, c_pmax);
    }
    for (const auto& spec : inst.reservoirs)
      for (int t = 0; t < horizon; ++t)
        if (std::isnan(spec.inflow[t]))
          throw DataError(per_period.path + ": reservoir '" + spec.id + "' missing period " +
                          std::to_string(t + 1));
  }

  {
    const int c_id = curves.column("id");
    const int c_storage = curves.column("storage");
    const int c_elev = curves.column("elevation");
    std::vector<std::vector<hydro::CurvePoint>> points(inst.reservoirs.size());
    for (size_t r = 0; r < curves.rows.size(); ++r) {
      const int i = res_ids.lookup(curves.cell(r, c_id));
      if (i < 0)
        throw DataError(curves.where(r) + ": unknown reservoir id '" + curves.cell(r, c_id) + "'");
      points[i].push_back({num(curves, r, c_storage), num(curves, r, c_elev)});
    }
    for (size_t i = 0; i < inst.reservoirs.size(); ++i) {
      if (points[i].size() < 2)
        throw DataError(curves.path + ": reservoir '" + inst.reservoirs[i].id +
                        "' needs at least 2 curve points");
      inst.reservoirs[i].curve =
          hydro::ElevationStorageCurve(std::move(points[i]), inst.reservoirs[i].id);
    }
  }

  // Area order follows first appearance in areas.csv.
  IdIndex area_ids;
  {
    const int c_id = areas_csv.column("id");
    const int c_t = areas_csv.column("t");
    const int c_wmin = areas_csv.column("w_min");
    const int c_wmax = areas_csv.column("w_max");
    const int c_b = areas_csv.column("b");
    for (size_t r = 0; r < areas_csv.rows.size(); ++r) {
      const std::string id = areas_csv.cell(r, c_id);
      const int j = area_ids.insert(id);
      if (j == static_cast<int>(inst.areas.size())) {
        hydro::AreaSpec area;
        area.id = id;
        area.supply_min.assign(horizon, std::nan(""));
        area.supply_max.assign(horizon, std::nan(""));
        area.benefit.assign(horizon, std::nan(""));
        area.distance_km.assign(inst.reservoirs.size(), std::nan(""));
        area.cost = Grid2<double>(static_cast<int>(inst.reservoirs.size()), horizon,
                                  std::nan(""));
        inst.areas.push_back(std::move(area));
      }
      const int t = int_num(areas_csv, r, c_t);
      if (t < 1 || t > horizon)
        throw DataError(areas_csv.where(r) + ": period " + std::to_string(t) + " outside 1.." +
                        std::to_string(horizon));
      auto& area = inst.areas[j];
      if (!std::isnan(area.supply_min[t - 1]))
        throw DataError(areas_csv.where(r) + ": duplicate (id, t) row");
      area.supply_min[t - 1] = num(areas_csv, r, c_wmin);
      area.supply_max[t - 1] = num(areas_csv, r, c_wmax);
      area.benefit[t - 1] = num(areas_csv, r, c_b);
    }
    for (const auto& area : inst.areas)
      for (int t = 0; t < horizon; ++t)
        if (std::isnan(area.supply_min[t]))
          throw DataError(areas_csv.path + ": area '" + area.id + "' missing period " +
                          std::to_string(t + 1));
  }

  {
    const int c_res = links.column("reservoir_id");
    const int c_area = links.column("area_id");
    const int c_t = links.column("t");
    const int c_dist = links.column("distance");
    const int c_cost = links.column("c");
    for (size_t r = 0; r < links.rows.size(); ++r) {
      const int i = res_ids.lookup(links.cell(r, c_res));
      if (i < 0)
        throw DataError(links.where(r) + ": unknown reservoir id '" + links.cell(r, c_res) + "'");
      const int j = area_ids.lookup(links.cell(r, c_area));
      if (j < 0)
        throw DataError(links.where(r) + ": unknown area id '" + links.cell(r, c_area) + "'");
      const int t = int_num(links, r, c_t);
      if (t < 1 || t > horizon)
        throw DataError(links.where(r) + ": period outside 1.." + std::to_string(horizon));
      auto& area = inst.areas[j];
      const double distance = num(links, r, c_dist);
      if (std::isnan(area.distance_km[i])) {
        area.distance_km[i] = distance;
      } else if (area.distance_km[i] != distance) {
        throw DataError(links.where(r) + ": distance differs from an earlier row for the same "
                        "(reservoir, area) pair");
      }
      if (!std::isnan(area.cost(i, t - 1)))
        throw DataError(links.where(r) + ": duplicate (reservoir, area, t) row");
      area.cost(i, t - 1) = num(links, r, c_cost);
    }
    for (const auto& area : inst.areas)
      for (size_t i = 0; i < inst.reservoirs.size(); ++i) {
        if (std::isnan(area.distance_km[i]))
          throw DataError(links.path + ": no link rows for reservoir '" + inst.reservoirs[i].id +
                          "' and area '" + area.id + "'");
        for (int t = 0; t < horizon; ++t)
          if (std::isnan(area.cost(static_cast<int>(i), t)))
            throw DataError(links.path + ": missing cost for reservoir '" +
                            inst.reservoirs[i].id + "', area '" + area.id + "', period " +
                            std::to_string(t + 1));
      }
  }

  inst.validate();
  return inst;
}

InstanceSummary summarize(const hydro::SystemInstance& inst) {
  return {inst.num_reservoirs(), inst.num_areas(), inst.horizon, inst.period_seconds};
}

Config config_from_json(const nlohmann::json& j) {
  Config config;
  config.raw = j;
  if (!j.contains("dataset")) throw DataError("config: missing 'dataset'");
  config.dataset = j.at("dataset").get<std::string>();
  config.period_seconds = j.value("period_seconds", config.period_seconds);
  if (j.contains("action_space")) {
    const auto& a = j.at("action_space");
    config.qp_bins = a.value("qp_bins", config.qp_bins);
    config.qs_bins = a.value("qs_bins", config.qs_bins);
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    config.encoder.embedding_size = e.value("embedding_size", config.encoder.embedding_size);
    config.encoder.num_heads = e.value("num_heads", config.encoder.num_heads);
    config.encoder.num_blocks = e.value("num_blocks", config.encoder.num_blocks);
    if (e.contains("variant"))
      config.encoder.variant = policy::variant_from_name(e.at("variant").get<std::string>());
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    auto& tc = config.train;
    tc.batch_size = t.value("batch_size", tc.batch_size);
    tc.epochs = t.value("epochs", tc.epochs);
    tc.iterations_per_epoch = t.value("iterations_per_epoch", tc.iterations_per_epoch);
    tc.lr_high = t.value("lr_high", tc.lr_high);
    tc.lr_low = t.value("lr_low", tc.lr_low);
    tc.lr_switch_epoch = t.value("lr_switch_epoch", tc.lr_switch_epoch);
    tc.ttest_alpha = t.value("ttest_alpha", tc.ttest_alpha);
    tc.eval_batch = t.value("eval_batch", tc.eval_batch);
    tc.grad_groups = t.value("grad_groups", tc.grad_groups);
    tc.zero_reward_warn_after = t.value("zero_reward_warn_after", tc.zero_reward_warn_after);
  }
  if (j.contains("moea")) {
    const auto& m = j.at("moea");
    auto& mc = config.moea;
    mc.population = m.value("population", mc.population);
    mc.generations = m.value("generations", mc.generations);
    mc.crossover_prob = m.value("crossover_prob", mc.crossover_prob);
    mc.mutation_prob = m.value("mutation_prob", mc.mutation_prob);
    mc.sbx_eta = m.value("sbx_eta", mc.sbx_eta);
    mc.mutation_eta = m.value("mutation_eta", mc.mutation_eta);
    mc.neighborhood = m.value("neighborhood", mc.neighborhood);
    mc.update_prob = m.value("update_prob", mc.update_prob);
  }
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    config.bounds_method = b.value("method", config.bounds_method);
    config.bounds_budget = b.value("budget", config.bounds_budget);
    config.bounds_widen_fraction = b.value("widen_fraction", config.bounds_widen_fraction);
    config.bounds_path = b.value("path", config.bounds_path);
  }
  config.seed = j.value("seed", config.seed);
  config.soft_penalty_lambda = j.value("soft_penalty_lambda", config.soft_penalty_lambda);
  config.parallel = j.value("parallel", config.parallel);
  config.train.seed = config.seed;
  config.train.soft_penalty_lambda = config.soft_penalty_lambda;
  if (config.bounds_method != "sample" && config.bounds_method != "train")
    throw DataError("config: bounds.method must be 'sample' or 'train'");
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open config: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void write_front_csv(const std::string& path, const std::vector<FrontRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "method,weight_or_rank,power,aapfd,water_revenue,feasible,seed\n";
  for (const auto& row : rows)
    os << row.method << ',' << row.weight_or_rank << ',' << row.objectives.power << ','
       << row.objectives.aapfd << ',' << row.objectives.water_revenue << ','
       << (row.feasible ? 1 : 0) << ',' << row.seed << '\n';
  write_text_atomic(path, os.str());
}

std::vector<FrontRow> read_front_csv(const std::string& path) {
  const Csv csv = read_csv(path);
  const int c_method = csv.column("method");
  const int c_weight = csv.column("weight_or_rank");
  const int c_power = csv.column("power");
  const int c_aapfd = csv.column("aapfd");
  const int c_water = csv.column("water_revenue");
  const int c_feasible = csv.column("feasible");
  const int c_seed = csv.column("seed");
  std::vector<FrontRow> rows;
  rows.reserve(csv.rows.size());
  for (size_t r = 0; r < csv.rows.size(); ++r) {
    FrontRow row;
    row.method = csv.cell(r, c_method);
    row.weight_or_rank = csv.cell(r, c_weight);
    row.objectives = {num(csv, r, c_power), num(csv, r, c_aapfd), num(csv, r, c_water)};
    row.feasible = int_num(csv, r, c_feasible) != 0;
    row.seed = static_cast<uint64_t>(num(csv, r, c_seed));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_schedule_csv(const std::string& path, const hydro::SystemInstance& inst,
                        const hydro::OperationSchedule& sched) {
  const int I = inst.num_reservoirs(), J = inst.num_areas(), T = inst.horizon;
  std::ostringstream os;
  os.precision(17);
  os << "reservoir,area,period,qp,x,qs,storage,elevation,power\n";
  for (int i = 0; i < I; ++i) {
    for (int t = 0; t < T; ++t) {
      if (J == 0) {
        os << inst.reservoirs[i].id << ",," << t + 1 << ','
           << sched.decisions.turbine_flow(i, t) << ",0,0,"
           << sched.storage(i, t) << ',' << sched.elevation(i, t) << ',' << sched.power(i, t)
           << '\n';
        continue;
      }
      for (int j = 0; j < J; ++j)
        os << inst.reservoirs[i].id << ',' << inst.areas[j].id << ',' << t + 1 << ','
           << sched.decisions.turbine_flow(i, t) << ','
           << static_cast<int>(sched.decisions.supply_flag(i, j, t)) << ','
           << sched.decisions.supply_flow(i, j, t) << ',' << sched.storage(i, t) << ','
           << sched.elevation(i, t) << ',' << sched.power(i, t) << '\n';
    }
  }
  write_text_atomic(path, os.str());
}

hydro::Decisions read_schedule_csv(const std::string& path, const hydro::SystemInstance& inst) {
  const Csv csv = read_csv(path);
  const int c_res = csv.column("reservoir");
  const int c_area = csv.column("area");
  const int c_period = csv.column("period");
  const int c_qp = csv.column("qp");
  const int c_x = csv.column("x");
  const int c_qs = csv.column("qs");
  hydro::Decisions d = hydro::Decisions::zeros(inst);
  auto res_index = [&inst](const std::string& id) {
    for (int i = 0; i < inst.num_reservoirs(); ++i)
      if (inst.reservoirs[i].id == id) return i;
    return -1;
  };
  auto area_index = [&inst](const std::string& id) {
    for (int j = 0; j < inst.num_areas(); ++j)
      if (inst.areas[j].id == id) return j;
    return -1;
  };
  for (size_t r = 0; r < csv.rows.size(); ++r) {
    const int i = res_index(csv.cell(r, c_res));
    if (i < 0) throw DataError(csv.where(r) + ": unknown reservoir '" + csv.cell(r, c_res) + "'");
    const std::string area_id = csv.cell(r, c_area);
    const int t = int_num(csv, r, c_period);
    if (t < 1 || t > inst.horizon)
      throw DataError(csv.where(r) + ": period outside 1.." + std::to_string(inst.horizon));
    d.turbine_flow(i, t - 1) = num(csv, r, c_qp);
    if (!area_id.empty()) {
      const int j = area_index(area_id);
      if (j < 0) throw DataError(csv.where(r) + ": unknown area '" + area_id + "'");
      const int flag = int_num(csv, r, c_x);
      if (flag != 0 && flag != 1) throw DataError(csv.where(r) + ": x must be 0 or 1");
      d.supply_flag(i, j, t - 1) = static_cast<uint8_t>(flag);
      const double qs = num(csv, r, c_qs);
      if (flag == 0 && qs != 0.0)
        throw DataError(csv.where(r) + ": x = 0 requires qs = 0");
      d.supply_flow(i, j, t - 1) = qs;
    }
  }
  return d;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open for writing: " + tmp.string());
    os << content;
    if (!os) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_run_meta(const std::string& output_path, const std::string& command,
                    const Config& config, const nlohmann::json& extra) {
  nlohmann::json meta;
  meta["command"] = command;
  meta["seed"] = config.seed;
  meta["config"] = config.raw;
  if (!extra.is_null()) meta["result"] = extra;
  write_text_atomic(output_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace resop::io
