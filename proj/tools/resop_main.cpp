// resop: multiobjective multireservoir operation optimizer.
//
// Subcommands: validate, bounds, train, sweep, moea, pareto, evaluate,
// export-plots. Every output gets a deterministic <output>.meta.json sidecar
// with the command, seed, and config snapshot.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "resop/bounds.hpp"
#include "resop/error.hpp"
#include "resop/io.hpp"
#include "resop/moea.hpp"
#include "resop/parallel.hpp"
#include "resop/pareto.hpp"
#include "resop/trainer.hpp"

namespace fs = std::filesystem;
using namespace resop;

namespace {

constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct Loaded {
  io::Config config;
  hydro::SystemInstance instance;
  env::ActionSpace space;
};

Loaded load_run(const std::string& config_path) {
  io::Config config = io::load_config(config_path);
  parallel::set_enabled(config.parallel);
  hydro::SystemInstance inst = io::load_instance(config.dataset, config.period_seconds);
  env::ActionSpace space = env::ActionSpace::create(inst, config.qp_bins, config.qs_bins);
  return {std::move(config), std::move(inst), std::move(space)};
}

decomp::WeightVector parse_weights(const std::string& text) {
  std::istringstream is(text);
  double w1, w2, w3;
  char c1, c2;
  if (!(is >> w1 >> c1 >> w2 >> c2 >> w3) || c1 != ',' || c2 != ',')
    throw DataError("--weights expects three comma-separated numbers, e.g. 0.5,0.25,0.25");
  const decomp::WeightVector w{w1, w2, w3};
  if (std::abs(w.sum() - 1.0) > 1e-9)
    throw DataError("--weights must sum to 1 (got " + std::to_string(w.sum()) + ")");
  if (w1 < 0 || w2 < 0 || w3 < 0) throw DataError("--weights must be nonnegative");
  return w;
}

decomp::ObjectiveBounds load_or_make_bounds(const Loaded& run, const std::string& explicit_path) {
  const std::string path = explicit_path.empty() ? run.config.bounds_path : explicit_path;
  if (fs::exists(path)) return decomp::read_bounds_file(path);
  std::cerr << "[resop] bounds file '" << path << "' not found; sampling with budget "
            << run.config.bounds_budget << "\n";
  decomp::SampleBoundsOptions opts;
  opts.widen_fraction = run.config.bounds_widen_fraction;
  decomp::ObjectiveBounds bounds = decomp::estimate_bounds_sampled(
      run.instance, run.space, run.config.bounds_budget, run.config.seed, opts);
  decomp::write_bounds_file(path, bounds);
  return bounds;
}

std::string weight_label(const decomp::WeightVector& w) {
  std::ostringstream os;
  os.precision(6);
  os << w.w1 << '/' << w.w2 << '/' << w.w3;
  return os.str();
}

int cmd_validate(const std::string& dataset, double period_seconds) {
  const hydro::SystemInstance inst = io::load_instance(dataset, period_seconds);
  const io::InstanceSummary s = io::summarize(inst);
  std::cout << "dataset OK: " << dataset << "\n"
            << "  reservoirs (I) = " << s.reservoirs << "\n"
            << "  areas      (J) = " << s.areas << "\n"
            << "  periods    (T) = " << s.horizon << "\n"
            << "  period_seconds = " << s.period_seconds << "\n";
  for (const auto& r : inst.reservoirs)
    std::cout << "  reservoir '" << r.id << "': curve range [" << r.curve.elevation_min() << ", "
              << r.curve.elevation_max() << "] m, turbine flow [" << r.turbine_flow_lo << ", "
              << r.turbine_flow_hi << "] m^3/s\n";
  std::cout << "all type invariants hold\n";
  return 0;
}

int cmd_bounds(const std::string& config_path, std::string method, int budget_override,
               std::string out) {
  Loaded run = load_run(config_path);
  if (method.empty()) method = run.config.bounds_method;
  const int budget = budget_override > 0 ? budget_override : run.config.bounds_budget;
  if (out.empty()) out = run.config.bounds_path;
  decomp::SampleBoundsOptions opts;
  opts.widen_fraction = run.config.bounds_widen_fraction;

  decomp::ObjectiveBounds bounds;
  if (method == "sample") {
    bounds = decomp::estimate_bounds_sampled(run.instance, run.space, budget, run.config.seed, opts);
  } else if (method == "train") {
    bounds = train::estimate_bounds_trained(run.instance, run.space, budget, run.config.seed,
                                            run.config.encoder, run.config.train, opts);
  } else {
    throw DataError("bounds method must be 'sample' or 'train'");
  }
  decomp::write_bounds_file(out, bounds);
  io::write_run_meta(out, "bounds --method " + method, run.config);
  std::cout << "bounds written to " << out << "\n";
  std::ostringstream preview;
  decomp::write_bounds_file(preview, bounds);
  std::cout << preview.str();
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& weights_text,
              const std::string& variant_override, std::string out_dir) {
  Loaded run = load_run(config_path);
  const decomp::WeightVector weights = parse_weights(weights_text);
  if (!variant_override.empty())
    run.config.encoder.variant = policy::variant_from_name(variant_override);
  if (out_dir.empty()) out_dir = "runs/train";
  fs::create_directories(out_dir);

  const decomp::ObjectiveBounds bounds = load_or_make_bounds(run, "");
  train::TrainResult result = train::train_subproblem(run.instance, run.space, weights, bounds,
                                                      run.config.encoder, run.config.train);

  const std::string checkpoint_path = (fs::path(out_dir) / "checkpoint.txt").string();
  {
    std::ostringstream os;
    result.model.save_checkpoint(os, {{"weights", weight_label(weights)}});
    io::write_text_atomic(checkpoint_path, os.str());
  }
  {
    std::ostringstream os;
    train::write_curve_csv(os, result.curve);
    io::write_text_atomic((fs::path(out_dir) / "curve.csv").string(), os.str());
  }
  nlohmann::json extra;
  extra["final_greedy_reward"] = result.final_greedy_reward;
  extra["baseline_swaps"] = result.baseline_swaps;
  extra["aborted"] = result.aborted;
  if (!result.diagnostic.empty()) extra["diagnostic"] = result.diagnostic;
  io::write_run_meta(checkpoint_path, "train --weights " + weights_text, run.config, extra);

  std::cout << "trained " << policy::variant_name(run.config.encoder.variant) << " policy for weights "
            << weight_label(weights) << "\n"
            << "  final greedy reward: " << result.final_greedy_reward << "\n"
            << "  baseline swaps: " << result.baseline_swaps << "\n"
            << "  checkpoint: " << checkpoint_path << "\n";
  if (result.aborted) {
    std::cerr << "training aborted: " << result.diagnostic << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, std::string out_dir, bool skip_checkpoints) {
  Loaded run = load_run(config_path);
  if (out_dir.empty()) out_dir = "runs/sweep";
  fs::create_directories(out_dir);
  const decomp::ObjectiveBounds bounds = load_or_make_bounds(run, "");

  std::vector<io::FrontRow> rows;
  const std::string method =
      run.config.encoder.variant == policy::EncoderVariant::TwoStage ? "two_stage_tdrl"
                                                                     : "direct_tdrl";
  auto on_model = [&](const train::SweepEntry& entry, const policy::PolicyModel& model) {
    if (skip_checkpoints) return;
    std::ostringstream os;
    model.save_checkpoint(os, {{"weights", weight_label(entry.weights)},
                               {"subproblem", std::to_string(entry.index)}});
    std::ostringstream name;
    name << "checkpoint_" << entry.index << ".txt";
    io::write_text_atomic((fs::path(out_dir) / name.str()).string(), os.str());
  };
  const auto entries =
      train::train_sweep(run.instance, run.space, bounds, run.config.encoder, run.config.train,
                         on_model);
  int failed = 0;
  for (const auto& entry : entries) {
    if (entry.aborted || !entry.feasible) ++failed;
    rows.push_back({method, weight_label(entry.weights), entry.objectives,
                    entry.feasible && !entry.aborted, run.config.seed});
    if (!entry.diagnostic.empty())
      std::cerr << "subproblem " << entry.index << " (" << weight_label(entry.weights)
                << "): " << entry.diagnostic << "\n";
  }
  const std::string front_path = (fs::path(out_dir) / "front.csv").string();
  io::write_front_csv(front_path, rows);
  io::write_run_meta(front_path, "sweep", run.config,
                     {{"subproblems", entries.size()}, {"failed", failed}});
  std::cout << "sweep complete: " << entries.size() << " subproblems, " << failed
            << " failed; front: " << front_path << "\n";
  return 0;
}

int cmd_moea(const std::string& config_path, const std::string& algo, std::string out) {
  Loaded run = load_run(config_path);
  if (out.empty()) out = "runs/" + algo + "_front.csv";
  std::vector<moea::Individual> front;
  if (algo == "nsga3") {
    front = moea::nsga3_run(run.instance, run.config.moea, run.config.seed);
  } else if (algo == "moead") {
    const decomp::ObjectiveBounds bounds = load_or_make_bounds(run, "");
    front = moea::moead_run(run.instance, run.config.moea, bounds, run.config.seed);
  } else {
    throw DataError("--algo must be nsga3 or moead");
  }
  std::vector<io::FrontRow> rows;
  for (size_t k = 0; k < front.size(); ++k)
    rows.push_back({algo, std::to_string(k), front[k].objectives, true, run.config.seed});
  io::write_front_csv(out, rows);
  io::write_run_meta(out, "moea --algo " + algo, run.config, {{"solutions", front.size()}});
  std::cout << algo << " returned " << front.size() << " feasible nondominated solutions; front: "
            << out << "\n";
  return 0;
}

int cmd_pareto(const std::vector<std::string>& inputs, const std::string& out,
               std::string report_path) {
  std::vector<io::FrontRow> all;
  for (const auto& path : inputs) {
    for (auto& row : io::read_front_csv(path))
      if (row.feasible) all.push_back(std::move(row));
  }
  if (all.empty()) throw DataError("pareto: no feasible rows in the input fronts");
  std::vector<hydro::ObjectiveTriple> points;
  points.reserve(all.size());
  for (const auto& row : all) points.push_back(row.objectives);
  std::vector<io::FrontRow> merged;
  for (int idx : moea::dominance_filter_indices(points)) merged.push_back(all[idx]);
  io::write_front_csv(out, merged);

  // Best-vs-best percentage deltas per ordered method pair.
  std::vector<std::string> methods;
  for (const auto& row : all)
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);
  std::ostringstream report;
  report.precision(10);
  report << "method_a,method_b,power_pct,aapfd_pct,water_pct\n";
  for (const auto& ma : methods)
    for (const auto& mb : methods) {
      if (ma == mb) continue;
      std::vector<hydro::ObjectiveTriple> fa, fb;
      for (const auto& row : all) {
        if (row.method == ma) fa.push_back(row.objectives);
        if (row.method == mb) fb.push_back(row.objectives);
      }
      const pareto::ImprovementReport rep = pareto::improvement_report(fa, fb);
      report << ma << ',' << mb << ',' << rep.power_pct << ',' << rep.aapfd_pct << ','
             << rep.water_pct << '\n';
    }
  if (report_path.empty()) report_path = out + ".report.csv";
  io::write_text_atomic(report_path, report.str());
  std::cout << "merged front: " << merged.size() << " rows -> " << out << "\n"
            << "improvement report -> " << report_path << "\n"
            << report.str();
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& config_path, std::string out,
                 const std::string& trace_path) {
  Loaded run = load_run(config_path);
  if (out.empty()) out = "runs/schedule.csv";
  policy::PolicyModel model = policy::PolicyModel::load_checkpoint(checkpoint, run.instance,
                                                                   run.space);
  policy::PolicyEpisode episode(model, /*record=*/false);
  const env::RolloutResult result = env::greedy_rollout(run.instance, run.space, episode);
  const hydro::FeasibilityReport report = hydro::check_constraints(run.instance, result.schedule);
  const hydro::ObjectiveTriple obj = hydro::objective_triple(run.instance, result.schedule);

  io::write_schedule_csv(out, run.instance, result.schedule);
  if (!trace_path.empty()) {
    std::ostringstream os;
    env::write_trace_csv(os, result.steps);
    io::write_text_atomic(trace_path, os.str());
  }
  nlohmann::json extra;
  extra["power"] = obj.power;
  extra["aapfd"] = obj.aapfd;
  extra["water_revenue"] = obj.water_revenue;
  extra["feasible"] = report.feasible;
  io::write_run_meta(out, "evaluate " + checkpoint, run.config, extra);

  std::cout.precision(17);
  std::cout << "schedule: " << out << "\n"
            << "  power         = " << obj.power << "\n"
            << "  aapfd         = " << obj.aapfd << "\n"
            << "  water_revenue = " << obj.water_revenue << "\n"
            << "  feasible      = " << (report.feasible ? "yes" : "no") << "\n";
  if (!report.feasible)
    for (const auto& v : report.violations) std::cout << "  violation: " << v.describe() << "\n";
  return 0;
}

int cmd_export_plots(const std::vector<std::string>& curves, const std::vector<std::string>& fronts,
                     const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (!curves.empty()) {
    std::ostringstream os;
    os << "run,iteration,epoch,mean_reward,baseline_reward,lr\n";
    for (const auto& path : curves) {
      std::ifstream is(path);
      if (!is) throw DataError("cannot open curve csv: " + path);
      const std::string run_name = fs::path(path).parent_path().filename().string();
      std::string line;
      bool first = true;
      while (std::getline(is, line)) {
        if (first) {
          first = false;
          continue;
        }
        if (!line.empty()) os << (run_name.empty() ? path : run_name) << ',' << line << '\n';
      }
    }
    io::write_text_atomic((fs::path(out_dir) / "reward_curves.csv").string(), os.str());
  }
  if (!fronts.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "method,power,aapfd,water_revenue\n";
    for (const auto& path : fronts)
      for (const auto& row : io::read_front_csv(path))
        if (row.feasible)
          os << row.method << ',' << row.objectives.power << ',' << row.objectives.aapfd << ','
             << row.objectives.water_revenue << '\n';
    io::write_text_atomic((fs::path(out_dir) / "front_scatter.csv").string(), os.str());
  }
  std::cout << "plot-ready CSVs written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiobjective multireservoir operation optimizer"};
  app.require_subcommand(1);

  std::string dataset, config_path, weights_text, variant, out, algo, checkpoint, trace_path,
      report_path, method;
  double period_seconds = 2592000.0;
  int budget = 0;
  bool skip_checkpoints = false;
  std::vector<std::string> inputs, curves, fronts;

  auto* validate = app.add_subcommand("validate", "check a dataset directory against all type invariants");
  validate->add_option("dataset", dataset)->required();
  validate->add_option("--period-seconds", period_seconds, "system-wide period length");

  auto* bounds = app.add_subcommand("bounds", "estimate objective bounds and write the bounds file");
  bounds->add_option("--config", config_path)->required();
  bounds->add_option("--method", method, "sample | train (default from config)");
  bounds->add_option("--budget", budget);
  bounds->add_option("--out", out);

  auto* train_cmd = app.add_subcommand("train", "train one weighted subproblem");
  train_cmd->add_option("--config", config_path)->required();
  train_cmd->add_option("--weights", weights_text, "w1,w2,w3 summing to 1")->required();
  train_cmd->add_option("--variant", variant, "two_stage | direct (default from config)");
  train_cmd->add_option("--out", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "train all 171 weight-grid subproblems");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--out", out, "output directory");
  sweep->add_flag("--skip-checkpoints", skip_checkpoints);

  auto* moea_cmd = app.add_subcommand("moea", "run an evolutionary baseline");
  moea_cmd->add_option("--config", config_path)->required();
  moea_cmd->add_option("--algo", algo, "nsga3 | moead")->required();
  moea_cmd->add_option("--out", out);

  auto* pareto_cmd = app.add_subcommand("pareto", "merge fronts, filter dominance, report improvements");
  pareto_cmd->add_option("--inputs", inputs)->required()->expected(-1);
  pareto_cmd->add_option("--out", out)->required();
  pareto_cmd->add_option("--report", report_path);

  auto* evaluate = app.add_subcommand("evaluate", "greedy-decode a checkpoint into a schedule CSV");
  evaluate->add_option("checkpoint", checkpoint)->required();
  evaluate->add_option("--config", config_path)->required();
  evaluate->add_option("--out", out);
  evaluate->add_option("--trace", trace_path, "decision-step trace CSV");

  auto* plots = app.add_subcommand("export-plots", "write plot-ready CSVs for curves and fronts");
  plots->add_option("--curves", curves)->expected(-1);
  plots->add_option("--fronts", fronts)->expected(-1);
  plots->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(dataset, period_seconds);
    if (bounds->parsed()) return cmd_bounds(config_path, method, budget, out);
    if (train_cmd->parsed()) return cmd_train(config_path, weights_text, variant, out);
    if (sweep->parsed()) return cmd_sweep(config_path, out, skip_checkpoints);
    if (moea_cmd->parsed()) return cmd_moea(config_path, algo, out);
    if (pareto_cmd->parsed()) return cmd_pareto(inputs, out, report_path);
    if (evaluate->parsed()) return cmd_evaluate(checkpoint, config_path, out, trace_path);
    if (plots->parsed()) return cmd_export_plots(curves, fronts, out);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
