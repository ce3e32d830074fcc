// skipstop: data generation and ingestion, demand forecasting, stop/skip
// optimization and single-pattern simulation from the command line.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skipstop/aco.hpp"
#include "skipstop/error.hpp"
#include "skipstop/forecast.hpp"
#include "skipstop/io.hpp"
#include "skipstop/scenarios.hpp"
#include "skipstop/simulator.hpp"
#include "skipstop/smartcard.hpp"

namespace {

using namespace skipstop;
namespace fs = std::filesystem;
using io::json;

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 1, kInputMissing = 2, kDataFormat = 3, kConfig = 4,
            kConstraint = 5, kInternal = 6 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InputMissing: return kInputMissing;
    case ErrorKind::Data:
    case ErrorKind::Shape: return kDataFormat;
    case ErrorKind::InvalidConfig:
    case ErrorKind::Infeasible:
    case ErrorKind::NormalizationUndefined: return kConfig;
    case ErrorKind::Constraint: return kConstraint;
    case ErrorKind::Internal: return kInternal;
  }
  return kInternal;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1,
          ErrorKind::Internal, "SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int n = 0; n < len; ++n) {
    std::snprintf(buf, sizeof buf, "%02x", md[n]);
    hex += buf;
  }
  return hex;
}

// UTC time of the run; SOURCE_DATE_EPOCH pins it for reproducible manifests.
std::string run_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* fixed = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(fixed, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects every file a command writes and records it in run_manifest.json.
class Run {
 public:
  Run(std::string command, fs::path out_dir, std::vector<std::string> args)
      : command_(std::move(command)), out_(std::move(out_dir)), args_(std::move(args)) {
    fs::create_directories(out_);
  }

  void input(const std::string& role, const fs::path& path) {
    inputs_[role] = {{"path", path.string()}, {"sha256", sha256_hex(io::read_text(path))}};
  }
  void builtin_input(const std::string& role, const std::string& name) {
    inputs_[role] = {{"builtin", name}};
  }
  void write(const std::string& name, const std::string& text) {
    io::write_text(out_ / name, text);
    outputs_[name] = {{"sha256", sha256_hex(text)}, {"bytes", text.size()}};
  }
  void write(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

  void finish(std::optional<std::uint64_t> seed, const json& settings) {
    const json manifest{
        {"tool", "skipstop"},
        {"command", command_},
        {"arguments", args_},
        {"inputs", inputs_},
        {"outputs", outputs_},
        {"seed", seed ? json(*seed) : json(nullptr)},
        {"settings", settings},
        {"timestamp", run_timestamp()},
        {"versions",
         {{"skipstop", kVersion},
          {"checkpoint_format", io::kCheckpointVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
    };
    io::write_json(out_ / "run_manifest.json", manifest);
    std::cout << "wrote " << outputs_.size() << " files and run_manifest.json to "
              << out_.string() << "\n";
  }

 private:
  std::string command_;
  fs::path out_;
  std::vector<std::string> args_;
  json inputs_ = json::object();
  json outputs_ = json::object();
};

// ---------------------------------------------------------------------------
// Options

struct Common {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  std::vector<std::string> args;
};

struct LineOptions {
  std::string config;
  std::optional<double> gamma;
  bool strict_headway = false;
};

struct GenDataOptions {
  std::string spec;
};

struct IngestOptions {
  std::string transactions;
  int stations = 0;
  int first_hour = 0;
  int end_hour = 24;
  std::size_t max_rows = 50'000'000;
};

struct ForecastCliOptions {
  std::string series;
  ForecastOptions fit;
};

struct OptimizeOptions {
  LineOptions line;
  std::string demand;
  std::string checkpoint;
  std::string history;
  bool no_skip = false;
  AcoParams aco;
};

struct SimulateOptions {
  LineOptions line;
  std::string demand;
  std::string pattern;
};

void add_line_flags(CLI::App* cmd, LineOptions& o) {
  cmd->add_option("--config", o.config,
                  "Line configuration (JSON); the built-in 12x30 reference line if omitted")
      ->envname("SKIPSTOP_CONFIG");
  cmd->add_option("--gamma", o.gamma, "Weight of waiting time in the objective")
      ->envname("SKIPSTOP_GAMMA");
  cmd->add_flag("--strict-headway", o.strict_headway,
                "Reject patterns that need the minimum-gap clamp instead of applying it")
      ->envname("SKIPSTOP_STRICT_HEADWAY");
}

CLI::Option* add_seed(CLI::App* cmd, Common& c) {
  return cmd->add_option("--seed", c.seed, "Random seed")->envname("SKIPSTOP_SEED");
}

void add_out(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output directory")->required()->envname("SKIPSTOP_OUT");
}

LineConfig load_line(const LineOptions& o, Run& run) {
  LineConfig c;
  if (o.config.empty()) {
    c = scenarios::reference_line();
    run.builtin_input("config", "reference-line");
  } else {
    c = io::load_line_config(o.config);
    run.input("config", o.config);
  }
  if (o.gamma) c.gamma = *o.gamma;
  if (o.strict_headway) c.strict_headway = true;
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen_data(const Common& common, const GenDataOptions& o, bool seed_given) {
  SyntheticSpec spec = io::parse_synthetic_spec(io::read_json(o.spec));
  if (seed_given) spec.seed = common.seed;
  Run run("gen-data", common.out, common.args);
  run.input("spec", o.spec);

  const SyntheticData data = generate_synthetic(spec);
  run.write("transactions.csv", io::transactions_csv(data.transactions));
  run.write("trips.csv", io::trips_csv(data.trips));
  run.write("od_counts.csv", io::od_compact_csv(data.counts));
  run.write("od_counts_long.csv", io::od_long_csv(data.counts));
  run.write("od_rates.csv", io::od_compact_csv(data.rates));
  run.write("spec.json", io::to_json(spec));
  std::cout << data.trips.size() << " trips, " << data.transactions.size()
            << " transactions over " << data.counts.hours.size() << " service hours\n";
  run.finish(spec.seed, io::to_json(spec));
  return kOk;
}

int cmd_ingest(const Common& common, const IngestOptions& o) {
  const auto tx = io::load_transactions(o.transactions, o.max_rows);
  Run run("ingest", common.out, common.args);
  run.input("transactions", o.transactions);
  const PairingResult paired = pair_trips(tx);

  require(!paired.trips.empty(), ErrorKind::Data, "no complete trips in " + o.transactions);
  int stations = o.stations;
  std::int64_t first_day = INT64_MAX, last_day = INT64_MIN;
  for (const Trip& t : paired.trips) {
    stations = std::max(stations, t.dest);
    first_day = std::min(first_day, t.entry_s / 86400);
    last_day = std::max(last_day, t.entry_s / 86400);
  }
  require(o.stations == 0 || stations == o.stations, ErrorKind::Data,
          "trips reach station " + std::to_string(stations) + " but --stations is " +
              std::to_string(o.stations));
  // Every service hour of every calendar day (UTC) that has a trip.
  const auto hours = service_hours(first_day * 86400, static_cast<int>(last_day - first_day + 1),
                                   o.first_hour, o.end_hour);
  const OdSeries series = aggregate_hourly(paired.trips, hours, stations);

  std::string rejected = "card_id,timestamp,station,type,reason\n";
  std::map<std::string, int> by_reason;
  for (const RejectedRecord& r : paired.rejected) {
    rejected += r.record.card_id + "," + std::to_string(r.record.timestamp_s) + "," +
                std::to_string(r.record.station) + "," +
                (r.record.kind == TxKind::Entry ? "entry" : "exit") + "," +
                to_string(r.reason) + "\n";
    ++by_reason[to_string(r.reason)];
  }
  run.write("trips.csv", io::trips_csv(paired.trips));
  run.write("rejected.csv", rejected);
  run.write("od_counts.csv", io::od_compact_csv(series));
  run.write("od_counts_long.csv", io::od_long_csv(series));
  std::cout << paired.trips.size() << " trips, " << paired.rejected.size()
            << " rejected records";
  for (const auto& [reason, n] : by_reason) std::cout << " (" << reason << ": " << n << ")";
  std::cout << "\n";
  run.finish(std::nullopt, {{"num_stations", stations},
                            {"first_hour", o.first_hour},
                            {"end_hour", o.end_hour},
                            {"max_rows", o.max_rows}});
  return kOk;
}

int cmd_forecast(const Common& common, ForecastCliOptions o) {
  const OdSeries series = io::load_od_compact(o.series);
  Run run("forecast", common.out, common.args);
  run.input("series", o.series);
  o.fit.hyper.seed = common.seed;

  const ForecastFit fit = fit_forecaster(series, o.fit);
  run.write("model.json", io::to_json(fit.model));
  run.write("loss_curve.csv", io::loss_curve_csv(fit.curve));

  // Held-out comparison against the same-hour historical mean.
  json report{{"train_windows", fit.split.train.size()},
              {"valid_windows", fit.split.valid.size()}};
  // Windows whose hour of day was never observed before have no historical
  // mean and are left out of both scores.
  std::vector<std::vector<double>> predicted, baseline, actual;
  for (const RawWindow& w : fit.split.valid) {
    const int hour = OdHour{w.target_label, {}}.hour_of_day();
    const bool seen = std::any_of(series.hours.begin(), series.hours.end(), [&](const OdHour& h) {
      return h.label < w.target_label && h.hour_of_day() == hour;
    });
    if (!seen) continue;
    std::vector<double> p = forward(fit.model, w.inputs);
    for (double& v : p) v = std::max(v, 0.0);
    predicted.push_back(std::move(p));
    baseline.push_back(baseline_average_counts(series, hour, w.target_label));
    actual.push_back(w.target);
  }
  report["compared_windows"] = actual.size();
  if (!actual.empty()) {
    auto as_json = [](const AccuracyReport& r) {
      return json{{"mse", r.mse}, {"r2", r.r2}, {"mae_accuracy", r.mae_accuracy}};
    };
    const AccuracyReport lstm = accuracy(predicted, actual);
    const AccuracyReport avg = accuracy(baseline, actual);
    report["lstm"] = as_json(lstm);
    report["baseline_average"] = as_json(avg);
    std::cout << "held-out MSE " << io::format_fixed(lstm.mse, 4) << " (historical mean "
              << io::format_fixed(avg.mse, 4) << "), R^2 " << io::format_fixed(lstm.r2, 4)
              << "\n";
  }
  if (!fit.curve.empty()) {
    std::cout << "epoch " << fit.curve.back().epoch << ": train "
              << io::format_fixed(fit.curve.back().train_mse, 6) << ", validation "
              << io::format_fixed(fit.curve.back().valid_mse, 6) << "\n";
  }
  run.write("forecast_report.json", report);
  run.finish(common.seed, {{"epochs", o.fit.hyper.epochs},
                           {"batch", o.fit.hyper.batch},
                           {"lr", o.fit.hyper.lr},
                           {"lookback", o.fit.lookback},
                           {"lead", o.fit.lead},
                           {"hidden", o.fit.shape.hidden},
                           {"dense", o.fit.shape.dense},
                           {"train_fraction", o.fit.train_fraction}});
  return kOk;
}

std::string percent(double baseline, double value) {
  return io::format_fixed(baseline > 0 ? 100.0 * (baseline - value) / baseline : 0.0, 3) + "%";
}

json totals_json(double objective, const SimulationResult& r) {
  return {{"objective", objective},
          {"waiting_time_s", r.waiting_time_s},
          {"in_vehicle_time_s", r.in_vehicle_time_s},
          {"last_train_left", r.last_train_left}};
}

void print_comparison(double z0, const SimulationResult& base, double z,
                      const SimulationResult& best) {
  auto row = [](const char* name, double a, double b, int digits) {
    std::printf("%-26s %14s %14s %10s\n", name, io::format_fixed(a, digits).c_str(),
                io::format_fixed(b, digits).c_str(), percent(a, b).c_str());
  };
  std::printf("%-26s %14s %14s %10s\n", "", "all-stop", "optimized", "saving");
  row("objective", z0, z, 3);
  row("waiting time (h)", base.waiting_time_s / 3600, best.waiting_time_s / 3600, 1);
  row("in-vehicle time (h)", base.in_vehicle_time_s / 3600, best.in_vehicle_time_s / 3600, 1);
  row("left by last train", base.last_train_left, best.last_train_left, 1);
}

int cmd_optimize(const Common& common, OptimizeOptions o) {
  Run run("optimize", common.out, common.args);
  const LineConfig config = load_line(o.line, run);

  DemandMatrix demand(config.num_stations);
  if (!o.demand.empty()) {
    require(o.checkpoint.empty() && o.history.empty(), ErrorKind::InvalidConfig,
            "give either --demand or --checkpoint with --history, not both");
    demand = io::load_demand(o.demand, config.num_stations);
    run.input("demand", o.demand);
  } else {
    require(!o.checkpoint.empty() && !o.history.empty(), ErrorKind::InvalidConfig,
            "demand source missing: give --demand, or --checkpoint with --history");
    const LstmModel model = io::load_checkpoint(o.checkpoint);
    const OdSeries history = io::load_od_compact(o.history);
    run.input("checkpoint", o.checkpoint);
    run.input("history", o.history);
    require(history.num_stations == config.num_stations, ErrorKind::Shape,
            "history has " + std::to_string(history.num_stations) + " stations, line has " +
                std::to_string(config.num_stations));
    demand = predict_peak(model, history);
    run.write("demand.csv", io::demand_csv(demand));
  }

  const NominalBaseline baseline = nominal_baseline(config, demand);
  const StopSkipPattern all_stop = StopSkipPattern::all_stop(config.num_trains, config.num_stations);
  const SimulationResult base_run = simulate(config, demand, all_stop);
  require(base_run.feasible, ErrorKind::Infeasible,
          "the all-stop operation violates the minimum arrival gap under strict headway");
  const double z0 = normalize(base_run, baseline, config.gamma);

  o.aco.rng_seed = common.seed;
  o.aco.threads = common.threads;
  StopSkipPattern best = all_stop;
  std::vector<IterationRecord> history;
  std::optional<double> colony_best;
  const auto t0 = std::chrono::steady_clock::now();
  if (!o.no_skip) {
    const AcoRun aco = optimize(config, demand, o.aco);
    history = aco.history;
    colony_best = aco.best_cost;
    // The colony never samples all-stop on purpose; keep it if nothing beat it.
    if (aco.best_cost < z0) best = aco.best_pattern;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const SimulationResult best_run = simulate(config, demand, best);
  const double z = normalize(best_run, baseline, config.gamma);

  json summary{
      {"all_stop", totals_json(z0, base_run)},
      {"optimized", totals_json(z, best_run)},
      {"improvement_percent",
       {{"objective", percent(z0, z)},
        {"waiting_time", percent(base_run.waiting_time_s, best_run.waiting_time_s)},
        {"in_vehicle_time", percent(base_run.in_vehicle_time_s, best_run.in_vehicle_time_s)}}},
      {"skipped_stops", best.skip_count()},
      {"colony_best", colony_best ? json(*colony_best) : json(nullptr)},
      {"kept_all_stop", colony_best.has_value() && !(*colony_best < z0)},
      {"gamma", config.gamma},
      {"headway_violations", best_run.headway_violations.size()},
      {"dwell_nonconverged", best_run.dwell_nonconverged.size()},
  };
  run.write("pattern.csv", io::pattern_csv(best));
  run.write("convergence.csv", io::convergence_csv(history));
  run.write("schedule.csv", io::schedule_csv(export_schedule(best_run)));
  run.write("summary.json", summary);

  print_comparison(z0, base_run, z, best_run);
  if (colony_best && !(*colony_best < z0)) {
    std::printf("no pattern found beats all-stop (colony best %s); keeping all-stop\n",
                io::format_fixed(*colony_best, 3).c_str());
  }
  std::printf("%d stops skipped; search took %.2f s\n", best.skip_count(), seconds);
  run.finish(common.seed, {{"ants", o.aco.num_ants},
                           {"iterations", o.aco.max_iterations},
                           {"alpha", o.aco.alpha},
                           {"rho", o.aco.evaporation_rate},
                           {"q", o.aco.initial_pheromone},
                           {"no_skip", o.no_skip},
                           {"line", io::to_json(config)}});
  return kOk;
}

int cmd_simulate(const Common& common, const SimulateOptions& o) {
  Run run("simulate", common.out, common.args);
  const LineConfig config = load_line(o.line, run);
  const DemandMatrix demand = io::load_demand(o.demand, config.num_stations);
  const StopSkipPattern pattern = io::load_pattern(o.pattern);
  run.input("demand", o.demand);
  run.input("pattern", o.pattern);

  const auto violations = validate_pattern(pattern, config);
  if (!violations.empty()) {
    std::string msg = "pattern breaks " + std::to_string(violations.size()) + " operating rule(s):";
    for (const Violation& v : violations) msg += "\n  " + v.describe();
    fail(ErrorKind::Constraint, msg);
  }
  const SimulationResult result = simulate(config, demand, pattern);
  const NominalBaseline baseline = nominal_baseline(config, demand);
  const json summary = io::simulation_summary(result, baseline, config.gamma);
  run.write("summary.json", summary);
  run.write("schedule.csv", io::schedule_csv(export_schedule(result)));
  std::cout << "objective " << summary["objective"].dump() << ", waiting "
            << io::format_fixed(result.waiting_time_s / 3600, 1) << " h, in-vehicle "
            << io::format_fixed(result.in_vehicle_time_s / 3600, 1) << " h\n";
  run.finish(std::nullopt, {{"line", io::to_json(config)}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peak-hour demand forecasting and stop/skip train scheduling"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  for (int n = 0; n < argc; ++n) common.args.emplace_back(argv[n]);
  common.args.front() = "skipstop";

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a seeded synthetic smart-card dataset");
  gen_cmd->add_option("--spec", gen.spec, "Synthetic data spec (JSON)")->required()
      ->envname("SKIPSTOP_SPEC");
  auto* gen_seed = add_seed(gen_cmd, common);
  add_out(gen_cmd, common);

  IngestOptions ingest;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Pair smart-card transactions into trips and hourly OD counts");
  ingest_cmd->add_option("--transactions", ingest.transactions, "card_id,timestamp,station,type file")
      ->required();
  ingest_cmd->add_option("--stations", ingest.stations, "Stations on the line (default: highest seen)");
  ingest_cmd->add_option("--first-hour", ingest.first_hour, "Daily service start hour (UTC)");
  ingest_cmd->add_option("--end-hour", ingest.end_hour, "Daily service end hour (UTC), exclusive");
  ingest_cmd->add_option("--max-rows", ingest.max_rows, "Refuse files with more rows than this")
      ->envname("SKIPSTOP_MAX_ROWS");
  add_out(ingest_cmd, common);

  ForecastCliOptions fc;
  auto* fc_cmd = app.add_subcommand("forecast", "Train the LSTM demand forecaster");
  fc_cmd->add_option("--series", fc.series, "Hourly OD counts (compact CSV)")->required();
  fc_cmd->add_option("--epochs", fc.fit.hyper.epochs, "Training epochs")->envname("SKIPSTOP_EPOCHS");
  fc_cmd->add_option("--batch", fc.fit.hyper.batch, "Minibatch size")->envname("SKIPSTOP_BATCH");
  fc_cmd->add_option("--lr", fc.fit.hyper.lr, "Adam learning rate")->envname("SKIPSTOP_LR");
  fc_cmd->add_option("--lookback", fc.fit.lookback, "Input hours per forecast")
      ->envname("SKIPSTOP_LOOKBACK");
  fc_cmd->add_option("--lead", fc.fit.lead, "Hours from the last input to the target")
      ->envname("SKIPSTOP_LEAD");
  fc_cmd->add_option("--hidden", fc.fit.shape.hidden, "LSTM units")->envname("SKIPSTOP_HIDDEN");
  fc_cmd->add_option("--dense", fc.fit.shape.dense, "ReLU layer width, 0 to drop it")
      ->envname("SKIPSTOP_DENSE");
  fc_cmd->add_option("--train-fraction", fc.fit.train_fraction, "Share of windows used for training");
  add_seed(fc_cmd, common);
  add_out(fc_cmd, common);

  OptimizeOptions opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Search for the best stop/skip pattern");
  add_line_flags(opt_cmd, opt.line);
  opt_cmd->add_option("--demand", opt.demand, "Peak-hour demand (origin,dest,rate CSV)");
  opt_cmd->add_option("--checkpoint", opt.checkpoint, "Forecaster checkpoint (with --history)");
  opt_cmd->add_option("--history", opt.history, "Hourly OD counts ending before the peak");
  opt_cmd->add_flag("--no-skip", opt.no_skip, "Evaluate the all-stop operation only");
  opt_cmd->add_option("--ants", opt.aco.num_ants, "Ants per iteration")->envname("SKIPSTOP_ANTS");
  opt_cmd->add_option("--iterations", opt.aco.max_iterations, "Colony iterations")
      ->envname("SKIPSTOP_ITERATIONS");
  opt_cmd->add_option("--alpha", opt.aco.alpha, "Pheromone exponent")->envname("SKIPSTOP_ALPHA");
  opt_cmd->add_option("--rho", opt.aco.evaporation_rate, "Evaporation rate")
      ->envname("SKIPSTOP_RHO");
  opt_cmd->add_option("--q", opt.aco.initial_pheromone, "Initial pheromone and deposit numerator")
      ->envname("SKIPSTOP_Q");
  opt_cmd->add_option("--threads", common.threads, "Worker threads")->envname("SKIPSTOP_THREADS");
  add_seed(opt_cmd, common);
  add_out(opt_cmd, common);

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Evaluate one stop/skip pattern");
  add_line_flags(sim_cmd, sim.line);
  sim_cmd->add_option("--demand", sim.demand, "Demand (origin,dest,rate CSV)")->required();
  sim_cmd->add_option("--pattern", sim.pattern, "Pattern (train,1..J CSV)")->required();
  add_out(sim_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(common, gen, gen_seed->count() > 0);
    if (*ingest_cmd) return cmd_ingest(common, ingest);
    if (*fc_cmd) return cmd_forecast(common, fc);
    if (*opt_cmd) return cmd_optimize(common, opt);
    if (*sim_cmd) return cmd_simulate(common, sim);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
