#pragma once

// File formats. Delimited text everywhere except the structured documents
// (line config, synthetic-data spec, summaries, model checkpoint, run
// manifest), which are JSON.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "skipstop/aco.hpp"
#include "skipstop/forecast.hpp"
#include "skipstop/line_model.hpp"
#include "skipstop/od_series.hpp"
#include "skipstop/simulator.hpp"
#include "skipstop/smartcard.hpp"

namespace skipstop::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Fixed-point with `digits` fractional digits.
std::string format_fixed(double v, int digits);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& doc);

// Line configuration. Unknown keys are rejected.
LineConfig parse_line_config(const json& doc);
json to_json(const LineConfig& config);
LineConfig load_line_config(const fs::path& path);

// Demand matrix: `origin,dest,rate_per_s` or `origin,dest,trips_per_hour`.
DemandMatrix parse_demand_csv(const std::string& text, int num_stations);
DemandMatrix load_demand(const fs::path& path, int num_stations);
std::string demand_csv(const DemandMatrix& demand);

// Stop/skip pattern: header `train,1,2,...,J`, one row per train.
StopSkipPattern parse_pattern_csv(const std::string& text);
StopSkipPattern load_pattern(const fs::path& path);
std::string pattern_csv(const StopSkipPattern& pattern);

// `train,station,arrival_s,departure_s,stopped` with 2 fractional digits.
std::string schedule_csv(std::span<const ScheduleRow> rows);

// `it,iter_best,global_best`.
std::string convergence_csv(std::span<const IterationRecord> history);

// `epoch,train_mse,valid_mse`.
std::string loss_curve_csv(std::span<const EpochLoss> curve);

json simulation_summary(const SimulationResult& result, const NominalBaseline& baseline,
                        double gamma);

// Transactions: `card_id,timestamp,station,type`; timestamps as epoch
// seconds or ISO-8601 (UTC), detected per row.
std::vector<Transaction> parse_transactions_csv(const std::string& text,
                                                std::size_t max_rows);
std::vector<Transaction> load_transactions(const fs::path& path, std::size_t max_rows);
std::string transactions_csv(std::span<const Transaction> tx);
std::int64_t parse_timestamp(const std::string& field);

// OD series, long form: `hour,origin,dest,count` (nonzero cells only).
std::string od_long_csv(const OdSeries& series);
// OD series, compact: `hour,1-2,1-3,...`, one row per hour.
std::string od_compact_csv(const OdSeries& series);
OdSeries parse_od_compact_csv(const std::string& text);
OdSeries load_od_compact(const fs::path& path);

// Trips: `card_id,origin,dest,entry_s,exit_s`.
std::string trips_csv(std::span<const Trip> trips);

// Synthetic data spec. Unknown keys are rejected.
SyntheticSpec parse_synthetic_spec(const json& doc);
json to_json(const SyntheticSpec& spec);

// Model checkpoint.
inline constexpr int kCheckpointVersion = 1;
json to_json(const LstmModel& model);
LstmModel parse_checkpoint(const json& doc);
LstmModel load_checkpoint(const fs::path& path);

}  // namespace skipstop::io
