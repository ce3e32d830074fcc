#include "skipstop/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "skipstop/error.hpp"

namespace skipstop::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == sep) {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Non-empty, non-comment lines.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::int64_t to_int(const std::string& field, const std::string& where) {
  const std::string f = trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
    fail(ErrorKind::Data, where + ": expected an integer, got '" + field + "'");
  }
  return v;
}

double to_double(const std::string& field, const std::string& where) {
  const std::string f = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() || !std::isfinite(v)) {
    fail(ErrorKind::Data, where + ": expected a number, got '" + field + "'");
  }
  return v;
}

std::string line_ref(std::size_t n) { return "line " + std::to_string(n + 1); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  require(obj.is_object(), ErrorKind::InvalidConfig, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) {
      fail(ErrorKind::InvalidConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidConfig, where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read_req(const json& obj, const char* key, T& out, const std::string& where) {
  require(obj.contains(key), ErrorKind::InvalidConfig,
          "missing required key '" + std::string(key) + "' in " + where);
  read_opt(obj, key, out, where);
}

json section(const json& doc, const char* key) {
  return doc.contains(key) ? doc.at(key) : json::object();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  require(ec == std::errc(), ErrorKind::Internal, "number formatting failed");
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int digits) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::fixed, digits);
  require(ec == std::errc(), ErrorKind::Internal, "number formatting failed");
  return std::string(buf.data(), ptr);
}

std::string read_text(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::InputMissing, "file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::InputMissing, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::InputMissing, "cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Line configuration

LineConfig parse_line_config(const json& doc) {
  check_keys(doc,
             {"line", "fleet", "kinematics", "dwell", "objective", "horizon_start_s",
              "accumulation_start"},
             "config");
  LineConfig c;
  const json line = section(doc, "line");
  check_keys(line, {"num_stations", "block_travel_time_s", "transfer_stations"}, "line");
  read_req(line, "num_stations", c.num_stations, "line");
  read_req(line, "block_travel_time_s", c.block_travel_time_s, "line");
  read_opt(line, "transfer_stations", c.transfer_stations, "line");

  const json fleet = section(doc, "fleet");
  check_keys(fleet,
             {"num_trains", "dispatch_headway_s", "min_arrival_gap_s", "capacity", "num_doors"},
             "fleet");
  read_req(fleet, "num_trains", c.num_trains, "fleet");
  read_opt(fleet, "dispatch_headway_s", c.dispatch_headway_s, "fleet");
  read_opt(fleet, "min_arrival_gap_s", c.min_arrival_gap_s, "fleet");
  read_opt(fleet, "capacity", c.capacity, "fleet");
  read_opt(fleet, "num_doors", c.num_doors, "fleet");

  const json kin = section(doc, "kinematics");
  check_keys(kin, {"holding_speed_mps", "accel_mps2", "decel_mps2"}, "kinematics");
  read_opt(kin, "holding_speed_mps", c.holding_speed_mps, "kinematics");
  read_opt(kin, "accel_mps2", c.accel_mps2, "kinematics");
  read_opt(kin, "decel_mps2", c.decel_mps2, "kinematics");

  const json dwell = section(doc, "dwell");
  check_keys(dwell, {"criteria_s", "max_s", "coeffs"}, "dwell");
  read_opt(dwell, "criteria_s", c.dwell_criteria_s, "dwell");
  read_opt(dwell, "max_s", c.dwell_max_s, "dwell");
  if (dwell.contains("coeffs")) {
    std::vector<double> a;
    read_opt(dwell, "coeffs", a, "dwell");
    require(a.size() == 4, ErrorKind::InvalidConfig, "dwell.coeffs needs exactly 4 values");
    c.dwell_coeffs = {a[0], a[1], a[2], a[3]};
  }

  const json obj = section(doc, "objective");
  check_keys(obj, {"gamma", "strict_headway"}, "objective");
  read_opt(obj, "gamma", c.gamma, "objective");
  read_opt(obj, "strict_headway", c.strict_headway, "objective");

  read_opt(doc, "horizon_start_s", c.horizon_start_s, "config");
  if (doc.contains("accumulation_start")) {
    std::string mode;
    read_opt(doc, "accumulation_start", mode, "config");
    if (mode == "horizon") {
      c.accumulation_start = AccumulationStart::Horizon;
    } else if (mode == "previous-train") {
      c.accumulation_start = AccumulationStart::PreviousTrain;
    } else {
      fail(ErrorKind::InvalidConfig,
           "config.accumulation_start must be \"horizon\" or \"previous-train\"");
    }
  }
  c.validate();
  return c;
}

json to_json(const LineConfig& c) {
  const DwellCoefficients& a = c.dwell_coeffs;
  return json{
      {"line",
       {{"num_stations", c.num_stations},
        {"block_travel_time_s", c.block_travel_time_s},
        {"transfer_stations", c.transfer_stations}}},
      {"fleet",
       {{"num_trains", c.num_trains},
        {"dispatch_headway_s", c.dispatch_headway_s},
        {"min_arrival_gap_s", c.min_arrival_gap_s},
        {"capacity", c.capacity},
        {"num_doors", c.num_doors}}},
      {"kinematics",
       {{"holding_speed_mps", c.holding_speed_mps},
        {"accel_mps2", c.accel_mps2},
        {"decel_mps2", c.decel_mps2}}},
      {"dwell",
       {{"criteria_s", c.dwell_criteria_s},
        {"max_s", c.dwell_max_s},
        {"coeffs", {a.base_s, a.per_alighting_s, a.per_boarding_s, a.crowding_s}}}},
      {"objective", {{"gamma", c.gamma}, {"strict_headway", c.strict_headway}}},
      {"horizon_start_s", c.horizon_start_s},
      {"accumulation_start", c.accumulation_start == AccumulationStart::Horizon
                                 ? "horizon"
                                 : "previous-train"},
  };
}

LineConfig load_line_config(const fs::path& path) {
  const json doc = read_json(path);
  try {
    return parse_line_config(doc);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Demand and pattern

DemandMatrix parse_demand_csv(const std::string& text, int num_stations) {
  const auto lines = lines_of(text);
  require(!lines.empty(), ErrorKind::Data, "demand file is empty");
  const auto header = split(lines[0]);
  require(header.size() == 3 && trim(header[0]) == "origin" && trim(header[1]) == "dest",
          ErrorKind::Data, "demand header must be origin,dest,<rate_per_s|trips_per_hour>");
  double to_per_second = 1.0;
  if (trim(header[2]) == "trips_per_hour") {
    to_per_second = 1.0 / 3600.0;
  } else {
    require(trim(header[2]) == "rate_per_s", ErrorKind::Data,
            "unknown demand unit column '" + header[2] + "'");
  }
  DemandMatrix m(num_stations);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = split(lines[n]);
    require(f.size() == 3, ErrorKind::Data, line_ref(n) + ": expected 3 fields");
    const auto o = static_cast<int>(to_int(f[0], line_ref(n)));
    const auto d = static_cast<int>(to_int(f[1], line_ref(n)));
    require(o >= 1 && d <= num_stations && o < d, ErrorKind::Data,
            line_ref(n) + ": (" + f[0] + ", " + f[1] + ") is not a downstream pair");
    const double v = to_double(f[2], line_ref(n));
    require(v >= 0.0, ErrorKind::Data, line_ref(n) + ": negative demand");
    m.set_rate(o, d, v * to_per_second);
  }
  return m;
}

DemandMatrix load_demand(const fs::path& path, int num_stations) {
  try {
    return parse_demand_csv(read_text(path), num_stations);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputMissing) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string demand_csv(const DemandMatrix& m) {
  std::string out = "origin,dest,rate_per_s\n";
  for (int j = 1; j <= m.num_stations(); ++j)
    for (int k = j + 1; k <= m.num_stations(); ++k)
      out += std::to_string(j) + "," + std::to_string(k) + "," + format_double(m.rate(j, k)) +
             "\n";
  return out;
}

StopSkipPattern parse_pattern_csv(const std::string& text) {
  const auto lines = lines_of(text);
  require(lines.size() >= 2, ErrorKind::Data, "pattern file needs a header and >= 1 train");
  const auto header = split(lines[0]);
  require(header.size() >= 3 && trim(header[0]) == "train", ErrorKind::Data,
          "pattern header must be train,1,2,...,J");
  const int J = static_cast<int>(header.size()) - 1;
  for (int j = 1; j <= J; ++j) {
    require(to_int(header[j], "pattern header") == j, ErrorKind::Data,
            "pattern header columns must be 1..J in order");
  }
  const int I = static_cast<int>(lines.size()) - 1;
  StopSkipPattern p(I, J);
  for (int i = 1; i <= I; ++i) {
    const auto f = split(lines[i]);
    require(static_cast<int>(f.size()) == J + 1, ErrorKind::Data,
            line_ref(i) + ": expected " + std::to_string(J + 1) + " fields");
    require(to_int(f[0], line_ref(i)) == i, ErrorKind::Data,
            line_ref(i) + ": trains must be listed 1..I in order");
    for (int j = 1; j <= J; ++j) {
      const auto v = to_int(f[j], line_ref(i));
      require(v == 0 || v == 1, ErrorKind::Data, line_ref(i) + ": entries must be 0 or 1");
      p.set(i, j, v == 1);
    }
  }
  return p;
}

StopSkipPattern load_pattern(const fs::path& path) {
  try {
    return parse_pattern_csv(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputMissing) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string pattern_csv(const StopSkipPattern& p) {
  std::string out = "train";
  for (int j = 1; j <= p.num_stations(); ++j) out += "," + std::to_string(j);
  out += "\n";
  for (int i = 1; i <= p.num_trains(); ++i) {
    out += std::to_string(i);
    for (int j = 1; j <= p.num_stations(); ++j) out += p.stops(i, j) ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

std::string schedule_csv(std::span<const ScheduleRow> rows) {
  std::string out = "train,station,arrival_s,departure_s,stopped\n";
  for (const ScheduleRow& r : rows) {
    out += std::to_string(r.train) + "," + std::to_string(r.station) + "," +
           format_fixed(r.arrival_s, 2) + "," + format_fixed(r.departure_s, 2) + "," +
           (r.stopped ? "1" : "0") + "\n";
  }
  return out;
}

std::string convergence_csv(std::span<const IterationRecord> history) {
  std::string out = "it,iter_best,global_best\n";
  for (const IterationRecord& r : history) {
    out += std::to_string(r.iteration) + "," + format_double(r.iteration_best) + "," +
           format_double(r.global_best) + "\n";
  }
  return out;
}

std::string loss_curve_csv(std::span<const EpochLoss> curve) {
  std::string out = "epoch,train_mse,valid_mse\n";
  for (const EpochLoss& e : curve) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_mse) + "," +
           format_double(e.valid_mse) + "\n";
  }
  return out;
}

json simulation_summary(const SimulationResult& r, const NominalBaseline& baseline,
                        double gamma) {
  json violations = json::array();
  for (const TrainStation& v : r.headway_violations) {
    violations.push_back({{"train", v.train}, {"station", v.station}});
  }
  json nonconv = json::array();
  for (const TrainStation& v : r.dwell_nonconverged) {
    nonconv.push_back({{"train", v.train}, {"station", v.station}});
  }
  json doc{
      {"in_vehicle_time_s", r.in_vehicle_time_s},
      {"waiting_time_s", r.waiting_time_s},
      {"last_train_left", r.last_train_left},
      {"feasible", r.feasible},
      {"headway_violations", violations},
      {"dwell_nonconverged", nonconv},
      {"dwell_diverged", r.dwell_diverged ? json{{"train", r.dwell_diverged->train},
                                                 {"station", r.dwell_diverged->station}}
                                          : json(nullptr)},
      {"baseline",
       {{"in_vehicle_time_s", baseline.t_in_vehicle_nom},
        {"waiting_time_s", baseline.t_wait_nom},
        {"last_train_left", baseline.w_left_nom}}},
      {"gamma", gamma},
  };
  try {
    const double z = normalize(r, baseline, gamma);
    doc["objective"] = std::isfinite(z) ? json(z) : json("rejected");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NormalizationUndefined) throw;
    doc["objective"] = nullptr;
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Transactions and OD series

std::int64_t parse_timestamp(const std::string& raw) {
  const std::string f = trim(raw);
  const bool iso = f.find('-', 1) != std::string::npos || f.find('T') != std::string::npos;
  if (!iso) return to_int(f, "timestamp");
  int Y = 0, M = 0, D = 0, h = 0, m = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const int got = std::sscanf(f.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &Y, &M, &D, &sep, &h,
                              &m, &s, &consumed);
  const std::string rest = f.substr(static_cast<std::size_t>(consumed));
  if (got != 7 || (sep != 'T' && sep != ' ') || !(rest.empty() || rest == "Z")) {
    fail(ErrorKind::Data, "unrecognized timestamp '" + raw + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)},
                           day{static_cast<unsigned>(D)}};
  require(ymd.ok() && h < 24 && m < 60 && s < 61, ErrorKind::Data,
          "invalid calendar timestamp '" + raw + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + m * 60 + s;
}

std::vector<Transaction> parse_transactions_csv(const std::string& text,
                                                std::size_t max_rows) {
  const auto lines = lines_of(text);
  require(!lines.empty(), ErrorKind::Data, "transaction file is empty");
  const auto header = split(lines[0]);
  require(header.size() == 4 && trim(header[0]) == "card_id" && trim(header[1]) == "timestamp" &&
              trim(header[2]) == "station" && trim(header[3]) == "type",
          ErrorKind::Data, "transaction header must be card_id,timestamp,station,type");
  if (lines.size() - 1 > max_rows) {
    fail(ErrorKind::Data, "transaction file has " + std::to_string(lines.size() - 1) +
                              " rows, above the limit of " + std::to_string(max_rows));
  }
  std::vector<Transaction> out;
  out.reserve(lines.size() - 1);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = split(lines[n]);
    require(f.size() == 4, ErrorKind::Data, line_ref(n) + ": expected 4 fields");
    Transaction t;
    t.card_id = trim(f[0]);
    require(!t.card_id.empty(), ErrorKind::Data, line_ref(n) + ": empty card id");
    try {
      t.timestamp_s = parse_timestamp(f[1]);
    } catch (const Error& e) {
      throw Error(e.kind(), line_ref(n) + ": " + e.what());
    }
    t.station = static_cast<int>(to_int(f[2], line_ref(n)));
    require(t.station >= 1, ErrorKind::Data, line_ref(n) + ": station must be >= 1");
    const std::string kind = trim(f[3]);
    if (kind == "entry") {
      t.kind = TxKind::Entry;
    } else if (kind == "exit") {
      t.kind = TxKind::Exit;
    } else {
      fail(ErrorKind::Data, line_ref(n) + ": type must be entry or exit");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Transaction> load_transactions(const fs::path& path, std::size_t max_rows) {
  try {
    return parse_transactions_csv(read_text(path), max_rows);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputMissing) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string transactions_csv(std::span<const Transaction> tx) {
  std::string out = "card_id,timestamp,station,type\n";
  for (const Transaction& t : tx) {
    out += t.card_id + "," + std::to_string(t.timestamp_s) + "," + std::to_string(t.station) +
           "," + (t.kind == TxKind::Entry ? "entry" : "exit") + "\n";
  }
  return out;
}

std::string od_long_csv(const OdSeries& series) {
  std::string out = "hour,origin,dest,count\n";
  const int J = series.num_stations;
  for (const OdHour& h : series.hours) {
    std::size_t pos = 0;
    for (int j = 1; j <= J; ++j) {
      for (int k = j + 1; k <= J; ++k, ++pos) {
        if (h.counts[pos] == 0.0) continue;
        out += std::to_string(h.label) + "," + std::to_string(j) + "," + std::to_string(k) +
               "," + format_double(h.counts[pos]) + "\n";
      }
    }
  }
  return out;
}

std::string od_compact_csv(const OdSeries& series) {
  std::string out = "hour";
  const int J = series.num_stations;
  for (int j = 1; j <= J; ++j)
    for (int k = j + 1; k <= J; ++k) out += "," + std::to_string(j) + "-" + std::to_string(k);
  out += "\n";
  for (const OdHour& h : series.hours) {
    out += std::to_string(h.label);
    for (double c : h.counts) out += "," + format_double(c);
    out += "\n";
  }
  return out;
}

OdSeries parse_od_compact_csv(const std::string& text) {
  const auto lines = lines_of(text);
  require(!lines.empty(), ErrorKind::Data, "OD series file is empty");
  const auto header = split(lines[0]);
  require(header.size() >= 2 && trim(header[0]) == "hour", ErrorKind::Data,
          "OD series header must start with 'hour'");
  const auto width = header.size() - 1;
  int J = 2;
  while (static_cast<std::size_t>(DemandMatrix::flat_size(J)) < width) ++J;
  require(static_cast<std::size_t>(DemandMatrix::flat_size(J)) == width, ErrorKind::Data,
          "OD series has " + std::to_string(width) +
              " columns, which is not J(J-1)/2 for any J");
  std::size_t col = 1;
  for (int j = 1; j <= J; ++j) {
    for (int k = j + 1; k <= J; ++k, ++col) {
      require(trim(header[col]) == std::to_string(j) + "-" + std::to_string(k),
              ErrorKind::Data, "OD series column " + std::to_string(col) + " should be " +
                                   std::to_string(j) + "-" + std::to_string(k));
    }
  }
  OdSeries s;
  s.num_stations = J;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = split(lines[n]);
    require(f.size() == width + 1, ErrorKind::Data,
            line_ref(n) + ": expected " + std::to_string(width + 1) + " fields");
    OdHour h;
    h.label = to_int(f[0], line_ref(n));
    h.counts.reserve(width);
    for (std::size_t c = 1; c <= width; ++c) h.counts.push_back(to_double(f[c], line_ref(n)));
    s.hours.push_back(std::move(h));
  }
  s.validate();
  return s;
}

OdSeries load_od_compact(const fs::path& path) {
  try {
    return parse_od_compact_csv(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputMissing) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string trips_csv(std::span<const Trip> trips) {
  std::string out = "card_id,origin,dest,entry_s,exit_s\n";
  for (const Trip& t : trips) {
    out += t.card_id + "," + std::to_string(t.origin) + "," + std::to_string(t.dest) + "," +
           std::to_string(t.entry_s) + "," + std::to_string(t.exit_s) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic spec

namespace {

PeakProfile parse_peak(const json& j, const std::string& where, PeakProfile p) {
  check_keys(j, {"center_hour", "width_hours", "amplitude"}, where);
  read_opt(j, "center_hour", p.center_hour, where);
  read_opt(j, "width_hours", p.width_hours, where);
  read_opt(j, "amplitude", p.amplitude, where);
  return p;
}

json peak_json(const PeakProfile& p) {
  return {{"center_hour", p.center_hour}, {"width_hours", p.width_hours},
          {"amplitude", p.amplitude}};
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const json& doc) {
  check_keys(doc,
             {"num_days", "num_stations", "first_hour", "end_hour", "start_epoch_s", "base_rate",
              "end_weight", "morning", "evening", "groups", "day_variation",
              "seconds_per_station", "seed"},
             "synthetic spec");
  SyntheticSpec s;
  const std::string w = "synthetic spec";
  read_opt(doc, "num_days", s.num_days, w);
  read_opt(doc, "num_stations", s.num_stations, w);
  read_opt(doc, "first_hour", s.first_hour, w);
  read_opt(doc, "end_hour", s.end_hour, w);
  read_opt(doc, "start_epoch_s", s.start_epoch_s, w);
  read_opt(doc, "base_rate", s.base_rate, w);
  read_opt(doc, "end_weight", s.end_weight, w);
  read_opt(doc, "day_variation", s.day_variation, w);
  read_opt(doc, "seconds_per_station", s.seconds_per_station, w);
  read_opt(doc, "seed", s.seed, w);
  if (doc.contains("morning")) s.morning = parse_peak(doc.at("morning"), "morning", s.morning);
  if (doc.contains("evening")) s.evening = parse_peak(doc.at("evening"), "evening", s.evening);
  if (doc.contains("groups")) {
    require(doc.at("groups").is_array(), ErrorKind::InvalidConfig, "groups must be an array");
    for (const json& g : doc.at("groups")) {
      check_keys(g, {"first", "last", "morning_weight", "evening_weight"}, "group");
      StationGroup sg;
      read_req(g, "first", sg.first, "group");
      read_req(g, "last", sg.last, "group");
      read_opt(g, "morning_weight", sg.morning_weight, "group");
      read_opt(g, "evening_weight", sg.evening_weight, "group");
      s.groups.push_back(sg);
    }
  }
  s.validate();
  return s;
}

json to_json(const SyntheticSpec& s) {
  json groups = json::array();
  for (const StationGroup& g : s.groups) {
    groups.push_back({{"first", g.first},
                      {"last", g.last},
                      {"morning_weight", g.morning_weight},
                      {"evening_weight", g.evening_weight}});
  }
  return {{"num_days", s.num_days},
          {"num_stations", s.num_stations},
          {"first_hour", s.first_hour},
          {"end_hour", s.end_hour},
          {"start_epoch_s", s.start_epoch_s},
          {"base_rate", s.base_rate},
          {"end_weight", s.end_weight},
          {"morning", peak_json(s.morning)},
          {"evening", peak_json(s.evening)},
          {"groups", groups},
          {"day_variation", s.day_variation},
          {"seconds_per_station", s.seconds_per_station},
          {"seed", s.seed}};
}

// ---------------------------------------------------------------------------
// Checkpoint

namespace {

const char* kGateNames[4] = {"f", "h", "u", "o"};

struct Block {
  std::string name;
  std::size_t offset;
  int rows;
  int cols;
};

std::vector<Block> blocks_of(const LstmModel& m) {
  const LstmShape& s = m.shape();
  const ParamLayout& L = m.layout();
  std::vector<Block> out;
  for (int gi = 0; gi < 4; ++gi) {
    const Gate g = static_cast<Gate>(gi);
    const std::string n = kGateNames[gi];
    out.push_back({"W_" + n, L.w(g), s.hidden, s.features});
    out.push_back({"R_" + n, L.r(g), s.hidden, s.hidden});
    out.push_back({"b_" + n, L.b(g), s.hidden, 1});
  }
  if (s.dense > 0) {
    out.push_back({"W_mid", L.w_mid, s.dense, s.hidden});
    out.push_back({"b_mid", L.b_mid, s.dense, 1});
  }
  out.push_back({"W_out", L.w_out, s.features, s.head_input()});
  out.push_back({"b_out", L.b_out, s.features, 1});
  return out;
}

}  // namespace

json to_json(const LstmModel& m) {
  json blocks = json::object();
  for (const Block& b : blocks_of(m)) {
    const auto first = m.params().begin() + static_cast<std::ptrdiff_t>(b.offset);
    blocks[b.name] = {{"rows", b.rows},
                      {"cols", b.cols},
                      {"data", std::vector<double>(first, first + b.rows * b.cols)}};
  }
  return {{"format", "skipstop-lstm"},
          {"format_version", kCheckpointVersion},
          {"features", m.shape().features},
          {"hidden", m.shape().hidden},
          {"dense", m.shape().dense},
          {"lookback", m.lookback},
          {"lead", m.lead},
          {"scale", {{"min", m.scale.min}, {"max", m.scale.max}}},
          {"blocks", blocks}};
}

LstmModel parse_checkpoint(const json& doc) {
  try {
    require(doc.value("format", "") == "skipstop-lstm", ErrorKind::Data,
            "not a skipstop LSTM checkpoint");
    require(doc.at("format_version").get<int>() == kCheckpointVersion, ErrorKind::Data,
            "unsupported checkpoint format_version");
    LstmShape shape{doc.at("features").get<int>(), doc.at("hidden").get<int>(),
                    doc.at("dense").get<int>()};
    LstmModel m(shape);
    m.lookback = doc.at("lookback").get<int>();
    m.lead = doc.at("lead").get<int>();
    m.scale.min = doc.at("scale").at("min").get<std::vector<double>>();
    m.scale.max = doc.at("scale").at("max").get<std::vector<double>>();
    require(m.scale.min.size() == static_cast<std::size_t>(shape.features) &&
                m.scale.max.size() == m.scale.min.size(),
            ErrorKind::Data, "checkpoint scale width mismatch");
    const json& blocks = doc.at("blocks");
    for (const Block& b : blocks_of(m)) {
      const json& jb = blocks.at(b.name);
      require(jb.at("rows").get<int>() == b.rows && jb.at("cols").get<int>() == b.cols,
              ErrorKind::Data, "checkpoint block " + b.name + " has the wrong shape");
      const auto data = jb.at("data").get<std::vector<double>>();
      require(data.size() == static_cast<std::size_t>(b.rows) * b.cols, ErrorKind::Data,
              "checkpoint block " + b.name + " has the wrong size");
      std::copy(data.begin(), data.end(),
                m.params().begin() + static_cast<std::ptrdiff_t>(b.offset));
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, std::string("malformed checkpoint: ") + e.what());
  }
}

LstmModel load_checkpoint(const fs::path& path) {
  try {
    return parse_checkpoint(read_json(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputMissing) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace skipstop::io
