#include "skipstop/line_model.hpp"

#include <algorithm>
#include <cmath>

#include "skipstop/error.hpp"

namespace skipstop {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::InvalidConfig,
         std::string(name) + " must be finite and strictly positive");
  }
}

void require_nonnegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::InvalidConfig,
         std::string(name) + " must be finite and nonnegative");
  }
}

}  // namespace

void LineConfig::validate() const {
  require(num_stations >= 2, ErrorKind::InvalidConfig, "num_stations must be >= 2");
  require(num_trains >= 1, ErrorKind::InvalidConfig, "num_trains must be >= 1");
  require(block_travel_time_s.size() == static_cast<std::size_t>(num_stations - 1),
          ErrorKind::InvalidConfig,
          "block_travel_time_s needs num_stations - 1 = " +
              std::to_string(num_stations - 1) + " entries, got " +
              std::to_string(block_travel_time_s.size()));
  for (double r : block_travel_time_s) require_positive(r, "block travel time");
  for (std::size_t n = 0; n < transfer_stations.size(); ++n) {
    const int s = transfer_stations[n];
    require(s >= 1 && s <= num_stations, ErrorKind::InvalidConfig,
            "transfer station " + std::to_string(s) + " outside 1.." +
                std::to_string(num_stations));
    require(n == 0 || transfer_stations[n - 1] < s, ErrorKind::InvalidConfig,
            "transfer_stations must be sorted and unique");
  }
  require_positive(dispatch_headway_s, "dispatch_headway_s");
  require_positive(min_arrival_gap_s, "min_arrival_gap_s");
  require(dispatch_headway_s > min_arrival_gap_s, ErrorKind::InvalidConfig,
          "dispatch_headway_s must exceed min_arrival_gap_s");
  require(capacity > 0, ErrorKind::InvalidConfig, "capacity must be positive");
  require(num_doors > 0, ErrorKind::InvalidConfig, "num_doors must be positive");
  require_positive(dwell_criteria_s, "dwell_criteria_s");
  require_positive(dwell_max_s, "dwell_max_s");
  require_positive(holding_speed_mps, "holding_speed_mps");
  require_positive(accel_mps2, "accel_mps2");
  require_positive(decel_mps2, "decel_mps2");
  require_nonnegative(dwell_coeffs.base_s, "dwell coefficient 1");
  require_nonnegative(dwell_coeffs.per_alighting_s, "dwell coefficient 2");
  require_nonnegative(dwell_coeffs.per_boarding_s, "dwell coefficient 3");
  require_nonnegative(dwell_coeffs.crowding_s, "dwell coefficient 4");
  require_positive(gamma, "gamma");
  require(std::isfinite(horizon_start_s), ErrorKind::InvalidConfig,
          "horizon_start_s must be finite");
}

bool LineConfig::is_transfer(int station) const {
  return std::binary_search(transfer_stations.begin(), transfer_stations.end(),
                            station);
}

bool LineConfig::is_mandatory_stop(int station) const {
  return station == 1 || station == num_stations || is_transfer(station);
}

double LineConfig::stop_penalty_s() const {
  return compute_skip_savings(holding_speed_mps, accel_mps2, decel_mps2,
                              dwell_criteria_s)
      .stop_penalty_s;
}

double LineConfig::lead_departure_s(int station) const {
  if (accumulation_start == AccumulationStart::Horizon) return horizon_start_s;
  const double dwell = dwell_criteria_s + stop_penalty_s();
  double t = horizon_start_s;
  for (int j = 2; j <= station; ++j) t += block_travel_time_s[j - 2] + dwell;
  return t;
}

DemandMatrix::DemandMatrix(int num_stations)
    : num_stations_(num_stations),
      rates_(static_cast<std::size_t>(num_stations) * num_stations, 0.0) {
  require(num_stations >= 2, ErrorKind::Shape, "demand matrix needs >= 2 stations");
}

void DemandMatrix::set_rate(int origin, int dest, double per_second) {
  require(origin >= 1 && dest <= num_stations_ && origin < dest, ErrorKind::Shape,
          "demand entry (" + std::to_string(origin) + ", " + std::to_string(dest) +
              ") is not strictly upper-triangular");
  require(per_second >= 0.0 && std::isfinite(per_second), ErrorKind::Data,
          "demand rate must be finite and nonnegative");
  rates_[index(origin, dest)] = per_second;
}

double DemandMatrix::row_total(int origin) const {
  double sum = 0.0;
  for (int k = origin + 1; k <= num_stations_; ++k) sum += rate(origin, k);
  return sum;
}

double DemandMatrix::total() const {
  double sum = 0.0;
  for (int j = 1; j <= num_stations_; ++j) sum += row_total(j);
  return sum;
}

std::vector<double> DemandMatrix::flatten() const {
  std::vector<double> out;
  out.reserve(flat_size(num_stations_));
  for (int j = 1; j <= num_stations_; ++j)
    for (int k = j + 1; k <= num_stations_; ++k) out.push_back(rate(j, k));
  return out;
}

DemandMatrix DemandMatrix::from_flat(int num_stations, const std::vector<double>& upper,
                                     double scale) {
  require(upper.size() == static_cast<std::size_t>(flat_size(num_stations)),
          ErrorKind::Shape,
          "flattened demand has " + std::to_string(upper.size()) +
              " entries, expected " + std::to_string(flat_size(num_stations)));
  DemandMatrix m(num_stations);
  std::size_t n = 0;
  for (int j = 1; j <= num_stations; ++j)
    for (int k = j + 1; k <= num_stations; ++k) m.set_rate(j, k, upper[n++] * scale);
  return m;
}

StopSkipPattern::StopSkipPattern(int num_trains, int num_stations, bool stop)
    : num_trains_(num_trains),
      num_stations_(num_stations),
      bits_(static_cast<std::size_t>(num_trains) * num_stations, stop ? 1 : 0) {
  require(num_trains >= 1 && num_stations >= 2, ErrorKind::Shape,
          "pattern needs >= 1 train and >= 2 stations");
}

int StopSkipPattern::skip_count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), 0));
}

std::string Violation::describe() const {
  const char* what = "";
  switch (kind) {
    case ViolationKind::ConsecutiveSkip: what = "consecutive-skip"; break;
    case ViolationKind::TransferSkip: what = "transfer-skip"; break;
    case ViolationKind::TerminalSkip: what = "terminal-skip"; break;
  }
  return std::string(what) + " at train " + std::to_string(train) + ", station " +
         std::to_string(station);
}

std::vector<Violation> validate_pattern(const StopSkipPattern& pattern,
                                        const LineConfig& config) {
  require(pattern.num_trains() == config.num_trains &&
              pattern.num_stations() == config.num_stations,
          ErrorKind::Shape,
          "pattern is " + std::to_string(pattern.num_trains()) + "x" +
              std::to_string(pattern.num_stations()) + ", config expects " +
              std::to_string(config.num_trains) + "x" +
              std::to_string(config.num_stations));
  std::vector<Violation> out;
  for (int i = 1; i <= pattern.num_trains(); ++i) {
    for (int j = 1; j <= pattern.num_stations(); ++j) {
      if (pattern.stops(i, j)) continue;
      if (j == 1 || j == pattern.num_stations()) {
        out.push_back({ViolationKind::TerminalSkip, i, j});
      } else if (config.is_transfer(j)) {
        out.push_back({ViolationKind::TransferSkip, i, j});
      }
      if (i > 1 && !pattern.stops(i - 1, j)) {
        out.push_back({ViolationKind::ConsecutiveSkip, i, j});
      }
    }
  }
  return out;
}

SkipSavings compute_skip_savings(double holding_speed_mps, double accel_mps2,
                                 double decel_mps2, double dwell_criteria_s) {
  require_positive(holding_speed_mps, "holding speed");
  require_positive(accel_mps2, "acceleration rate");
  require_positive(decel_mps2, "deceleration rate");
  require_nonnegative(dwell_criteria_s, "criteria dwell");
  const double v = holding_speed_mps;
  // Braking from v to rest takes v/a but covers a distance that would take
  // only (v^2 / 2a) / v at cruise speed; same for accelerating back.
  const double braking_loss = v / decel_mps2 - (v * v / (2.0 * decel_mps2)) / v;
  const double accel_loss = v / accel_mps2 - (v * v / (2.0 * accel_mps2)) / v;
  const double penalty = braking_loss + accel_loss;
  return {penalty, penalty + dwell_criteria_s};
}

}  // namespace skipstop
