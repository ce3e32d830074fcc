#pragma once

// Smart-card transactions -> trips -> hourly OD series, plus a seeded
// synthetic generator with known ground truth.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skipstop/line_model.hpp"
#include "skipstop/od_series.hpp"

namespace skipstop {

enum class TxKind { Entry, Exit };

struct Transaction {
  std::string card_id;
  std::int64_t timestamp_s = 0;
  int station = 0;
  TxKind kind = TxKind::Entry;

  bool operator==(const Transaction&) const = default;
};

struct Trip {
  std::string card_id;
  int origin = 0;
  int dest = 0;
  std::int64_t entry_s = 0;
  std::int64_t exit_s = 0;

  bool operator==(const Trip&) const = default;
};

enum class RejectReason {
  DoubleEntry,          // entry followed by another entry of the same card
  ExitWithoutEntry,     // exit with no open entry
  NonPositiveDuration,  // exit not after its entry
  WrongDirection,       // destination not downstream of origin
  UnmatchedEntry,       // entry never closed by an exit
};

const char* to_string(RejectReason reason);

struct RejectedRecord {
  Transaction record;
  RejectReason reason;
};

struct PairingResult {
  std::vector<Trip> trips;  // ordered by (card_id, entry_s)
  std::vector<RejectedRecord> rejected;
};

/// Greedy per-card pairing: each entry is closed by the next exit of the
/// same card. Records are sorted by (card, time) first; at equal times an
/// entry sorts before an exit.
PairingResult pair_trips(std::vector<Transaction> transactions);

/// Hour labels of the daily service window [first_hour, end_hour) over
/// `num_days` days starting at the midnight `start_epoch_s`.
std::vector<std::int64_t> service_hours(std::int64_t start_epoch_s, int num_days,
                                        int first_hour, int end_hour);

/// Trip counts per hour of entry. Every trip must enter within one of the
/// given hours (Error(Data) otherwise).
OdSeries aggregate_hourly(std::span<const Trip> trips,
                          std::span<const std::int64_t> hour_labels, int num_stations);

struct PeakProfile {
  double center_hour = 8.0;
  double width_hours = 1.5;
  double amplitude = 3.0;
};

/// Destination stations [first, last] weight the two daily peaks.
struct StationGroup {
  int first = 1;
  int last = 1;
  double morning_weight = 1.0;
  double evening_weight = 1.0;
};

struct SyntheticSpec {
  int num_days = 30;
  int num_stations = 30;
  int first_hour = 5;
  int end_hour = 24;
  std::int64_t start_epoch_s = 1524268800;  // 2018-04-21T00:00:00Z
  /// Off-peak trips per hour between two mid-line stations.
  double base_rate = 2.0;
  /// Station attractiveness at the line ends relative to the middle (1).
  double end_weight = 0.3;
  PeakProfile morning{8.0, 1.5, 3.0};
  PeakProfile evening{17.5, 1.5, 4.0};
  std::vector<StationGroup> groups;
  /// Day-level intensity factors are drawn uniformly in 1 +- day_variation.
  double day_variation = 0.0;
  /// Travel-time model for exit timestamps.
  double seconds_per_station = 120.0;
  std::uint64_t seed = 1;

  void validate() const;

  /// Stations 1-10 lean to the morning peak, 21-30 to the evening peak,
  /// scaled to num_stations.
  static std::vector<StationGroup> default_groups(int num_stations);
  std::vector<double> day_factors() const;
  /// Expected trips per hour for (day, hour of day, origin, dest).
  double expected_rate(int day, int hour_of_day, int origin, int dest,
                       const std::vector<double>& factors) const;
};

struct SyntheticData {
  std::vector<Transaction> transactions;  // ordered by (timestamp, card)
  std::vector<Trip> trips;                // ordered by (card_id, entry_s)
  OdSeries counts;                        // sampled tallies
  OdSeries rates;                         // expected values used for sampling
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Expected per-second demand of one hour of the synthetic model.
DemandMatrix synthetic_demand(const SyntheticSpec& spec, int day, int hour_of_day);

}  // namespace skipstop
