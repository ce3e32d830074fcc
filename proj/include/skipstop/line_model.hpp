#pragma once

// Static description of one direction of one rail line and the shared
// domain types used by the simulator and optimizer.
//
// Every public interface uses 1-based train and station indices.

#include <cstdint>
#include <string>
#include <vector>

namespace skipstop {

/// Coefficients of the load-dependent dwell model:
///   base + per_alighting * n_alight + per_boarding * n_board
///        + crowding * (waiting / doors)^3 * n_board
struct DwellCoefficients {
  double base_s = 2.0;
  double per_alighting_s = 0.03;
  double per_boarding_s = 0.05;
  double crowding_s = 0.001;
};

/// When passengers start accumulating on each platform.
enum class AccumulationStart {
  /// Every platform is empty at the horizon start.
  Horizon,
  /// Platforms were last cleared by an unloaded all-stop train dispatched
  /// one headway before train 1 (running time plus criteria dwell).
  PreviousTrain,
};

struct LineConfig {
  int num_stations = 0;
  int num_trains = 0;
  std::vector<double> block_travel_time_s;  // num_stations - 1 entries
  std::vector<int> transfer_stations;       // sorted, unique
  double dispatch_headway_s = 300.0;
  double min_arrival_gap_s = 60.0;
  int capacity = 1348;
  int num_doors = 28;
  double dwell_criteria_s = 25.0;
  double dwell_max_s = 120.0;  // carried through, not enforced anywhere
  double holding_speed_mps = 19.44;
  double accel_mps2 = 0.7;
  double decel_mps2 = 0.7;
  DwellCoefficients dwell_coeffs;
  double gamma = 2.0;
  double horizon_start_s = 0.0;
  bool strict_headway = false;
  AccumulationStart accumulation_start = AccumulationStart::Horizon;

  /// Throws Error(InvalidConfig) describing the first broken invariant.
  void validate() const;

  bool is_transfer(int station) const;
  /// Terminus, final station and transfer stations can never be skipped.
  bool is_mandatory_stop(int station) const;

  /// Time lost by one stop relative to running through at cruise speed.
  double stop_penalty_s() const;

  /// Departure of the virtual train preceding train 1 from `station`.
  double lead_departure_s(int station) const;
};

/// Station-to-station arrival rates u(j,k) in passengers per second.
/// Only entries with k > j may be nonzero.
class DemandMatrix {
 public:
  DemandMatrix() = default;
  explicit DemandMatrix(int num_stations);

  int num_stations() const { return num_stations_; }

  double rate(int origin, int dest) const {
    return rates_[index(origin, dest)];
  }
  void set_rate(int origin, int dest, double per_second);

  /// Total arrival rate at a station over all destinations.
  double row_total(int origin) const;
  double total() const;

  /// Strictly upper-triangular entries in row-major (j, k > j) order.
  std::vector<double> flatten() const;
  static DemandMatrix from_flat(int num_stations, const std::vector<double>& upper,
                                double scale = 1.0);
  static int flat_size(int num_stations) {
    return num_stations * (num_stations - 1) / 2;
  }

  bool operator==(const DemandMatrix&) const = default;

 private:
  std::size_t index(int origin, int dest) const {
    return static_cast<std::size_t>(origin - 1) * num_stations_ + (dest - 1);
  }

  int num_stations_ = 0;
  std::vector<double> rates_;
};

/// Binary stop (1) / skip (0) decision per train and station.
class StopSkipPattern {
 public:
  StopSkipPattern() = default;
  StopSkipPattern(int num_trains, int num_stations, bool stop = true);

  static StopSkipPattern all_stop(int num_trains, int num_stations) {
    return {num_trains, num_stations, true};
  }

  int num_trains() const { return num_trains_; }
  int num_stations() const { return num_stations_; }

  bool stops(int train, int station) const {
    return bits_[index(train, station)] != 0;
  }
  void set(int train, int station, bool stop) {
    bits_[index(train, station)] = stop ? 1 : 0;
  }
  int skip_count() const;

  /// Layer order used by the optimizer: train-major, station-minor.
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const StopSkipPattern&) const = default;

 private:
  std::size_t index(int train, int station) const {
    return static_cast<std::size_t>(train - 1) * num_stations_ + (station - 1);
  }

  int num_trains_ = 0;
  int num_stations_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class ViolationKind { ConsecutiveSkip, TransferSkip, TerminalSkip };

struct Violation {
  ViolationKind kind;
  int train;
  int station;

  std::string describe() const;
  bool operator==(const Violation&) const = default;
};

/// Empty iff no two successive trains skip the same station, no transfer
/// station is skipped and both terminals are served. A consecutive-skip
/// violation is reported at the second train of the pair.
std::vector<Violation> validate_pattern(const StopSkipPattern& pattern,
                                        const LineConfig& config);

struct SkipSavings {
  double stop_penalty_s;  // deceleration + acceleration loss
  double total_s;         // stop_penalty_s + criteria dwell
};

/// Time saved by passing a station at cruise speed instead of braking to a
/// stop, dwelling for `dwell_criteria_s` and accelerating back.
SkipSavings compute_skip_savings(double holding_speed_mps, double accel_mps2,
                                 double decel_mps2, double dwell_criteria_s);

}  // namespace skipstop
