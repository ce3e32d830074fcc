#pragma once

// Deterministic passenger-flow simulation of a fleet of trains running one
// direction of a line under a given stop/skip pattern.
//
// Passenger quantities are real-valued (fluid approximation): arrivals are
// rate * elapsed time and capacity shortfalls are split proportionally over
// destinations.

#include <optional>
#include <utility>
#include <vector>

#include "skipstop/line_model.hpp"

namespace skipstop {

struct TrainStationState {
  double arrival_s = 0.0;
  double departure_s = 0.0;
  double dwell_s = 0.0;  // zero when the station is skipped
  bool stopped = true;
  bool dwell_converged = true;

  double n_alight = 0.0;
  double n_board = 0.0;
  double n_remain_cap = 0.0;  // capacity left after alighting, before boarding
  double n_onboard_after_dep = 0.0;

  // Per-destination vectors are indexed by destination station - 1.
  double w_wait = 0.0;
  std::vector<double> w_wait_by_dest;
  double w_want2 = 0.0;
  std::vector<double> w_want2_by_dest;
  double w_left = 0.0;  // left behind for lack of capacity
  std::vector<double> w_left_by_dest;  // left for any reason
  double w_left_total = 0.0;
  std::vector<double> board_by_dest;
};

struct TrainStation {
  int train;
  int station;
  bool operator==(const TrainStation&) const = default;
};

struct SimulationResult {
  int num_trains = 0;
  int num_stations = 0;
  std::vector<TrainStationState> states;  // train-major

  double in_vehicle_time_s = 0.0;  // passenger-seconds
  double waiting_time_s = 0.0;     // passenger-seconds
  double last_train_left = 0.0;    // capacity left-behind of the last train

  /// Where the minimum arrival gap had to be enforced by holding the train
  /// (or, at the terminus, where the fixed dispatch made it impossible).
  std::vector<TrainStation> headway_violations;
  /// Stops whose dwell iteration hit the iteration cap.
  std::vector<TrainStation> dwell_nonconverged;
  /// First stop where the dwell iteration ran off to infinity. The
  /// simulation stops there and the totals are incomplete.
  std::optional<TrainStation> dwell_diverged;
  /// False under strict headway when any violation occurred, or when the
  /// dwell diverged.
  bool feasible = true;

  std::optional<double> objective;

  const TrainStationState& at(int train, int station) const {
    return states[static_cast<std::size_t>(train - 1) * num_stations + (station - 1)];
  }
};

/// Objective totals without the per-station trajectory.
struct CostTotals {
  double in_vehicle_time_s = 0.0;
  double waiting_time_s = 0.0;
  double last_train_left = 0.0;
  bool feasible = true;
  bool diverged = false;
};

struct NominalBaseline {
  double t_in_vehicle_nom = 0.0;
  double t_wait_nom = 0.0;
  double w_left_nom = 0.0;
};

struct DwellSolver {
  double tolerance_s = 0.01;
  int max_iterations = 20;
};

SimulationResult simulate(const LineConfig& config, const DemandMatrix& demand,
                          const StopSkipPattern& pattern, DwellSolver solver = {});

/// Same recursion as simulate(), keeping only the objective totals.
CostTotals evaluate(const LineConfig& config, const DemandMatrix& demand,
                    const StopSkipPattern& pattern, DwellSolver solver = {});

NominalBaseline nominal_baseline(const LineConfig& config, const DemandMatrix& demand);

/// Weighted normalized objective. Returns +infinity when the baseline last
/// train leaves nobody behind but the candidate does, or when the dwell
/// diverged.
double normalize(const CostTotals& totals, const NominalBaseline& baseline,
                 double gamma);
double normalize(const SimulationResult& result, const NominalBaseline& baseline,
                 double gamma);

struct ScheduleRow {
  int train;
  int station;
  double arrival_s;
  double departure_s;
  bool stopped;
};

std::vector<ScheduleRow> export_schedule(const SimulationResult& result);

}  // namespace skipstop
