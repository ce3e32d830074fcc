#include "skipstop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skipstop/error.hpp"

namespace skipstop {

namespace {

// Arrival gaps this close to the minimum count as meeting it. A train held
// at one station and then running exactly like its leader reaches every
// later station at the minimum gap, where rounding would otherwise decide.
constexpr double kGapSlack_s = 1e-6;

// Passenger exchange of one train at one station for a given departure
// time. Per-destination buffers are indexed by destination - 1.
struct Exchange {
  double gap = 0.0;  // departure minus previous train's departure
  double wait = 0.0;
  double want2 = 0.0;
  double alight = 0.0;
  double remain = 0.0;
  double board = 0.0;
  double left_capacity = 0.0;
  double left_total = 0.0;
  std::vector<double> wait_k, want2_k, left_k, board_k;

  explicit Exchange(int num_stations)
      : wait_k(num_stations, 0.0),
        want2_k(num_stations, 0.0),
        left_k(num_stations, 0.0),
        board_k(num_stations, 0.0) {}
};

class Kernel {
 public:
  Kernel(const LineConfig& config, const DemandMatrix& demand,
         const StopSkipPattern& pattern, DwellSolver solver)
      : cfg_(config),
        demand_(demand),
        pattern_(pattern),
        solver_(solver),
        num_stations_(config.num_stations),
        stop_penalty_(config.stop_penalty_s()),
        prev_departure_(num_stations_, 0.0),
        prev_left_(static_cast<std::size_t>(num_stations_) * num_stations_, 0.0),
        prev_left_total_(num_stations_, 0.0),
        onboard_by_dest_(num_stations_, 0.0),
        row_total_(num_stations_, 0.0),
        ex_(num_stations_),
        trial_(num_stations_) {
    for (int j = 1; j <= num_stations_; ++j) {
      row_total_[j - 1] = demand.row_total(j);
      prev_departure_[j - 1] = config.lead_departure_s(j);
    }
  }

  void run(SimulationResult* full, CostTotals& totals) {
    const int trains = cfg_.num_trains;
    const int stations = num_stations_;
    if (full) {
      full->num_trains = trains;
      full->num_stations = stations;
      full->states.assign(static_cast<std::size_t>(trains) * stations, {});
    }
    double terminus_departure = cfg_.horizon_start_s;
    bool any_violation = false;

    for (int i = 1; i <= trains; ++i) {
      std::fill(onboard_by_dest_.begin(), onboard_by_dest_.end(), 0.0);
      double onboard = 0.0;
      double prev_station_departure = 0.0;
      double prev_station_onboard = 0.0;

      for (int j = 1; j <= stations; ++j) {
        const bool stop = pattern_.stops(i, j);
        const double prev_dep = prev_departure_[j - 1];
        double arrival = 0.0;
        double departure = 0.0;
        double dwell = 0.0;
        bool converged = true;
        bool violated = false;

        if (j == 1) {
          // Dispatch from the terminus is fixed; the dwell only sets the
          // arrival time at the platform.
          terminus_departure += cfg_.dispatch_headway_s;
          departure = terminus_departure;
          exchange(i, j, departure, onboard, ex_);
          dwell = dwell_time(ex_);
          arrival = departure - dwell;
          violated = arrival < prev_dep + cfg_.min_arrival_gap_s - kGapSlack_s;
        } else {
          arrival = prev_station_departure + cfg_.block_travel_time_s[j - 2];
          const double earliest = prev_dep + cfg_.min_arrival_gap_s;
          if (arrival < earliest - kGapSlack_s) {
            arrival = earliest;
            violated = true;
          }
          if (stop) {
            converged = settle_dwell(i, j, arrival, onboard, dwell);
            if (!std::isfinite(dwell)) {
              // The crowding term outgrew the dwell it feeds; nothing after
              // this stop is meaningful.
              totals.diverged = true;
              totals.feasible = false;
              if (full) {
                full->dwell_diverged = TrainStation{i, j};
                full->feasible = false;
              }
              return;
            }
            departure = arrival + dwell;
          } else {
            departure = arrival;
            exchange(i, j, departure, onboard, ex_);
          }
        }

        if (violated) {
          any_violation = true;
          if (full) full->headway_violations.push_back({i, j});
        }
        if (!converged && full) full->dwell_nonconverged.push_back({i, j});

        // Waiting time of passengers on the platform for this train.
        if (j < stations) {
          totals.waiting_time_s += prev_left_total_[j - 1] * ex_.gap +
                                   0.5 * row_total_[j - 1] * ex_.gap * ex_.gap;
        }
        // In-vehicle time on the block ending here: running time for all
        // riders plus this stop's dwell for those staying aboard.
        if (j > 1) {
          totals.in_vehicle_time_s +=
              prev_station_onboard * cfg_.block_travel_time_s[j - 2] +
              (stop ? (prev_station_onboard - ex_.alight) * dwell : 0.0);
        }

        onboard = onboard - ex_.alight + ex_.board;
        onboard_by_dest_[j - 1] = 0.0;
        double* left_row = &prev_left_[static_cast<std::size_t>(j - 1) * stations];
        for (int k = j + 1; k <= stations; ++k) {
          onboard_by_dest_[k - 1] += ex_.board_k[k - 1];
          left_row[k - 1] = ex_.left_k[k - 1];
        }
        prev_left_total_[j - 1] = ex_.left_total;
        prev_departure_[j - 1] = departure;
        if (i == trains) totals.last_train_left += ex_.left_capacity;

        if (full) record(*full, i, j, stop, arrival, departure, dwell, converged, onboard);

        prev_station_departure = departure;
        prev_station_onboard = onboard;
      }
    }
    totals.feasible = !(cfg_.strict_headway && any_violation);
    if (full) {
      full->in_vehicle_time_s = totals.in_vehicle_time_s;
      full->waiting_time_s = totals.waiting_time_s;
      full->last_train_left = totals.last_train_left;
      full->feasible = totals.feasible;
    }
  }

 private:
  // Passenger recursion for train i at station j departing at `departure`,
  // with `onboard` riders arriving from upstream.
  void exchange(int i, int j, double departure, double onboard, Exchange& ex) const {
    const int stations = num_stations_;
    const bool stop = pattern_.stops(i, j);
    const double* prev_left = &prev_left_[static_cast<std::size_t>(j - 1) * stations];

    ex.gap = departure - prev_departure_[j - 1];
    ex.wait = 0.0;
    ex.want2 = 0.0;
    for (int k = j + 1; k <= stations; ++k) {
      const double w = prev_left[k - 1] + demand_.rate(j, k) * ex.gap;
      ex.wait_k[k - 1] = w;
      ex.wait += w;
      // Riders only want a train that serves both their origin and their
      // destination. (The source formula indexes the destination decision
      // with a stray m; k is meant.)
      const double want = (stop && pattern_.stops(i, k)) ? w : 0.0;
      ex.want2_k[k - 1] = want;
      ex.want2 += want;
    }

    // Nobody boards towards a skipped station, so riders for j are only
    // aboard when the train stops here.
    ex.alight = onboard_by_dest_[j - 1];
    ex.remain = static_cast<double>(cfg_.capacity) - onboard + ex.alight;
    // The source writes min(remain - want2); the minimum of the two is meant.
    ex.board = std::min(ex.remain, ex.want2);
    ex.left_capacity = stop ? ex.want2 - ex.board : 0.0;

    ex.left_total = 0.0;
    for (int k = j + 1; k <= stations; ++k) {
      double left;
      if (stop && pattern_.stops(i, k)) {
        // Capacity shortfall split in proportion to who wanted to board.
        // (The source indexes this decision as y_{j,k}; y_{i,k} is meant.)
        left = ex.want2 > 0.0 ? ex.left_capacity * (ex.want2_k[k - 1] / ex.want2) : 0.0;
      } else {
        left = ex.wait_k[k - 1];
      }
      ex.left_k[k - 1] = left;
      ex.left_total += left;
      ex.board_k[k - 1] = ex.wait_k[k - 1] - left;
    }
  }

  double dwell_time(const Exchange& ex) const {
    const DwellCoefficients& c = cfg_.dwell_coeffs;
    const double per_door = ex.wait / static_cast<double>(cfg_.num_doors);
    const double load = c.base_s + c.per_alighting_s * ex.alight +
                        c.per_boarding_s * ex.board +
                        c.crowding_s * per_door * per_door * per_door * ex.board;
    return std::max(load, cfg_.dwell_criteria_s) + stop_penalty_;
  }

  // Dwell depends on boarding, which depends on arrivals up to departure.
  // Iterate dwell -> departure -> exchange -> dwell to a fixed point. On
  // return ex_ holds the exchange at the final departure time.
  bool settle_dwell(int i, int j, double arrival, double onboard, double& dwell) {
    double s = cfg_.dwell_criteria_s + stop_penalty_;
    for (int it = 0; it < solver_.max_iterations; ++it) {
      exchange(i, j, arrival + s, onboard, trial_);
      const double next = dwell_time(trial_);
      if (next == s) {
        std::swap(ex_, trial_);
        dwell = s;
        return true;
      }
      const bool done = std::abs(next - s) < solver_.tolerance_s;
      s = next;
      if (!std::isfinite(s)) break;
      if (done) {
        exchange(i, j, arrival + s, onboard, ex_);
        dwell = s;
        return true;
      }
    }
    exchange(i, j, arrival + s, onboard, ex_);
    dwell = s;
    return false;
  }

  void record(SimulationResult& out, int i, int j, bool stop, double arrival,
              double departure, double dwell, bool converged, double onboard) const {
    TrainStationState& st =
        out.states[static_cast<std::size_t>(i - 1) * num_stations_ + (j - 1)];
    st.arrival_s = arrival;
    st.departure_s = departure;
    st.dwell_s = stop ? dwell : 0.0;
    st.stopped = stop;
    st.dwell_converged = converged;
    st.n_alight = ex_.alight;
    st.n_board = ex_.board;
    st.n_remain_cap = ex_.remain;
    st.n_onboard_after_dep = onboard;
    st.w_wait = ex_.wait;
    st.w_want2 = ex_.want2;
    st.w_left = ex_.left_capacity;
    st.w_left_total = ex_.left_total;
    st.w_wait_by_dest.assign(num_stations_, 0.0);
    st.w_want2_by_dest.assign(num_stations_, 0.0);
    st.w_left_by_dest.assign(num_stations_, 0.0);
    st.board_by_dest.assign(num_stations_, 0.0);
    for (int k = j + 1; k <= num_stations_; ++k) {
      st.w_wait_by_dest[k - 1] = ex_.wait_k[k - 1];
      st.w_want2_by_dest[k - 1] = ex_.want2_k[k - 1];
      st.w_left_by_dest[k - 1] = ex_.left_k[k - 1];
      st.board_by_dest[k - 1] = ex_.board_k[k - 1];
    }
  }

  const LineConfig& cfg_;
  const DemandMatrix& demand_;
  const StopSkipPattern& pattern_;
  DwellSolver solver_;
  int num_stations_;
  double stop_penalty_;

  // State carried from the previous train (the horizon start for train 1).
  std::vector<double> prev_departure_;
  std::vector<double> prev_left_;  // [station][dest]
  std::vector<double> prev_left_total_;

  std::vector<double> onboard_by_dest_;
  std::vector<double> row_total_;
  Exchange ex_;
  Exchange trial_;
};

void check_inputs(const LineConfig& config, const DemandMatrix& demand,
                  const StopSkipPattern& pattern) {
  config.validate();
  require(demand.num_stations() == config.num_stations, ErrorKind::Shape,
          "demand has " + std::to_string(demand.num_stations()) +
              " stations, config has " + std::to_string(config.num_stations));
  const auto violations = validate_pattern(pattern, config);
  if (!violations.empty()) {
    fail(ErrorKind::Constraint, "pattern is infeasible: " + violations.front().describe());
  }
}

}  // namespace

SimulationResult simulate(const LineConfig& config, const DemandMatrix& demand,
                          const StopSkipPattern& pattern, DwellSolver solver) {
  check_inputs(config, demand, pattern);
  SimulationResult result;
  CostTotals totals;
  Kernel(config, demand, pattern, solver).run(&result, totals);
  return result;
}

CostTotals evaluate(const LineConfig& config, const DemandMatrix& demand,
                    const StopSkipPattern& pattern, DwellSolver solver) {
  check_inputs(config, demand, pattern);
  CostTotals totals;
  Kernel(config, demand, pattern, solver).run(nullptr, totals);
  return totals;
}

NominalBaseline nominal_baseline(const LineConfig& config, const DemandMatrix& demand) {
  const CostTotals t = evaluate(
      config, demand, StopSkipPattern::all_stop(config.num_trains, config.num_stations));
  require(!t.diverged, ErrorKind::Infeasible,
          "dwell time diverges under all-stop service; demand is too high for this line");
  return {t.in_vehicle_time_s, t.waiting_time_s, t.last_train_left};
}

double normalize(const CostTotals& totals, const NominalBaseline& baseline,
                 double gamma) {
  require(baseline.t_in_vehicle_nom > 0.0 && baseline.t_wait_nom > 0.0,
          ErrorKind::NormalizationUndefined,
          "all-stop in-vehicle and waiting times must be positive to normalize "
          "(is the demand all zero?)");
  if (totals.diverged) return std::numeric_limits<double>::infinity();
  double leftover = 0.0;
  if (baseline.w_left_nom > 0.0) {
    leftover = totals.last_train_left / baseline.w_left_nom;
  } else if (totals.last_train_left > 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return totals.in_vehicle_time_s / baseline.t_in_vehicle_nom +
         gamma * (totals.waiting_time_s / baseline.t_wait_nom) + leftover;
}

double normalize(const SimulationResult& result, const NominalBaseline& baseline,
                 double gamma) {
  return normalize(CostTotals{result.in_vehicle_time_s, result.waiting_time_s,
                              result.last_train_left, result.feasible,
                              result.dwell_diverged.has_value()},
                   baseline, gamma);
}

std::vector<ScheduleRow> export_schedule(const SimulationResult& result) {
  std::vector<ScheduleRow> rows;
  rows.reserve(result.states.size());
  for (int i = 1; i <= result.num_trains; ++i) {
    for (int j = 1; j <= result.num_stations; ++j) {
      const TrainStationState& st = result.at(i, j);
      rows.push_back({i, j, st.arrival_s, st.departure_s, st.stopped});
    }
  }
  return rows;
}

}  // namespace skipstop
