#pragma once

// Small instance builders shared by the unit tests.

#include <functional>
#include <optional>
#include <vector>

#include "skipstop/error.hpp"
#include "skipstop/line_model.hpp"
#include "skipstop/rng.hpp"

namespace skipstop::fixtures {

/// Kind of the Error thrown by f, or nothing if f returns normally.
inline std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline LineConfig small_line(int trains, int stations, std::vector<int> transfers = {}) {
  LineConfig c;
  c.num_trains = trains;
  c.num_stations = stations;
  for (int j = 1; j < stations; ++j) c.block_travel_time_s.push_back(90.0 + 7.0 * (j % 4));
  c.transfer_stations = std::move(transfers);
  c.horizon_start_s = 0.0;
  return c;
}

/// Dense random demand, rates in [0, max_rate) passengers per second.
inline DemandMatrix random_demand(int stations, double max_rate, Rng& rng) {
  DemandMatrix m(stations);
  for (int j = 1; j <= stations; ++j)
    for (int k = j + 1; k <= stations; ++k) m.set_rate(j, k, max_rate * rng.uniform());
  return m;
}

/// Feasible pattern: each open decision skips with probability p_skip.
inline StopSkipPattern random_feasible_pattern(const LineConfig& c, double p_skip, Rng& rng) {
  StopSkipPattern p = StopSkipPattern::all_stop(c.num_trains, c.num_stations);
  for (int i = 1; i <= c.num_trains; ++i) {
    for (int j = 1; j <= c.num_stations; ++j) {
      if (c.is_mandatory_stop(j)) continue;
      if (i > 1 && !p.stops(i - 1, j)) continue;
      if (rng.uniform() < p_skip) p.set(i, j, false);
    }
  }
  return p;
}

/// 3 trains x 5 stations with a transfer at 3 and a capacity that binds, so
/// the all-stop last train leaves riders and skip patterns stay finite.
struct ToyInstance {
  LineConfig config = [] {
    LineConfig c = small_line(3, 5, {3});
    c.capacity = 60;
    return c;
  }();
  DemandMatrix demand = [] {
    Rng rng(12);
    return random_demand(5, 0.06, rng);
  }();
};

/// Every pattern passing validate_pattern, in lexicographic bit order.
inline std::vector<StopSkipPattern> enumerate_feasible(const LineConfig& c) {
  std::vector<std::pair<int, int>> open;
  for (int i = 1; i <= c.num_trains; ++i)
    for (int j = 2; j < c.num_stations; ++j)
      if (!c.is_transfer(j)) open.emplace_back(i, j);
  std::vector<StopSkipPattern> out;
  const unsigned long total = 1UL << open.size();
  for (unsigned long mask = 0; mask < total; ++mask) {
    StopSkipPattern p = StopSkipPattern::all_stop(c.num_trains, c.num_stations);
    for (std::size_t n = 0; n < open.size(); ++n)
      if (mask & (1UL << n)) p.set(open[n].first, open[n].second, false);
    if (validate_pattern(p, c).empty()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace skipstop::fixtures
