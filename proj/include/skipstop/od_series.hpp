#pragma once

#include <cstdint>
#include <vector>

namespace skipstop {

/// One hour of station-to-station trip counts. `label` is the absolute hour
/// index (seconds since the epoch / 3600); counts are the flattened
/// strictly-upper-triangular OD matrix in row-major (origin, dest > origin)
/// order.
struct OdHour {
  std::int64_t label = 0;
  std::vector<double> counts;

  int hour_of_day() const { return static_cast<int>(((label % 24) + 24) % 24); }
  bool operator==(const OdHour&) const = default;
};

struct OdSeries {
  int num_stations = 0;
  std::vector<OdHour> hours;

  /// Throws Error(Data) unless every vector has J(J-1)/2 nonnegative
  /// entries and labels strictly increase.
  void validate() const;

  /// Index of the hour with this label, or -1.
  int find(std::int64_t label) const;

  bool operator==(const OdSeries&) const = default;
};

}  // namespace skipstop
