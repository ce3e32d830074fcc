#include "skipstop/od_series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skipstop/error.hpp"
#include "skipstop/line_model.hpp"

namespace skipstop {

void OdSeries::validate() const {
  require(num_stations >= 2, ErrorKind::Data, "OD series needs >= 2 stations");
  const auto width = static_cast<std::size_t>(DemandMatrix::flat_size(num_stations));
  for (std::size_t n = 0; n < hours.size(); ++n) {
    const OdHour& h = hours[n];
    require(h.counts.size() == width, ErrorKind::Data,
            "hour " + std::to_string(h.label) + " has " + std::to_string(h.counts.size()) +
                " OD entries, expected " + std::to_string(width));
    require(n == 0 || hours[n - 1].label < h.label, ErrorKind::Data,
            "OD series hour labels must strictly increase");
    for (double c : h.counts) {
      require(c >= 0.0 && std::isfinite(c), ErrorKind::Data,
              "OD counts must be finite and nonnegative");
    }
  }
}

int OdSeries::find(std::int64_t label) const {
  const auto it = std::lower_bound(hours.begin(), hours.end(), label,
                                   [](const OdHour& h, std::int64_t l) { return h.label < l; });
  if (it == hours.end() || it->label != label) return -1;
  return static_cast<int>(it - hours.begin());
}

}  // namespace skipstop
