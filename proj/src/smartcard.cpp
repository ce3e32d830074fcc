#include "skipstop/smartcard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <unordered_map>

#include "skipstop/error.hpp"
#include "skipstop/rng.hpp"

namespace skipstop {

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::DoubleEntry: return "double-entry";
    case RejectReason::ExitWithoutEntry: return "exit-without-entry";
    case RejectReason::NonPositiveDuration: return "non-positive-duration";
    case RejectReason::WrongDirection: return "wrong-direction";
    case RejectReason::UnmatchedEntry: return "unmatched-entry";
  }
  return "unknown";
}

PairingResult pair_trips(std::vector<Transaction> tx) {
  std::stable_sort(tx.begin(), tx.end(), [](const Transaction& a, const Transaction& b) {
    if (a.card_id != b.card_id) return a.card_id < b.card_id;
    if (a.timestamp_s != b.timestamp_s) return a.timestamp_s < b.timestamp_s;
    return a.kind == TxKind::Entry && b.kind == TxKind::Exit;
  });

  PairingResult out;
  std::optional<Transaction> open;
  auto reject = [&out](Transaction t, RejectReason r) {
    out.rejected.push_back({std::move(t), r});
  };
  for (std::size_t n = 0; n < tx.size(); ++n) {
    Transaction& t = tx[n];
    if (open && open->card_id != t.card_id) {
      reject(std::move(*open), RejectReason::UnmatchedEntry);
      open.reset();
    }
    if (t.kind == TxKind::Entry) {
      if (open) reject(std::move(*open), RejectReason::DoubleEntry);
      open = std::move(t);
      continue;
    }
    if (!open) {
      reject(std::move(t), RejectReason::ExitWithoutEntry);
      continue;
    }
    if (t.timestamp_s <= open->timestamp_s) {
      reject(std::move(*open), RejectReason::NonPositiveDuration);
      reject(std::move(t), RejectReason::NonPositiveDuration);
    } else if (t.station <= open->station) {
      reject(std::move(*open), RejectReason::WrongDirection);
      reject(std::move(t), RejectReason::WrongDirection);
    } else {
      out.trips.push_back(
          {open->card_id, open->station, t.station, open->timestamp_s, t.timestamp_s});
    }
    open.reset();
  }
  if (open) reject(std::move(*open), RejectReason::UnmatchedEntry);
  return out;
}

std::vector<std::int64_t> service_hours(std::int64_t start_epoch_s, int num_days,
                                        int first_hour, int end_hour) {
  require(first_hour >= 0 && end_hour <= 24 && first_hour < end_hour, ErrorKind::InvalidConfig,
          "service window must satisfy 0 <= first_hour < end_hour <= 24");
  require(start_epoch_s % 3600 == 0, ErrorKind::InvalidConfig,
          "start epoch must fall on an hour boundary");
  std::vector<std::int64_t> labels;
  const std::int64_t base = start_epoch_s / 3600;
  for (int d = 0; d < num_days; ++d)
    for (int h = first_hour; h < end_hour; ++h) labels.push_back(base + 24LL * d + h);
  return labels;
}

OdSeries aggregate_hourly(std::span<const Trip> trips,
                          std::span<const std::int64_t> hour_labels, int num_stations) {
  OdSeries series;
  series.num_stations = num_stations;
  const auto width = static_cast<std::size_t>(DemandMatrix::flat_size(num_stations));
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::int64_t label : hour_labels) {
    slot.emplace(label, series.hours.size());
    series.hours.push_back({label, std::vector<double>(width, 0.0)});
  }
  series.validate();
  for (const Trip& t : trips) {
    require(t.origin >= 1 && t.dest <= num_stations && t.origin < t.dest, ErrorKind::Data,
            "trip of card " + t.card_id + " is not a downstream trip on this line");
    const std::int64_t label =
        t.entry_s >= 0 ? t.entry_s / 3600 : -((-t.entry_s + 3599) / 3600);
    const auto it = slot.find(label);
    require(it != slot.end(), ErrorKind::Data,
            "trip of card " + t.card_id + " enters outside the aggregation window");
    const int j = t.origin;
    const int k = t.dest;
    // Row-major position of (j, k) among strictly-upper-triangular cells.
    const std::size_t pos = static_cast<std::size_t>((j - 1) * num_stations - (j - 1) * j / 2 +
                                                     (k - j - 1));
    series.hours[it->second].counts[pos] += 1.0;
  }
  return series;
}

void SyntheticSpec::validate() const {
  require(num_days >= 1, ErrorKind::InvalidConfig, "num_days must be >= 1");
  require(num_stations >= 2, ErrorKind::InvalidConfig, "num_stations must be >= 2");
  require(first_hour >= 0 && end_hour <= 24 && first_hour < end_hour,
          ErrorKind::InvalidConfig, "service window must satisfy 0 <= first < end <= 24");
  require(base_rate >= 0.0 && std::isfinite(base_rate), ErrorKind::InvalidConfig,
          "base_rate must be nonnegative");
  require(end_weight >= 0.0, ErrorKind::InvalidConfig, "end_weight must be nonnegative");
  for (const PeakProfile* p : {&morning, &evening}) {
    require(p->width_hours > 0.0, ErrorKind::InvalidConfig, "peak width must be positive");
    require(p->amplitude >= 0.0, ErrorKind::InvalidConfig,
            "peak amplitude must be nonnegative");
  }
  for (const StationGroup& g : groups) {
    require(g.first >= 1 && g.last <= num_stations && g.first <= g.last,
            ErrorKind::InvalidConfig, "station group outside the line");
    require(g.morning_weight >= 0.0 && g.evening_weight >= 0.0, ErrorKind::InvalidConfig,
            "station group weights must be nonnegative");
  }
  require(day_variation >= 0.0 && day_variation < 1.0, ErrorKind::InvalidConfig,
          "day_variation must lie in [0, 1)");
  require(seconds_per_station > 0.0, ErrorKind::InvalidConfig,
          "seconds_per_station must be positive");
}

std::vector<StationGroup> SyntheticSpec::default_groups(int num_stations) {
  const int a = std::max(1, num_stations / 3);
  const int b = std::max(a + 1, 2 * num_stations / 3);
  std::vector<StationGroup> g;
  g.push_back({1, a, 1.0, 0.2});
  if (b - 1 >= a + 1) g.push_back({a + 1, b - 1, 0.6, 0.6});
  if (b <= num_stations) g.push_back({b, num_stations, 0.2, 1.0});
  return g;
}

std::vector<double> SyntheticSpec::day_factors() const {
  Rng rng(seed, 0xDA7);
  std::vector<double> f(num_days);
  for (double& v : f) v = 1.0 + day_variation * (2.0 * rng.uniform() - 1.0);
  return f;
}

double SyntheticSpec::expected_rate(int day, int hour_of_day, int origin, int dest,
                                    const std::vector<double>& factors) const {
  if (dest <= origin) return 0.0;
  auto attract = [this](int s) {
    const double x = (s - 0.5) / static_cast<double>(num_stations);
    return end_weight + (1.0 - end_weight) * std::sin(std::numbers::pi * x);
  };
  const auto& gs = groups.empty() ? default_groups(num_stations) : groups;
  double wm = 1.0, we = 1.0;
  for (const StationGroup& g : gs) {
    if (dest >= g.first && dest <= g.last) {
      wm = g.morning_weight;
      we = g.evening_weight;
    }
  }
  auto bump = [&](const PeakProfile& p) {
    const double z = (hour_of_day + 0.5 - p.center_hour) / p.width_hours;
    return p.amplitude * std::exp(-0.5 * z * z);
  };
  const double profile = 1.0 + wm * bump(morning) + we * bump(evening);
  return base_rate * attract(origin) * attract(dest) * profile * factors.at(day);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int J = spec.num_stations;
  const auto factors = spec.day_factors();
  const auto labels =
      service_hours(spec.start_epoch_s, spec.num_days, spec.first_hour, spec.end_hour);
  const auto width = static_cast<std::size_t>(DemandMatrix::flat_size(J));

  SyntheticData data;
  data.counts.num_stations = data.rates.num_stations = J;
  Rng rng(spec.seed, 0x7219);
  std::int64_t card = 0;
  std::size_t n_label = 0;
  for (int d = 0; d < spec.num_days; ++d) {
    for (int h = spec.first_hour; h < spec.end_hour; ++h, ++n_label) {
      const std::int64_t label = labels[n_label];
      OdHour counts{label, std::vector<double>(width, 0.0)};
      OdHour rates{label, std::vector<double>(width, 0.0)};
      std::size_t pos = 0;
      for (int j = 1; j <= J; ++j) {
        for (int k = j + 1; k <= J; ++k, ++pos) {
          const double lambda = spec.expected_rate(d, h, j, k, factors);
          rates.counts[pos] = lambda;
          const std::uint64_t n = rng.poisson(lambda);
          counts.counts[pos] = static_cast<double>(n);
          for (std::uint64_t t = 0; t < n; ++t) {
            Trip trip;
            trip.card_id = "c" + std::to_string(++card);
            trip.origin = j;
            trip.dest = k;
            trip.entry_s = label * 3600 + static_cast<std::int64_t>(rng.below(3600));
            trip.exit_s = trip.entry_s +
                          static_cast<std::int64_t>(spec.seconds_per_station * (k - j)) + 60 +
                          static_cast<std::int64_t>(rng.below(120));
            data.transactions.push_back({trip.card_id, trip.entry_s, j, TxKind::Entry});
            data.transactions.push_back({trip.card_id, trip.exit_s, k, TxKind::Exit});
            data.trips.push_back(std::move(trip));
          }
        }
      }
      data.counts.hours.push_back(std::move(counts));
      data.rates.hours.push_back(std::move(rates));
    }
  }
  std::sort(data.trips.begin(), data.trips.end(), [](const Trip& a, const Trip& b) {
    return a.card_id != b.card_id ? a.card_id < b.card_id : a.entry_s < b.entry_s;
  });
  std::stable_sort(data.transactions.begin(), data.transactions.end(),
                   [](const Transaction& a, const Transaction& b) {
                     return a.timestamp_s != b.timestamp_s ? a.timestamp_s < b.timestamp_s
                                                           : a.card_id < b.card_id;
                   });
  return data;
}

DemandMatrix synthetic_demand(const SyntheticSpec& spec, int day, int hour_of_day) {
  spec.validate();
  require(day >= 0 && day < spec.num_days, ErrorKind::InvalidConfig,
          "day outside the synthetic horizon");
  const auto factors = spec.day_factors();
  DemandMatrix m(spec.num_stations);
  for (int j = 1; j <= spec.num_stations; ++j)
    for (int k = j + 1; k <= spec.num_stations; ++k)
      m.set_rate(j, k, spec.expected_rate(day, hour_of_day, j, k, factors) / 3600.0);
  return m;
}

}  // namespace skipstop
