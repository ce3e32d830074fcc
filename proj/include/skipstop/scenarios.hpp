#pragma once

// Built-in reference scenarios: a 30-station, 12-train line with the
// operating constants of a busy metro line, a desk-scale synthetic month of
// smart-card demand, and an evening peak that loads the line just past
// capacity.

#include "skipstop/line_model.hpp"
#include "skipstop/smartcard.hpp"

namespace skipstop::scenarios {

/// 12 trains, 30 stations, 300 s headway, 1348 passengers per train,
/// 19.44 m/s cruise, 0.7 m/s^2, 25 s criteria dwell, transfers at 11, 15,
/// 17 and 20. The analysis hour starts at 17:00 of the first synthetic day.
///
/// Platforms start from the state left by a preceding train, and the
/// crowding coefficient is 1e-4 s/pax (28 doors spread the queue thinly).
LineConfig reference_line();

/// 30 days of 05:00-24:00 service, sized to generate and train on quickly.
SyntheticSpec reference_month(std::uint64_t seed = 2018);

/// Same shape with flat station attractiveness and the intensity at which
/// the all-stop peak hour leaves riders behind on the last train.
SyntheticSpec reference_peak_spec();

/// Expected 17:00-18:00 demand of reference_peak_spec()'s first day.
DemandMatrix reference_peak_demand();

inline constexpr int kPeakHour = 17;

}  // namespace skipstop::scenarios
