#include "skipstop/scenarios.hpp"

namespace skipstop::scenarios {

LineConfig reference_line() {
  LineConfig c;
  c.num_stations = 30;
  c.num_trains = 12;
  c.block_travel_time_s = {96,  104, 88,  112, 92,  100, 118, 84,  96,  108,
                           90,  102, 94,  116, 86,  98,  110, 92,  104, 88,
                           114, 96,  100, 120, 94,  106, 112, 98,  118};
  c.transfer_stations = {11, 15, 17, 20};
  c.dispatch_headway_s = 300.0;
  c.min_arrival_gap_s = 60.0;
  c.capacity = 1348;
  c.num_doors = 28;
  c.dwell_criteria_s = 25.0;
  c.dwell_max_s = 120.0;
  c.dwell_coeffs.crowding_s = 1e-4;
  c.holding_speed_mps = 19.44;
  c.accel_mps2 = 0.7;
  c.decel_mps2 = 0.7;
  c.gamma = 2.0;
  c.horizon_start_s = 1524268800.0 + kPeakHour * 3600.0;
  c.accumulation_start = AccumulationStart::PreviousTrain;
  return c;
}

SyntheticSpec reference_month(std::uint64_t seed) {
  SyntheticSpec s;
  s.num_days = 30;
  s.num_stations = 30;
  s.first_hour = 5;
  s.end_hour = 24;
  s.base_rate = 2.0;
  s.end_weight = 0.3;
  s.morning = {8.0, 1.5, 3.0};
  s.evening = {17.5, 1.5, 4.0};
  s.groups = SyntheticSpec::default_groups(30);
  s.day_variation = 0.1;
  s.seed = seed;
  return s;
}

SyntheticSpec reference_peak_spec() {
  SyntheticSpec s = reference_month();
  s.base_rate = 15.2;
  s.end_weight = 1.0;
  return s;
}

DemandMatrix reference_peak_demand() {
  return synthetic_demand(reference_peak_spec(), 0, kPeakHour);
}

}  // namespace skipstop::scenarios
