#include "skipstop/line_model.hpp"

#include <gtest/gtest.h>

#include "skipstop/error.hpp"
#include "support.hpp"

namespace skipstop {
namespace {

using fixtures::kind_of;
using fixtures::small_line;

TEST(SkipSavings, ReferenceKinematics) {
  const SkipSavings s = compute_skip_savings(19.44, 0.7, 0.7, 25.0);
  // v/a is 27.771...: half of it lost braking, half accelerating.
  EXPECT_NEAR(s.stop_penalty_s, 19.44 / 0.7, 1e-12);
  EXPECT_NEAR(s.total_s, 19.44 / 0.7 + 25.0, 1e-12);
}

TEST(SkipSavings, AsymmetricRates) {
  const SkipSavings s = compute_skip_savings(10.0, 1.0, 2.0, 0.0);
  EXPECT_NEAR(s.stop_penalty_s, 10.0 / 2.0 / 2.0 + 10.0 / 1.0 / 2.0, 1e-12);
}

TEST(SkipSavings, VanishesAtZeroSpeed) {
  EXPECT_LT(compute_skip_savings(1e-9, 0.7, 0.7, 0.0).stop_penalty_s, 1e-8);
}

TEST(SkipSavings, RejectsNonPositiveInputs) {
  EXPECT_EQ(kind_of([] { compute_skip_savings(0.0, 0.7, 0.7, 25); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { compute_skip_savings(19.44, -1, 0.7, 25); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { compute_skip_savings(19.44, 0.7, 0.0, 25); }), ErrorKind::InvalidConfig);
}

TEST(LineConfig, ValidatesShape) {
  LineConfig c = small_line(2, 4);
  EXPECT_NO_THROW(c.validate());
  c.block_travel_time_s.pop_back();
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
}

TEST(LineConfig, RejectsBadValues) {
  LineConfig c = small_line(2, 4);
  c.num_doors = 0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
  c = small_line(2, 4);
  c.min_arrival_gap_s = c.dispatch_headway_s;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
  c = small_line(2, 4, {3, 2});
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
  c = small_line(2, 4, {5});
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
  c = small_line(2, 4);
  c.dwell_coeffs.crowding_s = -1e-6;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
}

TEST(LineConfig, MandatoryStops) {
  const LineConfig c = small_line(1, 6, {3});
  EXPECT_TRUE(c.is_mandatory_stop(1));
  EXPECT_FALSE(c.is_mandatory_stop(2));
  EXPECT_TRUE(c.is_mandatory_stop(3));
  EXPECT_TRUE(c.is_mandatory_stop(6));
}

TEST(LineConfig, LeadTrainTimetable) {
  LineConfig c = small_line(1, 3);
  c.horizon_start_s = 1000.0;
  EXPECT_EQ(c.lead_departure_s(3), 1000.0);
  c.accumulation_start = AccumulationStart::PreviousTrain;
  const double dwell = c.dwell_criteria_s + c.stop_penalty_s();
  EXPECT_EQ(c.lead_departure_s(1), 1000.0);
  EXPECT_NEAR(c.lead_departure_s(3),
              1000.0 + c.block_travel_time_s[0] + c.block_travel_time_s[1] + 2 * dwell, 1e-9);
}

TEST(DemandMatrix, UpperTriangularOnly) {
  DemandMatrix m(4);
  m.set_rate(1, 3, 0.5);
  EXPECT_EQ(m.rate(1, 3), 0.5);
  EXPECT_EQ(kind_of([&] { m.set_rate(3, 1, 0.1); }), ErrorKind::Shape);
  EXPECT_EQ(kind_of([&] { m.set_rate(2, 2, 0.1); }), ErrorKind::Shape);
  EXPECT_EQ(kind_of([&] { m.set_rate(1, 2, -0.1); }), ErrorKind::Data);
}

TEST(DemandMatrix, FlattenRoundTrip) {
  Rng rng(3);
  const DemandMatrix m = fixtures::random_demand(6, 0.2, rng);
  const auto flat = m.flatten();
  ASSERT_EQ(flat.size(), 15u);
  EXPECT_EQ(DemandMatrix::from_flat(6, flat), m);
  EXPECT_NEAR(DemandMatrix::from_flat(6, flat, 2.0).total(), 2.0 * m.total(), 1e-12);
  EXPECT_EQ(kind_of([&] { DemandMatrix::from_flat(5, flat); }), ErrorKind::Shape);
}

TEST(ValidatePattern, AllStopIsFeasible) {
  const LineConfig c = small_line(4, 7, {4});
  EXPECT_TRUE(validate_pattern(StopSkipPattern::all_stop(4, 7), c).empty());
}

TEST(ValidatePattern, ReportsEachRule) {
  const LineConfig c = small_line(3, 6, {4});
  StopSkipPattern p = StopSkipPattern::all_stop(3, 6);
  p.set(1, 1, false);
  p.set(2, 4, false);
  p.set(2, 5, false);
  p.set(3, 5, false);
  const auto v = validate_pattern(p, c);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], (Violation{ViolationKind::TerminalSkip, 1, 1}));
  EXPECT_EQ(v[1], (Violation{ViolationKind::TransferSkip, 2, 4}));
  EXPECT_EQ(v[2], (Violation{ViolationKind::ConsecutiveSkip, 3, 5}));
  EXPECT_EQ(v[2].describe(), "consecutive-skip at train 3, station 5");
}

TEST(ValidatePattern, AlternatingSkipsAreFine) {
  const LineConfig c = small_line(4, 5);
  StopSkipPattern p = StopSkipPattern::all_stop(4, 5);
  p.set(1, 3, false);
  p.set(3, 3, false);
  p.set(2, 2, false);
  p.set(4, 4, false);
  EXPECT_TRUE(validate_pattern(p, c).empty());
  EXPECT_EQ(p.skip_count(), 4);
}

TEST(ValidatePattern, ShapeMismatch) {
  const LineConfig c = small_line(2, 5);
  EXPECT_EQ(kind_of([&] { validate_pattern(StopSkipPattern::all_stop(3, 5), c); }),
            ErrorKind::Shape);
}

}  // namespace
}  // namespace skipstop
