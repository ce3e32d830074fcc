#include "skipstop/aco.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "skipstop/error.hpp"
#include "support.hpp"

namespace skipstop {
namespace {

using fixtures::kind_of;
using fixtures::small_line;

constexpr double kInf = std::numeric_limits<double>::infinity();

using SmallInstance = fixtures::ToyInstance;

TEST(NodeProbabilities, SymmetricAndMasked) {
  PheromoneField ph(1, 3, 7.0);
  const auto [skip, stop] = node_probabilities(ph, 1, 0.8, true);
  EXPECT_DOUBLE_EQ(skip, 0.5);
  EXPECT_DOUBLE_EQ(stop, 0.5);
  const auto masked = node_probabilities(ph, 1, 0.8, false);
  EXPECT_EQ(masked.first, 0.0);
  EXPECT_EQ(masked.second, 1.0);
}

TEST(NodeProbabilities, SumToOne) {
  Rng rng(1);
  PheromoneField ph(4, 6, 1.0);
  for (int layer = 0; layer < ph.num_layers(); ++layer) {
    ph.at(layer, 0) = 1e-3 + 50.0 * rng.uniform();
    ph.at(layer, 1) = 1e-3 + 50.0 * rng.uniform();
    const auto [skip, stop] = node_probabilities(ph, layer, 0.3 + 2.0 * rng.uniform(), true);
    EXPECT_NEAR(skip + stop, 1.0, 1e-12);
  }
}

TEST(NodeProbabilities, ClosedFormWithAlpha) {
  PheromoneField ph(1, 3, 1.0);
  ph.at(1, 0) = 1.0;
  ph.at(1, 1) = 4.0;
  EXPECT_NEAR(node_probabilities(ph, 1, 0.5, true).second, 2.0 / 3.0, 1e-15);
}

TEST(ConstructAnt, RouletteFrequencyMatchesProbability) {
  const LineConfig c = small_line(1, 3);
  PheromoneField ph(1, 3, 1.0);
  ph.at(1, 0) = 1.0;
  ph.at(1, 1) = 9.0;
  Rng rng(2024);
  int stops = 0;
  const int draws = 100000;
  for (int n = 0; n < draws; ++n) stops += construct_ant(ph, c, 1.0, rng).stops(1, 2);
  EXPECT_NEAR(static_cast<double>(stops) / draws, 0.9, 0.01);
}

TEST(ConstructAnt, MandatoryAndPreviouslySkippedLayersStop) {
  const LineConfig c = small_line(3, 6, {4});
  PheromoneField ph(3, 6, 1.0);
  for (int layer = 0; layer < ph.num_layers(); ++layer) ph.at(layer, 0) = 1e6;
  Rng rng(3);
  const StopSkipPattern ant = construct_ant(ph, c, 1.0, rng);
  for (int i = 1; i <= 3; ++i) {
    EXPECT_TRUE(ant.stops(i, 1));
    EXPECT_TRUE(ant.stops(i, 4));
    EXPECT_TRUE(ant.stops(i, 6));
  }
  // Skip is nearly certain where open, so trains alternate.
  EXPECT_FALSE(ant.stops(1, 2));
  EXPECT_TRUE(ant.stops(2, 2));
  EXPECT_FALSE(ant.stops(3, 2));
}

TEST(ConstructAnt, AlwaysFeasible) {
  const LineConfig c = small_line(5, 9, {3, 6});
  Rng rng(8);
  PheromoneField ph(5, 9, 1.0);
  for (int layer = 0; layer < ph.num_layers(); ++layer) {
    ph.at(layer, 0) = 0.1 + rng.uniform();
    ph.at(layer, 1) = 0.1 + rng.uniform();
  }
  for (int n = 0; n < 2000; ++n) {
    EXPECT_TRUE(validate_pattern(construct_ant(ph, c, 0.8, rng), c).empty());
  }
}

TEST(Deposit, SameEliteStacks) {
  PheromoneField ph(1, 3, 7.0);
  StopSkipPattern p = StopSkipPattern::all_stop(1, 3);
  p.set(1, 2, false);
  deposit(ph, {p, 3.839}, {p, 3.839}, 7.0);
  const double each = 7.0 / 3.839;
  EXPECT_NEAR(each, 1.8234, 1e-4);
  EXPECT_NEAR(ph.at(1, 0), 7.0 + 2 * each, 1e-12);
  EXPECT_EQ(ph.at(1, 1), 7.0);  // not on the path
  EXPECT_NEAR(ph.at(0, 1), 7.0 + 2 * each, 1e-12);
}

TEST(Deposit, DistinctElites) {
  PheromoneField ph(1, 3, 1.0);
  StopSkipPattern a = StopSkipPattern::all_stop(1, 3);
  StopSkipPattern b = a;
  b.set(1, 2, false);
  deposit(ph, {a, 2.0}, {b, 4.0}, 8.0);
  EXPECT_DOUBLE_EQ(ph.at(1, 1), 1.0 + 4.0);
  EXPECT_DOUBLE_EQ(ph.at(1, 0), 1.0 + 2.0);
  EXPECT_DOUBLE_EQ(ph.at(0, 1), 1.0 + 6.0);
  EXPECT_DOUBLE_EQ(ph.at(0, 0), 1.0);
}

TEST(Deposit, RejectsNonPositiveCost) {
  PheromoneField ph(1, 3, 1.0);
  const StopSkipPattern p = StopSkipPattern::all_stop(1, 3);
  EXPECT_EQ(kind_of([&] { deposit(ph, {p, 0.0}, {p, 1.0}, 7.0); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { deposit(ph, {p, 1.0}, {p, -2.0}, 7.0); }), ErrorKind::InvalidConfig);
}

TEST(Evaporate, SingleStep) {
  PheromoneField ph(2, 3, 7.0);
  evaporate(ph, 0.1);
  for (int layer = 0; layer < ph.num_layers(); ++layer) {
    EXPECT_NEAR(ph.at(layer, 0), 6.3, 1e-12);
    EXPECT_NEAR(ph.at(layer, 1), 6.3, 1e-12);
  }
}

TEST(Evaporate, GeometricDecayAndLimits) {
  PheromoneField ph(1, 2, 7.0);
  for (int n = 0; n < 25; ++n) evaporate(ph, 0.1);
  EXPECT_NEAR(ph.at(0, 0), 7.0 * std::pow(0.9, 25), 1e-12);
  PheromoneField tiny(1, 2, 7.0);
  evaporate(tiny, 1e-15);
  EXPECT_NEAR(tiny.at(1, 1), 7.0, 1e-12);
  EXPECT_EQ(kind_of([&] { evaporate(ph, 0.0); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { evaporate(ph, 1.0); }), ErrorKind::InvalidConfig);
}

TEST(AcoParams, Validation) {
  AcoParams p;
  EXPECT_NO_THROW(p.validate());
  p.evaporation_rate = 1.5;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidConfig);
  p = AcoParams{};
  p.num_ants = 0;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidConfig);
}

TEST(Optimize, MatchesExhaustiveOptimum) {
  SmallInstance s;
  const NominalBaseline base = nominal_baseline(s.config, s.demand);
  ASSERT_GT(base.w_left_nom, 0.0);
  const PatternEvaluator eval = make_evaluator(s.config, s.demand, base);
  double best = kInf;
  for (const StopSkipPattern& p : fixtures::enumerate_feasible(s.config))
    best = std::min(best, eval(p).cost);
  ASSERT_LT(best, 4.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    AcoParams params;
    params.num_ants = 100;
    params.max_iterations = 50;
    params.rng_seed = seed;
    EXPECT_NEAR(optimize(s.config, s.demand, params).best_cost, best, 1e-9) << "seed " << seed;
  }
}

TEST(Optimize, HistoryIsMonotoneAndAntsValid) {
  SmallInstance s;
  AcoParams params;
  params.num_ants = 40;
  params.max_iterations = 20;
  params.check_every_ant = true;
  const AcoRun run = optimize(s.config, s.demand, params);
  ASSERT_EQ(run.history.size(), 20u);
  for (std::size_t n = 1; n < run.history.size(); ++n)
    EXPECT_LE(run.history[n].global_best, run.history[n - 1].global_best);
  EXPECT_EQ(run.invalid_ants, 0);
  EXPECT_EQ(run.best_cost, run.history.back().global_best);
  EXPECT_LE(run.best_cost, run.baseline_cost);
}

TEST(Optimize, SeedDeterminismAcrossThreadCounts) {
  SmallInstance s;
  AcoParams params;
  params.num_ants = 50;
  params.max_iterations = 10;
  params.rng_seed = 99;
  const AcoRun a = optimize(s.config, s.demand, params);
  params.threads = 4;
  const AcoRun b = optimize(s.config, s.demand, params);
  EXPECT_EQ(a.best_pattern, b.best_pattern);
  EXPECT_EQ(a.best_cost, b.best_cost);
  EXPECT_EQ(a.final_pheromone, b.final_pheromone);
  for (std::size_t n = 0; n < a.history.size(); ++n) {
    EXPECT_EQ(a.history[n].iteration_best, b.history[n].iteration_best);
  }
}

TEST(Optimize, EliteNodesLeadAfterOneCycle) {
  SmallInstance s;
  AcoParams params;
  params.num_ants = 30;
  params.max_iterations = 1;
  const AcoRun run = optimize(s.config, s.demand, params);
  const auto& bits = run.best_pattern.bits();
  for (int layer = 0; layer < run.final_pheromone.num_layers(); ++layer) {
    const int chosen = bits[layer];
    EXPECT_GT(run.final_pheromone.at(layer, chosen), run.final_pheromone.at(layer, 1 - chosen))
        << "layer " << layer;
  }
}

TEST(Optimize, NothingToSkipReturnsBaseline) {
  LineConfig c = small_line(2, 4, {2, 3});
  Rng rng(5);
  const DemandMatrix u = fixtures::random_demand(4, 0.05, rng);
  AcoParams params;
  params.num_ants = 5;
  params.max_iterations = 1;
  const AcoRun run = optimize(c, u, params);
  EXPECT_EQ(run.best_cost, run.baseline_cost);
  EXPECT_EQ(run.best_pattern, StopSkipPattern::all_stop(2, 4));
}

TEST(Optimize, InfeasibleBaselineUnderStrictHeadway) {
  LineConfig c = small_line(2, 4);
  c.dispatch_headway_s = 70.0;
  c.strict_headway = true;
  Rng rng(5);
  const DemandMatrix u = fixtures::random_demand(4, 0.05, rng);
  EXPECT_EQ(kind_of([&] { optimize(c, u, AcoParams{}); }), ErrorKind::Infeasible);
}

TEST(RunColony, InfeasibleAntsNeverBecomeGlobalBest) {
  const LineConfig c = small_line(2, 6);
  // Skipping lowers the cost, but only patterns with an even skip count
  // are feasible.
  const PatternEvaluator eval = [](const StopSkipPattern& p) {
    return PatternCost{10.0 - p.skip_count(), p.skip_count() % 2 == 0};
  };
  AcoParams params;
  params.num_ants = 20;
  params.max_iterations = 15;
  const AcoRun run = run_colony(c, eval, 10.0, params);
  EXPECT_EQ(run.best_pattern.skip_count() % 2, 0);
  EXPECT_LT(run.best_cost, 10.0);
  for (const auto& rec : run.history) EXPECT_TRUE(rec.global_best <= 10.0);
}

TEST(RunColony, RejectedAntsLeaveAllStop) {
  const LineConfig c = small_line(2, 5);
  const PatternEvaluator eval = [](const StopSkipPattern& p) {
    return PatternCost{p.skip_count() == 0 ? 3.0 : kInf, true};
  };
  AcoParams params;
  params.num_ants = 3;
  params.max_iterations = 4;
  params.rng_seed = 7;
  const AcoRun run = run_colony(c, eval, 3.0, params);
  EXPECT_LE(run.best_cost, 3.0);
  if (run.best_cost == 3.0) EXPECT_EQ(run.best_pattern.skip_count(), 0);
}

}  // namespace
}  // namespace skipstop
