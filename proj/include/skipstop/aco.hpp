#pragma once

// Layered ant colony search over stop/skip patterns. Each (train, station)
// decision is one layer with two nodes: 0 = skip, 1 = stop. Ants walk the
// layers train-major and pick nodes by roulette wheel on pheromone^alpha.
// Only the iteration-best and the global-best ant deposit pheromone.

#include <cstdint>
#include <functional>
#include <vector>

#include "skipstop/line_model.hpp"
#include "skipstop/rng.hpp"
#include "skipstop/simulator.hpp"

namespace skipstop {

struct AcoParams {
  int num_ants = 360;
  int max_iterations = 30;
  double alpha = 0.8;
  double initial_pheromone = 7.0;  // Q; also the deposit numerator
  double evaporation_rate = 0.1;
  std::uint64_t rng_seed = 1;
  int threads = 1;
  /// Run validate_pattern on every constructed ant.
  bool check_every_ant = false;

  void validate() const;
};

class PheromoneField {
 public:
  PheromoneField() = default;
  PheromoneField(int num_trains, int num_stations, double initial);

  int num_layers() const { return static_cast<int>(tau_.size() / 2); }
  int num_trains() const { return num_trains_; }
  int num_stations() const { return num_stations_; }

  /// Layer is 0-based in train-major order; node 0 = skip, 1 = stop.
  double at(int layer, int node) const { return tau_[2 * layer + node]; }
  double& at(int layer, int node) { return tau_[2 * layer + node]; }
  int layer_of(int train, int station) const {
    return (train - 1) * num_stations_ + (station - 1);
  }

  bool operator==(const PheromoneField&) const = default;

 private:
  int num_trains_ = 0;
  int num_stations_ = 0;
  std::vector<double> tau_;
};

/// Node probabilities at one layer, skip node masked when `skip_allowed` is
/// false. Returns {P(skip), P(stop)}.
std::pair<double, double> node_probabilities(const PheromoneField& pheromone, int layer,
                                             double alpha, bool skip_allowed);

/// True when the skip node of (train, station) is open given the decisions
/// already taken for earlier trains.
bool skip_allowed(const LineConfig& config, const StopSkipPattern& partial, int train,
                  int station);

StopSkipPattern construct_ant(const PheromoneField& pheromone, const LineConfig& config,
                              double alpha, Rng& rng);

struct ScoredPattern {
  StopSkipPattern pattern;
  double cost;
};

/// Adds Q / cost to every node on each elite path. Deposits stack when the
/// two elites are the same ant.
void deposit(PheromoneField& pheromone, const ScoredPattern& iteration_best,
             const ScoredPattern& global_best, double q);

void evaporate(PheromoneField& pheromone, double rho);

struct IterationRecord {
  int iteration;
  double iteration_best;
  double global_best;
};

struct AcoRun {
  StopSkipPattern best_pattern;
  double best_cost = 0.0;
  double baseline_cost = 0.0;
  std::vector<IterationRecord> history;
  PheromoneField final_pheromone;
  /// Ants whose pattern failed validation (only counted with check_every_ant).
  std::int64_t invalid_ants = 0;
};

/// Cost used by the optimizer for one pattern: the normalized objective, or
/// +infinity for a pattern rejected by the leftover rule. Patterns infeasible
/// under strict headway get a sentinel assigned per iteration.
struct PatternCost {
  double cost;
  bool feasible;
};

using PatternEvaluator = std::function<PatternCost(const StopSkipPattern&)>;

PatternEvaluator make_evaluator(const LineConfig& config, const DemandMatrix& demand,
                                const NominalBaseline& baseline);

AcoRun optimize(const LineConfig& config, const DemandMatrix& demand,
                const AcoParams& params);

/// Core loop against an arbitrary evaluator (used by optimize()).
AcoRun run_colony(const LineConfig& config, const PatternEvaluator& evaluate,
                  double baseline_cost, const AcoParams& params);

}  // namespace skipstop
