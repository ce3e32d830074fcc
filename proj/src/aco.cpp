#include "skipstop/aco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "skipstop/error.hpp"

namespace skipstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void deposit_path(PheromoneField& pheromone, const StopSkipPattern& path, double amount) {
  const auto& bits = path.bits();
  for (int layer = 0; layer < pheromone.num_layers(); ++layer) {
    pheromone.at(layer, bits[layer]) += amount;
  }
}

double deposit_amount(double q, double cost) {
  require(cost > 0.0 && std::isfinite(cost), ErrorKind::InvalidConfig,
          "pheromone deposit needs a finite positive cost");
  return q / cost;
}

// Runs fn(k) for k in [0, n) on up to `threads` workers with a static split.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    pool.emplace_back([begin, end, &fn] {
      for (int k = begin; k < end; ++k) fn(k);
    });
  }
}

}  // namespace

void AcoParams::validate() const {
  require(num_ants >= 1, ErrorKind::InvalidConfig, "num_ants must be >= 1");
  require(max_iterations >= 1, ErrorKind::InvalidConfig, "max_iterations must be >= 1");
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidConfig,
          "alpha must be positive");
  require(initial_pheromone > 0.0 && std::isfinite(initial_pheromone),
          ErrorKind::InvalidConfig, "initial pheromone (Q) must be positive");
  require(evaporation_rate > 0.0 && evaporation_rate < 1.0, ErrorKind::InvalidConfig,
          "evaporation rate must lie in (0, 1)");
  require(threads >= 1, ErrorKind::InvalidConfig, "threads must be >= 1");
}

PheromoneField::PheromoneField(int num_trains, int num_stations, double initial)
    : num_trains_(num_trains),
      num_stations_(num_stations),
      tau_(static_cast<std::size_t>(num_trains) * num_stations * 2, initial) {
  require(initial > 0.0, ErrorKind::InvalidConfig, "initial pheromone must be positive");
}

std::pair<double, double> node_probabilities(const PheromoneField& pheromone, int layer,
                                             double alpha, bool skip_open) {
  if (!skip_open) return {0.0, 1.0};
  const double skip = std::pow(pheromone.at(layer, 0), alpha);
  const double stop = std::pow(pheromone.at(layer, 1), alpha);
  const double sum = skip + stop;
  require(sum > 0.0 && std::isfinite(sum), ErrorKind::Internal,
          "degenerate pheromone at layer " + std::to_string(layer));
  return {skip / sum, stop / sum};
}

bool skip_allowed(const LineConfig& config, const StopSkipPattern& partial, int train,
                  int station) {
  if (config.is_mandatory_stop(station)) return false;
  return train == 1 || partial.stops(train - 1, station);
}

StopSkipPattern construct_ant(const PheromoneField& pheromone, const LineConfig& config,
                              double alpha, Rng& rng) {
  require(pheromone.num_trains() == config.num_trains &&
              pheromone.num_stations() == config.num_stations,
          ErrorKind::Shape, "pheromone field does not match the line configuration");
  StopSkipPattern ant(config.num_trains, config.num_stations, true);
  for (int i = 1; i <= config.num_trains; ++i) {
    for (int j = 1; j <= config.num_stations; ++j) {
      if (!skip_allowed(config, ant, i, j)) continue;
      const auto [p_skip, p_stop] =
          node_probabilities(pheromone, pheromone.layer_of(i, j), alpha, true);
      // Roulette wheel over the nodes in order skip, stop.
      const double r = rng.uniform();
      ant.set(i, j, !(r < p_skip));
    }
  }
  return ant;
}

void deposit(PheromoneField& pheromone, const ScoredPattern& iteration_best,
             const ScoredPattern& global_best, double q) {
  const double a = deposit_amount(q, iteration_best.cost);
  const double b = deposit_amount(q, global_best.cost);
  deposit_path(pheromone, iteration_best.pattern, a);
  deposit_path(pheromone, global_best.pattern, b);
}

void evaporate(PheromoneField& pheromone, double rho) {
  require(rho > 0.0 && rho < 1.0, ErrorKind::InvalidConfig,
          "evaporation rate must lie in (0, 1)");
  for (int layer = 0; layer < pheromone.num_layers(); ++layer) {
    pheromone.at(layer, 0) *= (1.0 - rho);
    pheromone.at(layer, 1) *= (1.0 - rho);
  }
}

PatternEvaluator make_evaluator(const LineConfig& config, const DemandMatrix& demand,
                                const NominalBaseline& baseline) {
  return [&config, &demand, baseline](const StopSkipPattern& pattern) {
    const CostTotals totals = evaluate(config, demand, pattern);
    return PatternCost{normalize(totals, baseline, config.gamma), totals.feasible};
  };
}

AcoRun optimize(const LineConfig& config, const DemandMatrix& demand,
                const AcoParams& params) {
  config.validate();
  params.validate();
  const NominalBaseline baseline = nominal_baseline(config, demand);
  const PatternEvaluator evaluator = make_evaluator(config, demand, baseline);
  const PatternCost all_stop =
      evaluator(StopSkipPattern::all_stop(config.num_trains, config.num_stations));
  require(all_stop.feasible, ErrorKind::Infeasible,
          "the all-stop operation violates the minimum arrival gap under strict "
          "headway; no feasible baseline exists");
  return run_colony(config, evaluator, all_stop.cost, params);
}

AcoRun run_colony(const LineConfig& config, const PatternEvaluator& evaluate_pattern,
                  double baseline_cost, const AcoParams& params) {
  params.validate();
  const int n_ants = params.num_ants;

  AcoRun run;
  run.baseline_cost = baseline_cost;
  PheromoneField pheromone(config.num_trains, config.num_stations,
                           params.initial_pheromone);
  std::optional<ScoredPattern> global_best;

  std::vector<StopSkipPattern> ants(n_ants);
  std::vector<PatternCost> costs(n_ants);
  std::vector<std::uint8_t> invalid(n_ants, 0);

  for (int it = 1; it <= params.max_iterations; ++it) {
    // Pheromone is read-only while ants are built and scored.
    parallel_for(n_ants, params.threads, [&](int k) {
      Rng rng(params.rng_seed,
              (static_cast<std::uint64_t>(it) << 32) | static_cast<std::uint64_t>(k));
      ants[k] = construct_ant(pheromone, config, params.alpha, rng);
      if (params.check_every_ant) {
        invalid[k] = validate_pattern(ants[k], config).empty() ? 0 : 1;
      }
      costs[k] = evaluate_pattern(ants[k]);
    });

    // Reduce in ant order. Headway-infeasible ants get a sentinel an order of
    // magnitude above anything feasible seen this iteration; leftover-rejected
    // ants stay at +infinity and can never be elite.
    double worst_finite = baseline_cost;
    for (int k = 0; k < n_ants; ++k) {
      run.invalid_ants += invalid[k];
      if (costs[k].feasible && std::isfinite(costs[k].cost)) {
        worst_finite = std::max(worst_finite, costs[k].cost);
      }
    }
    const double sentinel = 10.0 * worst_finite;
    int best_k = -1;
    double best_cost = kInf;
    for (int k = 0; k < n_ants; ++k) {
      double c = costs[k].cost;
      if (!costs[k].feasible && std::isfinite(c)) c = sentinel;
      costs[k].cost = c;
      if (c < best_cost) {
        best_cost = c;
        best_k = k;
      }
    }

    if (best_k >= 0 && costs[best_k].feasible &&
        (!global_best || best_cost < global_best->cost)) {
      global_best = ScoredPattern{ants[best_k], best_cost};
    }

    if (best_k >= 0) {
      const double q = params.initial_pheromone;
      deposit_path(pheromone, ants[best_k], deposit_amount(q, best_cost));
      if (global_best) {
        deposit_path(pheromone, global_best->pattern, deposit_amount(q, global_best->cost));
      }
    }
    evaporate(pheromone, params.evaporation_rate);

    run.history.push_back({it, best_cost, global_best ? global_best->cost : kInf});
  }

  if (global_best) {
    run.best_pattern = global_best->pattern;
    run.best_cost = global_best->cost;
  } else {
    run.best_pattern = StopSkipPattern::all_stop(config.num_trains, config.num_stations);
    run.best_cost = baseline_cost;
  }
  run.final_pheromone = std::move(pheromone);
  return run;
}

}  // namespace skipstop
