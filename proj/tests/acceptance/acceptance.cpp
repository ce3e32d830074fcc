// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <openssl/evp.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "invariants.hpp"
#include "skipstop/aco.hpp"
#include "skipstop/forecast.hpp"
#include "skipstop/io.hpp"
#include "skipstop/line_model.hpp"
#include "skipstop/scenarios.hpp"
#include "skipstop/simulator.hpp"
#include "skipstop/smartcard.hpp"
#include "support.hpp"

namespace {

using namespace skipstop;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Stop penalty for 19.44 m/s and 0.7 m/s^2 against the rounded 27.64 s.
Verdict kinematics() {
  const SkipSavings s = compute_skip_savings(19.44, 0.7, 0.7, 25.0);
  const bool ok = std::abs(s.stop_penalty_s - 27.64) <= 0.1 && std::abs(s.total_s - 52.64) <= 0.1;
  return {ok, "t_acc " + fmt("%.3f", s.stop_penalty_s) + " s, total " + fmt("%.3f", s.total_s) +
                  " s (expected 27.64 and 52.64, tolerance 0.1 s)"};
}

// 2. All-stop against itself scores exactly 1 + gamma + [leftovers].
Verdict normalization_identity() {
  int with_left = 0, without_left = 0, wrong = 0;
  auto check = [&](const LineConfig& c, const DemandMatrix& d) {
    const NominalBaseline b = nominal_baseline(c, d);
    const SimulationResult r = simulate(c, d, StopSkipPattern::all_stop(c.num_trains, c.num_stations));
    const double z = normalize(r, b, 2.0);
    const bool left = r.last_train_left > 0.0;
    (left ? with_left : without_left) += 1;
    if (z != (left ? 4.0 : 3.0)) ++wrong;
  };
  check(scenarios::reference_line(), scenarios::reference_peak_demand());
  Rng rng(2024);
  for (int n = 0; n < 40; ++n) {
    LineConfig c = fixtures::small_line(2 + n % 5, 4 + n % 9);
    c.capacity = n % 2 ? 40 : 2000;
    check(c, fixtures::random_demand(c.num_stations, 0.04, rng));
  }
  const bool ok = wrong == 0 && with_left > 0 && without_left > 0;
  return {ok, std::to_string(with_left) + " instances with leftovers scored 4, " +
                  std::to_string(without_left) + " without scored 3, " + std::to_string(wrong) +
                  " mismatches"};
}

// 3. ACO against exhaustive enumeration on the 3 x 5 toy line.
Verdict brute_force() {
  const auto t0 = Clock::now();
  const fixtures::ToyInstance toy;
  const NominalBaseline base = nominal_baseline(toy.config, toy.demand);
  const PatternEvaluator eval = make_evaluator(toy.config, toy.demand, base);
  const auto feasible = fixtures::enumerate_feasible(toy.config);
  double best = kInf;
  for (const StopSkipPattern& p : feasible) best = std::min(best, eval(p).cost);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    AcoParams params;
    params.num_ants = 100;
    params.max_iterations = 50;
    params.rng_seed = seed;
    if (std::abs(optimize(toy.config, toy.demand, params).best_cost - best) <= 1e-9) ++hits;
  }
  const double secs = seconds_since(t0);
  return {hits >= 95 && secs < 30.0,
          std::to_string(hits) + "/100 seeds reach the optimum " + fmt("%.6f", best) + " of " +
              std::to_string(feasible.size()) + " feasible patterns in " + fmt("%.1f", secs) + " s"};
}

// 4. Conservation laws on random instances.
Verdict conservation() {
  const auto t0 = Clock::now();
  Rng rng(77);
  int checked = 0, broken = 0;
  std::string first;
  while (checked < 50) {
    LineConfig c = fixtures::small_line(1 + static_cast<int>(rng.below(6)),
                                        3 + static_cast<int>(rng.below(10)));
    c.capacity = 20 + static_cast<int>(rng.below(200));
    if (rng.below(2)) c.accumulation_start = AccumulationStart::PreviousTrain;
    if (c.num_stations > 4 && rng.below(2)) c.transfer_stations = {c.num_stations / 2};
    const DemandMatrix d = fixtures::random_demand(c.num_stations, 0.03, rng);
    const StopSkipPattern p = fixtures::random_feasible_pattern(c, 0.4, rng);
    const SimulationResult r = simulate(c, d, p);
    if (r.dwell_diverged) continue;
    const auto bad = fixtures::check_invariants(c, r, 1e-9);
    if (!bad.empty()) {
      ++broken;
      if (first.empty()) first = bad.front();
    }
    ++checked;
  }
  const double secs = seconds_since(t0);
  return {broken == 0 && secs < 10.0,
          std::to_string(checked - broken) + "/" + std::to_string(checked) +
              " instances hold every invariant to 1e-9 in " + fmt("%.2f", secs) + " s" +
              (first.empty() ? "" : "; first failure: " + first)};
}

// 5. Full-size colony run on the synthetic evening peak.
Verdict aco_behaviour() {
  const LineConfig c = scenarios::reference_line();
  const DemandMatrix d = scenarios::reference_peak_demand();
  AcoParams params;  // 360 ants, 30 iterations, alpha 0.8, Q 7, rho 0.1
  const auto t0 = Clock::now();
  const AcoRun run = optimize(c, d, params);
  const double secs = seconds_since(t0);
  bool monotone = true;
  for (std::size_t n = 1; n < run.history.size(); ++n)
    monotone = monotone && run.history[n].global_best <= run.history[n - 1].global_best;
  const double gain = 100.0 * (run.baseline_cost - run.best_cost) / run.baseline_cost;
  const bool ok = monotone && run.baseline_cost == 4.0 && run.best_cost <= run.baseline_cost &&
                  gain > 0.0 && secs <= 60.0;
  return {ok, "baseline " + fmt("%.3f", run.baseline_cost) + ", best " +
                  fmt("%.3f", run.best_cost) + " (" + fmt("%.2f", gain) + "% better), " +
                  (monotone ? "monotone" : "NOT monotone") + " history, " + fmt("%.1f", secs) +
                  " s"};
}

// 6. Backpropagation against central differences.
Verdict gradient_check() {
  const auto t0 = Clock::now();
  int sampled = 0, failed = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LstmModel m = LstmModel::initialize({45, 16, 12}, seed);
    Rng rng(seed, 6);
    for (double& p : m.params()) p += rng.uniform(-0.05, 0.05);  // nonzero biases too
    std::vector<Sample> batch(6);
    for (Sample& s : batch) {
      for (int t = 0; t < m.lookback; ++t) {
        Vec x(45);
        for (int k = 0; k < 45; ++k) x[k] = rng.uniform();
        s.sequence.push_back(x);
      }
      s.target = Vec(45);
      for (int k = 0; k < 45; ++k) s.target[k] = rng.uniform();
    }
    const LossAndGrad lg = loss_and_grad(m, batch);
    for (int n = 0; n < 60; ++n, ++sampled) {
      const std::size_t k = rng.below(m.params().size());
      const double saved = m.params()[k];
      m.params()[k] = saved + 1e-6;
      const double up = mse(m, batch);
      m.params()[k] = saved - 1e-6;
      const double down = mse(m, batch);
      m.params()[k] = saved;
      const double numeric = (up - down) / 2e-6;
      const double scale = std::max({std::abs(numeric), std::abs(lg.grad[k]), 1e-4});
      const double rel = std::abs(numeric - lg.grad[k]) / scale;
      worst = std::max(worst, rel);
      if (rel >= 1e-5) ++failed;
    }
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && sampled >= 200 && secs < 30.0,
          std::to_string(sampled) + " parameters over 5 seeds, worst relative error " +
              fmt("%.2e", worst) + ", " + std::to_string(failed) + " above 1e-5, " +
              fmt("%.1f", secs) + " s"};
}

// 7. Training on a month of the peak scenario: noisy counts for the loss
// reduction, expected rates for the comparison with the historical mean.
Verdict training_sanity() {
  const auto t0 = Clock::now();
  const SyntheticData data = generate_synthetic(scenarios::reference_peak_spec());
  ForecastOptions o;
  o.hyper.batch = 35;
  o.hyper.lr = 0.001;
  o.hyper.epochs = 50;

  const ForecastFit noisy = fit_forecaster(data.counts, o);
  const double ratio = noisy.curve.back().valid_mse / noisy.curve.front().valid_mse;

  const ForecastFit clean = fit_forecaster(data.rates, o);
  std::vector<std::vector<double>> pred, mean, actual;
  for (const RawWindow& w : clean.split.valid) {
    const int hour = OdHour{w.target_label, {}}.hour_of_day();
    const bool seen = std::any_of(data.rates.hours.begin(), data.rates.hours.end(),
                                  [&](const OdHour& h) {
                                    return h.label < w.target_label && h.hour_of_day() == hour;
                                  });
    if (!seen) continue;
    pred.push_back(forward(clean.model, w.inputs));
    mean.push_back(baseline_average_counts(data.rates, hour, w.target_label));
    actual.push_back(w.target);
  }
  const AccuracyReport lstm = accuracy(pred, actual);
  const AccuracyReport avg = accuracy(mean, actual);
  const double secs = seconds_since(t0);
  return {ratio <= 0.1 && lstm.mse < avg.mse && secs < 120.0,
          "held-out MSE at epoch 50 is " + fmt("%.3f", ratio) +
              " of epoch 1; noise-free held-out MSE " + fmt("%.3f", lstm.mse) +
              " vs historical mean " + fmt("%.3f", avg.mse) + " over " +
              std::to_string(actual.size()) + " windows; " + fmt("%.1f", secs) + " s"};
}

// 8. Generator -> transaction file -> pairing -> hourly counts.
Verdict data_round_trip() {
  const auto t0 = Clock::now();
  SyntheticSpec spec = scenarios::reference_month();
  spec.num_days = 1;
  spec.base_rate = 6.0;
  const SyntheticData data = generate_synthetic(spec);
  const auto parsed = io::parse_transactions_csv(io::transactions_csv(data.transactions),
                                                 data.transactions.size());
  const PairingResult paired = pair_trips(parsed);
  const auto hours = service_hours(spec.start_epoch_s, spec.num_days, spec.first_hour, spec.end_hour);
  const OdSeries counts = aggregate_hourly(paired.trips, hours, spec.num_stations);
  const double secs = seconds_since(t0);
  const bool ok = data.transactions.size() >= 100000 && paired.rejected.empty() &&
                  paired.trips == data.trips && counts == data.counts && secs < 5.0;
  return {ok, std::to_string(data.transactions.size()) + " transactions, " +
                  std::to_string(paired.trips.size()) + " trips, " +
                  std::to_string(paired.rejected.size()) + " rejected, trips " +
                  (paired.trips == data.trips ? "identical" : "DIFFER") + ", tallies " +
                  (counts == data.counts ? "identical" : "DIFFER") + ", " + fmt("%.2f", secs) +
                  " s"};
}

std::string sha256_file(const fs::path& p) {
  const std::string bytes = io::read_text(p);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int n = 0; n < len; ++n) {
    std::snprintf(buf, sizeof buf, "%02x", md[n]);
    hex += buf;
  }
  return hex;
}

std::map<std::string, std::string> hash_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  return out;
}

// 9. Every command twice with the same seed; all output files hashed.
Verdict cli_determinism() {
  const fs::path work = fs::temp_directory_path() / ("skipstop_accept_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  ::setenv("SOURCE_DATE_EPOCH", "1524268800", 1);

  SyntheticSpec spec;
  spec.num_days = 5;
  spec.num_stations = 8;
  spec.base_rate = 4.0;
  io::write_json(work / "spec.json", io::to_json(spec));
  const fixtures::ToyInstance toy;
  io::write_json(work / "toy_line.json", io::to_json(toy.config));
  io::write_text(work / "toy_demand.csv", io::demand_csv(toy.demand));
  LineConfig line8 = fixtures::small_line(4, 8, {4});
  io::write_json(work / "line8.json", io::to_json(line8));

  const std::string bin = SKIPSTOP_BIN;
  const std::string w = work.string();
  const std::vector<std::string> commands = {
      "gen-data --spec " + w + "/spec.json --seed 5 --out " + w + "/out/gen",
      "ingest --transactions " + w + "/out/gen/transactions.csv --first-hour 5 --out " + w + "/out/ingest",
      "forecast --series " + w + "/out/gen/od_counts.csv --epochs 4 --hidden 8 --dense 6 --seed 5 --out " +
          w + "/out/forecast",
      "optimize --config " + w + "/line8.json --checkpoint " + w + "/out/forecast/model.json --history " +
          w + "/out/gen/od_counts.csv --ants 30 --iterations 5 --seed 5 --out " + w + "/out/opt_forecast",
      "optimize --config " + w + "/toy_line.json --demand " + w +
          "/toy_demand.csv --ants 40 --iterations 10 --seed 5 --threads 3 --out " + w + "/out/opt_toy",
      "simulate --config " + w + "/toy_line.json --demand " + w + "/toy_demand.csv --pattern " + w +
          "/out/opt_toy/pattern.csv --out " + w + "/out/sim",
  };
  std::vector<std::map<std::string, std::string>> rounds;
  std::string failure;
  for (int round = 0; round < 2 && failure.empty(); ++round) {
    fs::remove_all(work / "out");
    for (const std::string& args : commands) {
      const std::string cmd = bin + " " + args + " > " + w + "/log.txt 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        failure = "command failed: skipstop " + args.substr(0, args.find(' '));
        break;
      }
    }
    if (failure.empty()) rounds.push_back(hash_tree(work / "out"));
  }
  fs::remove_all(work);
  if (!failure.empty()) return {false, failure};
  std::vector<std::string> differ;
  for (const auto& [file, hash] : rounds[0]) {
    const auto it = rounds[1].find(file);
    if (it == rounds[1].end() || it->second != hash) differ.push_back(file);
  }
  const bool ok = differ.empty() && rounds[0].size() == rounds[1].size();
  return {ok, std::to_string(rounds[0].size()) + " files from " + std::to_string(commands.size()) +
                  " commands, " + std::to_string(differ.size()) + " hash mismatches" +
                  (differ.empty() ? "" : " (first: " + differ.front() + ")")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"kinematics", kinematics},
      {"normalization identity", normalization_identity},
      {"brute-force optimality", brute_force},
      {"conservation", conservation},
      {"ACO behaviour", aco_behaviour},
      {"LSTM gradients", gradient_check},
      {"LSTM training", training_sanity},
      {"data round trip", data_round_trip},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    Verdict v;
    try {
      v = criteria[n].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("criterion %zu [%s] %s: %s\n", n + 1, criteria[n].first, v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria pass\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
