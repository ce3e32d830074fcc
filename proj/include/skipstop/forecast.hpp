#pragma once

// Peak-hour OD demand forecaster: an LSTM cell unrolled over the preceding
// hours, followed by an optional ReLU dense layer and a sigmoid output
// layer. Gradients are computed by backpropagation through time and the
// model is trained with Adam.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "skipstop/line_model.hpp"
#include "skipstop/od_series.hpp"

namespace skipstop {

using Vec = Eigen::VectorXd;
using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct LstmShape {
  int features = 0;   // input and output width (flattened OD vector)
  int hidden = 64;    // LSTM units
  int dense = 64;     // ReLU layer width; 0 removes the layer

  int head_input() const { return dense > 0 ? dense : hidden; }
  bool operator==(const LstmShape&) const = default;
};

enum class Gate { Forget = 0, Candidate = 1, Input = 2, Output = 3 };

/// Offsets of every parameter block inside the flat parameter vector.
/// Gradients use the same layout.
struct ParamLayout {
  explicit ParamLayout(const LstmShape& shape);

  std::size_t w(Gate g) const { return gate_[static_cast<int>(g)]; }
  std::size_t r(Gate g) const { return w(g) + in_size_; }
  std::size_t b(Gate g) const { return r(g) + rec_size_; }
  std::size_t w_mid = 0, b_mid = 0, w_out = 0, b_out = 0;
  std::size_t total = 0;

 private:
  std::size_t gate_[4] = {};
  std::size_t in_size_ = 0;
  std::size_t rec_size_ = 0;
};

/// Per-feature min/max scaling to [0, 1]. Features whose range is empty
/// map to 0 and de-normalize to their constant value.
struct FeatureScale {
  std::vector<double> min;
  std::vector<double> max;

  static FeatureScale identity(int features);
  static FeatureScale fit(std::span<const std::vector<double>> rows);

  Vec normalize(std::span<const double> x) const;
  std::vector<double> denormalize(const Vec& y) const;
  bool operator==(const FeatureScale&) const = default;
};

class LstmModel {
 public:
  LstmModel() = default;
  explicit LstmModel(LstmShape shape);

  /// Uniform weights in +-1/sqrt(fan_in), zero biases.
  static LstmModel initialize(LstmShape shape, std::uint64_t seed);

  const LstmShape& shape() const { return shape_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  ConstMatMap W(Gate g) const;  // hidden x features
  ConstMatMap R(Gate g) const;  // hidden x hidden
  ConstVecMap b(Gate g) const;
  ConstMatMap W_mid() const;  // dense x hidden
  ConstVecMap b_mid() const;
  ConstMatMap W_out() const;  // features x head_input
  ConstVecMap b_out() const;

  FeatureScale scale;
  int lookback = 4;
  int lead = 2;  // target hour = last input hour + lead

  bool operator==(const LstmModel& other) const {
    return shape_ == other.shape_ && params_ == other.params_ && scale == other.scale &&
           lookback == other.lookback && lead == other.lead;
  }

 private:
  LstmShape shape_;
  ParamLayout layout_{LstmShape{}};
  std::vector<double> params_;
};

struct CellOutput {
  Vec y;  // hidden output
  Vec h;  // cell state
};

/// One step of the cell: forget/candidate/input/output gates, cell update
/// h = u * candidate + f * h_prev, output y = o * tanh(h).
CellOutput lstm_cell_step(const LstmModel& model, const Vec& x, const Vec& y_prev,
                          const Vec& h_prev);

/// Runs the cell over `sequence` from a zero state and applies the head.
/// Inputs and output are in normalized [0, 1] space.
Vec forward_normalized(const LstmModel& model, std::span<const Vec> sequence);

/// Raw-count interface: normalizes inputs with model.scale and
/// de-normalizes the prediction.
std::vector<double> forward(const LstmModel& model,
                            std::span<const std::vector<double>> sequence);

struct Sample {
  std::vector<Vec> sequence;
  Vec target;
};

struct LossAndGrad {
  double mse = 0.0;
  std::vector<double> grad;  // same layout as LstmModel::params()
};

LossAndGrad loss_and_grad(const LstmModel& model, std::span<const Sample> batch);
double mse(const LstmModel& model, std::span<const Sample> batch);

struct TrainHyper {
  int batch = 35;
  int epochs = 500;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochLoss {
  int epoch;
  double train_mse;
  double valid_mse;
};

/// Adam over shuffled minibatches. Losses are full-pass MSEs measured after
/// each epoch.
std::vector<EpochLoss> train(LstmModel& model, std::span<const Sample> train_set,
                             std::span<const Sample> valid_set, const TrainHyper& hyper);

/// Raw windows: `lookback` consecutive hours as input, the hour `lead`
/// after the last input hour as target. Windows with missing hours are
/// skipped.
struct RawWindow {
  std::vector<std::vector<double>> inputs;
  std::vector<double> target;
  std::int64_t target_label = 0;
};

std::vector<RawWindow> make_windows(const OdSeries& series, int lookback, int lead);

/// Random 70/30 style split by count: round(train_fraction * n) windows go
/// to training.
struct WindowSplit {
  std::vector<RawWindow> train;
  std::vector<RawWindow> valid;
};
WindowSplit split_windows(std::vector<RawWindow> windows, double train_fraction,
                          std::uint64_t seed);

std::vector<Sample> to_samples(const FeatureScale& scale, std::span<const RawWindow> windows);

struct ForecastOptions {
  LstmShape shape;  // features filled in from the series
  int lookback = 4;
  int lead = 2;
  double train_fraction = 0.7;
  TrainHyper hyper;
};

struct ForecastFit {
  LstmModel model;
  std::vector<EpochLoss> curve;
  WindowSplit split;
};

/// Full pipeline: windows, split, scale fitted on the training windows,
/// seeded initialization, training.
ForecastFit fit_forecaster(const OdSeries& series, const ForecastOptions& options);

/// Forecast for the hour `lead` after the last hour of `history`, as
/// per-second rates.
DemandMatrix predict_peak(const LstmModel& model, const OdSeries& history);

/// Mean of every earlier observation at the same hour of day.
std::vector<double> baseline_average_counts(const OdSeries& series, int hour_of_day,
                                            std::int64_t before_label = INT64_MAX);
DemandMatrix baseline_average(const OdSeries& series, int hour_of_day);

struct AccuracyReport {
  double mae_accuracy;  // 1 - MAE / mean(actual)
  double r2;
  double mse;
};
AccuracyReport accuracy(std::span<const std::vector<double>> predicted,
                        std::span<const std::vector<double>> actual);

}  // namespace skipstop
