#include "skipstop/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skipstop/error.hpp"
#include "skipstop/rng.hpp"

namespace skipstop {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vec sigmoid(const Vec& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

Vec tanh_vec(const Vec& z) {
  return z.unaryExpr([](double v) { return std::tanh(v); });
}

// Everything a backward pass needs from one forward pass.
struct Trace {
  std::vector<Vec> x, y, h, f, cand, u, o, tanh_h;  // y[0], h[0] are zero state
  Vec mid_pre, mid, out;
};

void forward_trace(const LstmModel& m, std::span<const Vec> sequence, Trace& tr) {
  const LstmShape& s = m.shape();
  const std::size_t steps = sequence.size();
  tr.x.assign(sequence.begin(), sequence.end());
  tr.y.assign(steps + 1, Vec::Zero(s.hidden));
  tr.h.assign(steps + 1, Vec::Zero(s.hidden));
  tr.f.resize(steps);
  tr.cand.resize(steps);
  tr.u.resize(steps);
  tr.o.resize(steps);
  tr.tanh_h.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const Vec& x = sequence[t];
    require(x.size() == s.features, ErrorKind::Shape, "input vector width mismatch");
    const Vec& y_prev = tr.y[t];
    auto pre = [&](Gate g) -> Vec { return m.W(g) * x + m.R(g) * y_prev + m.b(g); };
    tr.f[t] = sigmoid(pre(Gate::Forget));
    tr.cand[t] = tanh_vec(pre(Gate::Candidate));
    tr.u[t] = sigmoid(pre(Gate::Input));
    tr.o[t] = sigmoid(pre(Gate::Output));
    tr.h[t + 1] = tr.u[t].cwiseProduct(tr.cand[t]) + tr.f[t].cwiseProduct(tr.h[t]);
    tr.tanh_h[t] = tanh_vec(tr.h[t + 1]);
    tr.y[t + 1] = tr.o[t].cwiseProduct(tr.tanh_h[t]);
  }
  const Vec& last = tr.y[steps];
  if (s.dense > 0) {
    tr.mid_pre = m.W_mid() * last + m.b_mid();
    tr.mid = tr.mid_pre.cwiseMax(0.0);
    tr.out = sigmoid(m.W_out() * tr.mid + m.b_out());
  } else {
    tr.out = sigmoid(m.W_out() * last + m.b_out());
  }
}

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(out).
void backward(const LstmModel& m, const Trace& tr, const Vec& d_out,
              std::vector<double>& grad) {
  const LstmShape& s = m.shape();
  const ParamLayout& L = m.layout();
  auto gmat = [&](std::size_t off, int rows, int cols) {
    return MatMap(grad.data() + off, rows, cols);
  };
  auto gvec = [&](std::size_t off, int n) { return VecMap(grad.data() + off, n); };

  const std::size_t steps = tr.x.size();
  const Vec d_logit = d_out.cwiseProduct(tr.out.cwiseProduct(Vec::Ones(s.features) - tr.out));
  Vec d_y;
  if (s.dense > 0) {
    gmat(L.w_out, s.features, s.dense).noalias() += d_logit * tr.mid.transpose();
    gvec(L.b_out, s.features) += d_logit;
    Vec d_mid = m.W_out().transpose() * d_logit;
    for (int n = 0; n < s.dense; ++n) {
      if (tr.mid_pre[n] <= 0.0) d_mid[n] = 0.0;
    }
    gmat(L.w_mid, s.dense, s.hidden).noalias() += d_mid * tr.y[steps].transpose();
    gvec(L.b_mid, s.dense) += d_mid;
    d_y = m.W_mid().transpose() * d_mid;
  } else {
    gmat(L.w_out, s.features, s.hidden).noalias() += d_logit * tr.y[steps].transpose();
    gvec(L.b_out, s.features) += d_logit;
    d_y = m.W_out().transpose() * d_logit;
  }

  Vec d_h_next = Vec::Zero(s.hidden);
  const Vec ones = Vec::Ones(s.hidden);
  for (std::size_t t = steps; t-- > 0;) {
    const Vec d_o = d_y.cwiseProduct(tr.tanh_h[t]);
    const Vec d_h = d_h_next + d_y.cwiseProduct(tr.o[t])
                                   .cwiseProduct(ones - tr.tanh_h[t].cwiseAbs2());
    const Vec d_u = d_h.cwiseProduct(tr.cand[t]);
    const Vec d_cand = d_h.cwiseProduct(tr.u[t]);
    const Vec d_f = d_h.cwiseProduct(tr.h[t]);
    d_h_next = d_h.cwiseProduct(tr.f[t]);

    const Vec dz[4] = {
        d_f.cwiseProduct(tr.f[t].cwiseProduct(ones - tr.f[t])),
        d_cand.cwiseProduct(ones - tr.cand[t].cwiseAbs2()),
        d_u.cwiseProduct(tr.u[t].cwiseProduct(ones - tr.u[t])),
        d_o.cwiseProduct(tr.o[t].cwiseProduct(ones - tr.o[t])),
    };
    Vec d_y_prev = Vec::Zero(s.hidden);
    for (int gi = 0; gi < 4; ++gi) {
      const Gate g = static_cast<Gate>(gi);
      gmat(L.w(g), s.hidden, s.features).noalias() += dz[gi] * tr.x[t].transpose();
      gmat(L.r(g), s.hidden, s.hidden).noalias() += dz[gi] * tr.y[t].transpose();
      gvec(L.b(g), s.hidden) += dz[gi];
      d_y_prev.noalias() += m.R(g).transpose() * dz[gi];
    }
    d_y = d_y_prev;
  }
}

}  // namespace

ParamLayout::ParamLayout(const LstmShape& s) {
  in_size_ = static_cast<std::size_t>(s.hidden) * s.features;
  rec_size_ = static_cast<std::size_t>(s.hidden) * s.hidden;
  std::size_t off = 0;
  for (auto& g : gate_) {
    g = off;
    off += in_size_ + rec_size_ + s.hidden;
  }
  if (s.dense > 0) {
    w_mid = off;
    off += static_cast<std::size_t>(s.dense) * s.hidden;
    b_mid = off;
    off += s.dense;
  } else {
    w_mid = b_mid = off;
  }
  w_out = off;
  off += static_cast<std::size_t>(s.features) * s.head_input();
  b_out = off;
  off += s.features;
  total = off;
}

FeatureScale FeatureScale::identity(int features) {
  return {std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)};
}

FeatureScale FeatureScale::fit(std::span<const std::vector<double>> rows) {
  require(!rows.empty(), ErrorKind::Data, "cannot fit a scale on no data");
  FeatureScale s{rows.front(), rows.front()};
  for (const auto& r : rows) {
    require(r.size() == s.min.size(), ErrorKind::Shape, "ragged rows in scale fit");
    for (std::size_t n = 0; n < r.size(); ++n) {
      s.min[n] = std::min(s.min[n], r[n]);
      s.max[n] = std::max(s.max[n], r[n]);
    }
  }
  return s;
}

Vec FeatureScale::normalize(std::span<const double> x) const {
  require(x.size() == min.size(), ErrorKind::Shape, "scale width mismatch");
  Vec out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double range = max[n] - min[n];
    out[n] = range > 0.0 ? (x[n] - min[n]) / range : 0.0;
  }
  return out;
}

std::vector<double> FeatureScale::denormalize(const Vec& y) const {
  require(static_cast<std::size_t>(y.size()) == min.size(), ErrorKind::Shape,
          "scale width mismatch");
  std::vector<double> out(min.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = min[n] + y[n] * (max[n] - min[n]);
  return out;
}

LstmModel::LstmModel(LstmShape shape)
    : scale(FeatureScale::identity(shape.features)),
      shape_(shape),
      layout_(shape),
      params_(layout_.total, 0.0) {
  require(shape.features > 0 && shape.hidden > 0 && shape.dense >= 0, ErrorKind::Shape,
          "LSTM dimensions must be positive");
}

LstmModel LstmModel::initialize(LstmShape shape, std::uint64_t seed) {
  LstmModel m(shape);
  Rng rng(seed);
  const ParamLayout& L = m.layout_;
  auto fill = [&](std::size_t off, std::size_t n, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t k = 0; k < n; ++k) m.params_[off + k] = rng.uniform(-bound, bound);
  };
  const std::size_t hf = static_cast<std::size_t>(shape.hidden) * shape.features;
  const std::size_t hh = static_cast<std::size_t>(shape.hidden) * shape.hidden;
  for (int gi = 0; gi < 4; ++gi) {
    const Gate g = static_cast<Gate>(gi);
    fill(L.w(g), hf, shape.features);
    fill(L.r(g), hh, shape.hidden);
  }
  if (shape.dense > 0) {
    fill(L.w_mid, static_cast<std::size_t>(shape.dense) * shape.hidden, shape.hidden);
  }
  fill(L.w_out, static_cast<std::size_t>(shape.features) * shape.head_input(),
       shape.head_input());
  return m;
}

ConstMatMap LstmModel::W(Gate g) const {
  return ConstMatMap(params_.data() + layout_.w(g), shape_.hidden, shape_.features);
}
ConstMatMap LstmModel::R(Gate g) const {
  return ConstMatMap(params_.data() + layout_.r(g), shape_.hidden, shape_.hidden);
}
ConstVecMap LstmModel::b(Gate g) const {
  return ConstVecMap(params_.data() + layout_.b(g), shape_.hidden);
}
ConstMatMap LstmModel::W_mid() const {
  return ConstMatMap(params_.data() + layout_.w_mid, shape_.dense, shape_.hidden);
}
ConstVecMap LstmModel::b_mid() const {
  return ConstVecMap(params_.data() + layout_.b_mid, shape_.dense);
}
ConstMatMap LstmModel::W_out() const {
  return ConstMatMap(params_.data() + layout_.w_out, shape_.features, shape_.head_input());
}
ConstVecMap LstmModel::b_out() const {
  return ConstVecMap(params_.data() + layout_.b_out, shape_.features);
}

CellOutput lstm_cell_step(const LstmModel& m, const Vec& x, const Vec& y_prev,
                          const Vec& h_prev) {
  const LstmShape& s = m.shape();
  require(x.size() == s.features && y_prev.size() == s.hidden && h_prev.size() == s.hidden,
          ErrorKind::Shape, "lstm_cell_step: dimension mismatch");
  auto pre = [&](Gate g) -> Vec { return m.W(g) * x + m.R(g) * y_prev + m.b(g); };
  const Vec f = sigmoid(pre(Gate::Forget));
  const Vec cand = tanh_vec(pre(Gate::Candidate));
  const Vec u = sigmoid(pre(Gate::Input));
  const Vec o = sigmoid(pre(Gate::Output));
  CellOutput out;
  out.h = u.cwiseProduct(cand) + f.cwiseProduct(h_prev);
  out.y = o.cwiseProduct(tanh_vec(out.h));
  return out;
}

Vec forward_normalized(const LstmModel& model, std::span<const Vec> sequence) {
  require(static_cast<int>(sequence.size()) == model.lookback, ErrorKind::Shape,
          "sequence has " + std::to_string(sequence.size()) + " steps, model expects " +
              std::to_string(model.lookback));
  Trace tr;
  forward_trace(model, sequence, tr);
  return tr.out;
}

std::vector<double> forward(const LstmModel& model,
                            std::span<const std::vector<double>> sequence) {
  std::vector<Vec> xs;
  xs.reserve(sequence.size());
  for (const auto& v : sequence) xs.push_back(model.scale.normalize(v));
  return model.scale.denormalize(forward_normalized(model, xs));
}

LossAndGrad loss_and_grad(const LstmModel& model, std::span<const Sample> batch) {
  require(!batch.empty(), ErrorKind::Data, "loss_and_grad: empty batch");
  const int F = model.shape().features;
  LossAndGrad out;
  out.grad.assign(model.layout().total, 0.0);
  const double denom = static_cast<double>(batch.size()) * F;
  Trace tr;
  for (const Sample& sample : batch) {
    require(sample.target.size() == F, ErrorKind::Shape, "target width mismatch");
    forward_trace(model, sample.sequence, tr);
    const Vec err = tr.out - sample.target;
    out.mse += err.squaredNorm();
    backward(model, tr, (2.0 / denom) * err, out.grad);
  }
  out.mse /= denom;
  return out;
}

double mse(const LstmModel& model, std::span<const Sample> batch) {
  require(!batch.empty(), ErrorKind::Data, "mse: empty batch");
  double sum = 0.0;
  Trace tr;
  for (const Sample& sample : batch) {
    forward_trace(model, sample.sequence, tr);
    sum += (tr.out - sample.target).squaredNorm();
  }
  return sum / (static_cast<double>(batch.size()) * model.shape().features);
}

void TrainHyper::validate() const {
  require(batch >= 1, ErrorKind::InvalidConfig, "batch size must be >= 1");
  require(epochs >= 0, ErrorKind::InvalidConfig, "epochs must be >= 0");
  require(lr >= 0.0 && std::isfinite(lr), ErrorKind::InvalidConfig,
          "learning rate must be finite and >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0,
          ErrorKind::InvalidConfig, "Adam constants out of range");
}

std::vector<EpochLoss> train(LstmModel& model, std::span<const Sample> train_set,
                             std::span<const Sample> valid_set, const TrainHyper& hyper) {
  hyper.validate();
  require(!train_set.empty(), ErrorKind::Data, "training set is empty");
  const std::size_t n_params = model.params().size();
  std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(hyper.seed, 0x5EED);
  std::vector<Sample> batch;
  std::vector<EpochLoss> curve;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) {
      std::swap(order[k - 1], order[rng.below(k)]);
    }
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + hyper.batch);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train_set[order[k]]);
      const LossAndGrad lg = loss_and_grad(model, batch);
      ++step;
      const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
      auto& p = model.params();
      for (std::size_t n = 0; n < n_params; ++n) {
        const double g = lg.grad[n];
        m1[n] = hyper.beta1 * m1[n] + (1.0 - hyper.beta1) * g;
        m2[n] = hyper.beta2 * m2[n] + (1.0 - hyper.beta2) * g * g;
        p[n] -= hyper.lr * (m1[n] / c1) / (std::sqrt(m2[n] / c2) + hyper.epsilon);
      }
    }
    curve.push_back({epoch, mse(model, train_set),
                     valid_set.empty() ? 0.0 : mse(model, valid_set)});
  }
  return curve;
}

std::vector<RawWindow> make_windows(const OdSeries& series, int lookback, int lead) {
  require(lookback >= 1 && lead >= 1, ErrorKind::InvalidConfig,
          "lookback and lead must be >= 1");
  series.validate();
  std::vector<RawWindow> out;
  for (const OdHour& target : series.hours) {
    const std::int64_t last = target.label - lead;
    RawWindow w;
    w.target = target.counts;
    w.target_label = target.label;
    bool complete = true;
    for (int t = lookback - 1; t >= 0 && complete; --t) {
      const int idx = series.find(last - t);
      if (idx < 0) {
        complete = false;
      } else {
        w.inputs.push_back(series.hours[idx].counts);
      }
    }
    if (complete) out.push_back(std::move(w));
  }
  return out;
}

WindowSplit split_windows(std::vector<RawWindow> windows, double train_fraction,
                          std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction <= 1.0, ErrorKind::InvalidConfig,
          "train fraction must lie in (0, 1]");
  Rng rng(seed, 0x5B117);
  for (std::size_t k = windows.size(); k > 1; --k) {
    std::swap(windows[k - 1], windows[rng.below(k)]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(windows.size())));
  WindowSplit split;
  split.train.assign(std::make_move_iterator(windows.begin()),
                     std::make_move_iterator(windows.begin() + n_train));
  split.valid.assign(std::make_move_iterator(windows.begin() + n_train),
                     std::make_move_iterator(windows.end()));
  return split;
}

std::vector<Sample> to_samples(const FeatureScale& scale, std::span<const RawWindow> windows) {
  std::vector<Sample> out;
  out.reserve(windows.size());
  for (const RawWindow& w : windows) {
    Sample s;
    for (const auto& x : w.inputs) s.sequence.push_back(scale.normalize(x));
    s.target = scale.normalize(w.target);
    out.push_back(std::move(s));
  }
  return out;
}

ForecastFit fit_forecaster(const OdSeries& series, const ForecastOptions& options) {
  ForecastFit fit;
  fit.split = split_windows(make_windows(series, options.lookback, options.lead),
                            options.train_fraction, options.hyper.seed);
  require(!fit.split.train.empty(), ErrorKind::Data,
          "series too short: no complete training windows");

  std::vector<std::vector<double>> rows;
  for (const RawWindow& w : fit.split.train) {
    rows.insert(rows.end(), w.inputs.begin(), w.inputs.end());
    rows.push_back(w.target);
  }
  LstmShape shape = options.shape;
  shape.features = DemandMatrix::flat_size(series.num_stations);
  fit.model = LstmModel::initialize(shape, options.hyper.seed);
  fit.model.scale = FeatureScale::fit(rows);
  fit.model.lookback = options.lookback;
  fit.model.lead = options.lead;

  const auto train_samples = to_samples(fit.model.scale, fit.split.train);
  const auto valid_samples = to_samples(fit.model.scale, fit.split.valid);
  fit.curve = train(fit.model, train_samples, valid_samples, options.hyper);
  return fit;
}

DemandMatrix predict_peak(const LstmModel& model, const OdSeries& history) {
  history.validate();
  require(static_cast<int>(history.hours.size()) >= model.lookback, ErrorKind::Data,
          "need " + std::to_string(model.lookback) + " hours of history, got " +
              std::to_string(history.hours.size()));
  std::vector<std::vector<double>> seq;
  const std::size_t first = history.hours.size() - model.lookback;
  for (std::size_t n = first; n < history.hours.size(); ++n) {
    if (n > first) {
      require(history.hours[n].label == history.hours[n - 1].label + 1, ErrorKind::Data,
              "history hours must be consecutive");
    }
    seq.push_back(history.hours[n].counts);
  }
  std::vector<double> counts = forward(model, seq);
  for (double& c : counts) c = std::max(c, 0.0);
  return DemandMatrix::from_flat(history.num_stations, counts, 1.0 / 3600.0);
}

std::vector<double> baseline_average_counts(const OdSeries& series, int hour_of_day,
                                            std::int64_t before_label) {
  std::vector<double> sum;
  int n = 0;
  for (const OdHour& h : series.hours) {
    if (h.label >= before_label || h.hour_of_day() != hour_of_day) continue;
    if (sum.empty()) sum.assign(h.counts.size(), 0.0);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += h.counts[k];
    ++n;
  }
  require(n > 0, ErrorKind::Data,
          "no historical observation for hour " + std::to_string(hour_of_day));
  for (double& v : sum) v /= n;
  return sum;
}

DemandMatrix baseline_average(const OdSeries& series, int hour_of_day) {
  return DemandMatrix::from_flat(series.num_stations,
                                 baseline_average_counts(series, hour_of_day), 1.0 / 3600.0);
}

AccuracyReport accuracy(std::span<const std::vector<double>> predicted,
                        std::span<const std::vector<double>> actual) {
  require(predicted.size() == actual.size() && !actual.empty(), ErrorKind::Shape,
          "accuracy: prediction/actual count mismatch");
  double abs_err = 0.0, sq_err = 0.0, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < actual.size(); ++s) {
    require(predicted[s].size() == actual[s].size(), ErrorKind::Shape,
            "accuracy: width mismatch");
    for (std::size_t k = 0; k < actual[s].size(); ++k) {
      const double e = predicted[s][k] - actual[s][k];
      abs_err += std::abs(e);
      sq_err += e * e;
      sum += actual[s][k];
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  double ss_tot = 0.0;
  for (const auto& row : actual)
    for (double v : row) ss_tot += (v - mean) * (v - mean);
  AccuracyReport r;
  r.mse = sq_err / static_cast<double>(count);
  r.mae_accuracy = mean > 0.0 ? 1.0 - (abs_err / static_cast<double>(count)) / mean : 0.0;
  r.r2 = ss_tot > 0.0 ? 1.0 - sq_err / ss_tot : 0.0;
  return r;
}

}  // namespace skipstop
