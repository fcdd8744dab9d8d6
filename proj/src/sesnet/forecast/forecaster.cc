/*
 * Copyright 2026 The Sesnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sesnet/forecast/forecaster.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"
#include "sesnet/common/text.h"
#include "sesnet/ndcore/adam.h"
#include "sesnet/ndcore/ops.h"

namespace sesnet::forecast {

void ForecastConfig::validate() const {
  if (horizon != 3 && horizon != 7 && horizon != 14) {
    throw ValidationError("forecast: horizon must be 3, 7 or 14, got " + std::to_string(horizon));
  }
  if (window < horizon) throw ValidationError("forecast: window must be >= horizon");
  if (lstm_hidden <= 0 || max_epochs <= 0 || patience <= 0 || origin_stride <= 0 ||
      batch_size <= 0) {
    throw ValidationError(
        "forecast: lstm_hidden, max_epochs, patience, origin_stride and batch_size must be "
        "positive");
  }
  if (!(lr > 0.0)) throw ValidationError("forecast: lr must be positive");
}

nlohmann::json ForecastConfig::to_json() const {
  return {{"window", window},
          {"lstm_hidden", lstm_hidden},
          {"horizon", horizon},
          {"use_composite", use_composite},
          {"lr", lr},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"seed", seed},
          {"origin_stride", origin_stride},
          {"batch_size", batch_size},
          {"metric", metric == ForecastMetric::kMae ? "mae" : "rmse"}};
}

void ForecastConfig::update_from_json(const nlohmann::json& j) {
  try {
    window = j.value("window", window);
    lstm_hidden = j.value("lstm_hidden", lstm_hidden);
    horizon = j.value("horizon", horizon);
    use_composite = j.value("use_composite", use_composite);
    lr = j.value("lr", lr);
    max_epochs = j.value("max_epochs", max_epochs);
    patience = j.value("patience", patience);
    seed = j.value("seed", seed);
    origin_stride = j.value("origin_stride", origin_stride);
    batch_size = j.value("batch_size", batch_size);
    if (j.contains("metric")) {
      const std::string m = j.at("metric").get<std::string>();
      if (m == "mae") {
        metric = ForecastMetric::kMae;
      } else if (m == "rmse") {
        metric = ForecastMetric::kRmse;
      } else {
        throw ValidationError("forecast: metric must be mae or rmse, got " + m);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("forecast config: ") + e.what());
  }
}

std::vector<nd::Parameter*> Forecaster::parameters() {
  std::vector<nd::Parameter*> out = lstm.parameters();
  for (nd::Parameter* p : head.parameters()) out.push_back(p);
  return out;
}

std::size_t Forecaster::parameter_count() const {
  auto* self = const_cast<Forecaster*>(this);
  std::size_t n = 0;
  for (const nd::Parameter* p : self->parameters()) n += p->value.size();
  return n;
}

nd::Var Forecaster::forward(nd::Tape& tape, std::span<const nd::Tensor> inputs) {
  if (inputs.empty()) throw ShapeError("forecaster: empty input sequence");
  const std::size_t b = inputs[0].rows();
  const std::size_t h = static_cast<std::size_t>(config.lstm_hidden);
  nn::LstmBound cell = nn::bind(tape, lstm);
  nn::LstmState state{tape.constant(nd::Tensor({b, h})), tape.constant(nd::Tensor({b, h}))};
  for (const nd::Tensor& x : inputs) {
    state = nn::lstm_step(cell, tape.constant(x), state.h, state.c);
  }
  return nn::dense(tape, head, state.h);
}

Forecaster build_forecaster(const ForecastConfig& config) {
  config.validate();
  const std::size_t h = static_cast<std::size_t>(config.lstm_hidden);
  Rng rng(config.seed);
  nn::LstmCellParams base("forecast.lstm", 1, h, rng);
  nn::DenseParams head("forecast.head", h, static_cast<std::size_t>(config.horizon), rng);
  if (!config.use_composite) return Forecaster{config, 1, std::move(base), std::move(head)};

  Rng extra_rng(derive_seed(config.seed, 1));
  nn::LstmCellParams lstm("forecast.lstm", 2, h, extra_rng);
  for (std::size_t j = 0; j < 4 * h; ++j) lstm.input_weights.value.at(0, j) = base.input_weights.value.at(0, j);
  lstm.hidden_weights.value = base.hidden_weights.value;
  lstm.bias.value = base.bias.value;
  return Forecaster{config, 2, std::move(lstm), std::move(head)};
}

ForecastData make_forecast_data(const schema::Dataset& dataset,
                                std::span<const schema::CaseSeries> series,
                                const schema::StudyWindow& window,
                                const std::map<std::string, double>& composites) {
  ForecastData data;
  data.start = window.start;
  const std::size_t n_days = static_cast<std::size_t>(window.length_days());
  data.counts.assign(dataset.size(), std::vector<double>(n_days, 0.0));
  for (const auto& rec : dataset.records()) data.building_ids.push_back(rec.building_id);
  bool covered = false;
  for (const auto& s : series) {
    const std::optional<std::size_t> idx = dataset.find(s.building_id);
    if (!idx) throw ValidationError("forecast: cases for unknown building " + s.building_id);
    if (!s.counts.empty() && s.end() >= window.end) covered = true;
    for (std::size_t t = 0; t < n_days; ++t) {
      data.counts[*idx][t] += s.count_on(add_days(window.start, static_cast<long>(t)));
    }
  }
  if (!covered) {
    throw ValidationError("forecast: case series end before " + format_date(window.end));
  }
  if (!composites.empty()) {
    std::vector<double> raw;
    for (const auto& id : data.building_ids) {
      const auto it = composites.find(id);
      if (it == composites.end()) throw ValidationError("forecast: no composite for building " + id);
      raw.push_back(it->second);
    }
    const double n = static_cast<double>(raw.size());
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
    double var = 0.0;
    for (double v : raw) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (double v : raw) data.composite.push_back(sd > 0 ? (v - mean) / sd : 0.0);
  }
  return data;
}

nlohmann::json ForecastRun::to_json() const {
  return {{"chain", chain},         {"horizon", horizon}, {"variant", variant},
          {"curve", curve},         {"peak", peak},       {"epoch_at_peak", epoch_at_peak},
          {"epochs_run", epochs_run}};
}

namespace {

struct Sample {
  std::size_t building;
  std::size_t origin;  // day index of the first target
};

class ChainProblem {
 public:
  ChainProblem(const ChainSpec& chain, const ForecastData& data, const ForecastConfig& config)
      : data_(data), config_(config) {
    if (chain.test.start < data.start || chain.test.end > data.end() ||
        chain.train.start < data.start) {
      throw ValidationError("forecast: chain " + std::to_string(chain.index) +
                            " test window " + format_date(chain.test.start) + ".." +
                            format_date(chain.test.end) + " outside series coverage " +
                            format_date(data.start) + ".." + format_date(data.end()));
    }
    const auto day = [&](Date d) { return static_cast<std::size_t>(days_between(data.start, d)); };
    const std::size_t train_begin = day(chain.train.start);
    const std::size_t train_end = day(chain.train.end);
    const std::size_t test_begin = day(chain.test.start);
    const std::size_t test_end = day(chain.test.end);
    const std::size_t w = static_cast<std::size_t>(config.window);
    const std::size_t h = static_cast<std::size_t>(config.horizon);

    // Normalisation from training days only.
    for (const auto& counts : data.counts) {
      const auto first = counts.begin() + static_cast<long>(train_begin);
      const auto last = counts.begin() + static_cast<long>(train_end) + 1;
      const auto [lo, hi] = std::minmax_element(first, last);
      lo_.push_back(*lo);
      scale_.push_back(std::max(*hi - *lo, 1.0));
    }
    // Training samples: inputs and targets inside the training window.
    if (train_end + 1 < train_begin + w + h) {
      throw ValidationError("forecast: chain " + std::to_string(chain.index) +
                            " training window shorter than window + horizon");
    }
    std::vector<std::size_t> train_origins;
    for (std::size_t o = train_end + 1 - h;; o -= static_cast<std::size_t>(config.origin_stride)) {
      train_origins.push_back(o);
      if (o < train_begin + w + static_cast<std::size_t>(config.origin_stride)) break;
    }
    std::reverse(train_origins.begin(), train_origins.end());
    for (std::size_t b = 0; b < data.counts.size(); ++b) {
      for (std::size_t o : train_origins) train_.push_back({b, o});
    }
    // Test samples: every target day inside the test window.
    if (test_begin < w) throw ValidationError("forecast: no history before the test window");
    for (std::size_t b = 0; b < data.counts.size(); ++b) {
      for (std::size_t o = test_begin; o + h <= test_end + 1; ++o) test_.push_back({b, o});
    }
  }

  const std::vector<Sample>& train() const { return train_; }
  const std::vector<Sample>& test() const { return test_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& scale() const { return scale_; }

  std::vector<nd::Tensor> inputs(std::span<const Sample> batch, bool use_composite) const {
    const std::size_t w = static_cast<std::size_t>(config_.window);
    const std::size_t dim = use_composite ? 2 : 1;
    std::vector<nd::Tensor> out(w, nd::Tensor({batch.size(), dim}));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Sample& s = batch[i];
      const std::vector<double>& counts = data_.counts[s.building];
      for (std::size_t t = 0; t < w; ++t) {
        out[t].at(i, 0) = (counts[s.origin - w + t] - lo_[s.building]) / scale_[s.building];
        if (use_composite) out[t].at(i, 1) = data_.composite[s.building];
      }
    }
    return out;
  }

  nd::Tensor targets(std::span<const Sample> batch) const {
    const std::size_t h = static_cast<std::size_t>(config_.horizon);
    nd::Tensor out({batch.size(), h});
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Sample& s = batch[i];
      for (std::size_t k = 0; k < h; ++k) {
        out.at(i, k) = (data_.counts[s.building][s.origin + k] - lo_[s.building]) / scale_[s.building];
      }
    }
    return out;
  }

  // Negated error of de-normalised, non-negative predictions on the test set.
  double evaluate(Forecaster& model) const {
    const std::size_t h = static_cast<std::size_t>(config_.horizon);
    const std::size_t bs = 512;
    double abs_sum = 0.0, sq_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t start = 0; start < test_.size(); start += bs) {
      std::span<const Sample> batch(test_.data() + start, std::min(bs, test_.size() - start));
      nd::Tape tape;
      const nd::Tensor& pred =
          model.forward(tape, inputs(batch, model.config.use_composite)).value();
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const Sample& s = batch[i];
        for (std::size_t k = 0; k < h; ++k) {
          const double p =
              std::max(0.0, pred.at(i, k) * scale_[s.building] + lo_[s.building]);
          const double err = p - data_.counts[s.building][s.origin + k];
          abs_sum += std::abs(err);
          sq_sum += err * err;
          ++n;
        }
      }
    }
    const double d = static_cast<double>(n);
    return config_.metric == ForecastMetric::kMae ? -abs_sum / d : -std::sqrt(sq_sum / d);
  }

 private:
  const ForecastData& data_;
  const ForecastConfig& config_;
  std::vector<double> lo_, scale_;
  std::vector<Sample> train_, test_;
};

ForecastRun train_variant(const ChainSpec& chain, const ChainProblem& problem,
                          const ForecastConfig& config) {
  Forecaster model = build_forecaster(config);
  nd::AdamHyper hyper;
  hyper.lr = config.lr;
  nd::Adam adam(model.parameters(), hyper);
  Rng rng(derive_seed(config.seed, 2));
  std::vector<Sample> order = problem.train();
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);

  ForecastRun run;
  run.chain = chain.index;
  run.horizon = config.horizon;
  run.variant = config.use_composite ? "augmented" : "base";
  int best_epoch = 0;
  double best = 0.0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += bs, ++batch_index) {
      std::span<const Sample> batch(order.data() + start, std::min(bs, order.size() - start));
      try {
        nd::Tape tape;
        nd::Var pred = model.forward(tape, problem.inputs(batch, config.use_composite));
        nd::Var diff = nd::sub(pred, tape.constant(problem.targets(batch)));
        nd::Var loss = nd::mean(nd::mul(diff, diff));
        tape.backward(loss);
        adam.step();
      } catch (const NumericalError& e) {
        throw NumericalError("forecast: chain " + std::to_string(chain.index) + " " +
                             run.variant + " epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(batch_index + 1) + ": " + e.what());
      }
    }
    const double metric = problem.evaluate(model);
    if (!std::isfinite(metric)) {
      throw NumericalError("forecast: non-finite metric at epoch " + std::to_string(epoch));
    }
    run.curve.push_back(metric);
    if (best_epoch == 0 || metric > best) {
      best = metric;
      best_epoch = epoch;
    }
    if (epoch - best_epoch >= config.patience) break;
  }
  const Peak peak = detect_peak(run.curve);
  run.peak = peak.value;
  run.epoch_at_peak = peak.epoch;
  run.epochs_run = static_cast<int>(run.curve.size());
  return run;
}}  // namespace

ChainSamples chain_samples(const ChainSpec& chain, const ForecastData& data,
                           const ForecastConfig& config) {
  config.validate();
  const ChainProblem problem(chain, data, config);
  ChainSamples out;
  const auto convert = [&](const std::vector<Sample>& samples) {
    std::vector<ChainSamples::Sample> v;
    for (const Sample& s : samples) {
      v.push_back({s.building, add_days(data.start, static_cast<long>(s.origin))});
    }
    return v;
  };
  out.train = convert(problem.train());
  out.test = convert(problem.test());
  out.norm_lo = problem.lo();
  out.norm_scale = problem.scale();
  return out;
}

std::vector<ForecastRun> run_chain(const ChainSpec& chain, const ForecastData& data,
                                   const ForecastConfig& config) {
  config.validate();
  if (data.composite.size() != data.counts.size()) {
    throw ValidationError("forecast: composites are required for the augmented variant");
  }
  const ChainProblem problem(chain, data, config);
  std::vector<ForecastRun> runs;
  for (bool augmented : {false, true}) {
    ForecastConfig variant = config;
    variant.use_composite = augmented;
    runs.push_back(train_variant(chain, problem, variant));
  }
  return runs;
}

nlohmann::json ForecastReport::to_json() const {
  nlohmann::json chains_json = nlohmann::json::array();
  for (const auto& c : chains) {
    chains_json.push_back({{"chain", c.index},
                           {"train_start", format_date(c.train.start)},
                           {"train_end", format_date(c.train.end)},
                           {"test_start", format_date(c.test.start)},
                           {"test_end", format_date(c.test.end)}});
  }
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& r : runs) runs_json.push_back(r.to_json());
  return {{"chains", chains_json}, {"runs", runs_json}, {"config", config}, {"seed", seed}};
}

std::string ForecastReport::summary_csv() const {
  std::string out = "chain,horizon,variant,peak,epoch_at_peak\n";
  for (const auto& r : runs) {
    out += std::to_string(r.chain) + "," + std::to_string(r.horizon) + "," + r.variant + "," +
           format_double(r.peak) + "," + std::to_string(r.epoch_at_peak) + "\n";
  }
  return out;
}

ForecastReport forward_chain(const std::vector<ChainSpec>& chains, const ForecastData& data,
                             const ForecastConfig& config, std::span<const int> horizons) {
  ForecastReport report;
  report.chains = chains;
  report.config = config.to_json();
  report.seed = config.seed;
  for (const auto& chain : chains) {
    for (int h : horizons) {
      ForecastConfig job = config;
      job.horizon = h;
      job.seed = derive_seed(config.seed, static_cast<std::uint64_t>(chain.index * 100 + h));
      for (auto& run : run_chain(chain, data, job)) report.runs.push_back(std::move(run));
    }
  }
  return report;
}

}  // namespace sesnet::forecast
