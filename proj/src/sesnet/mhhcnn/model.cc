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

#include "sesnet/mhhcnn/model.h"

#include <algorithm>
#include <cmath>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"
#include "sesnet/ndcore/ops.h"

namespace sesnet::mhhcnn {

using schema::FeatureKind;
using schema::SesLevel;

void MhhcnnConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ValidationError(std::string("mhhcnn config: ") + name + " must be positive");
  };
  positive(embed_dim, "embed_dim");
  positive(lstm_hidden, "lstm_hidden");
  positive(conv_channels, "conv_channels");
  positive(kernel_size, "kernel_size");
  positive(epochs, "epochs");
  positive(batch_size, "batch_size");
  for (int w : dense_widths) positive(w, "dense width");
  if (!(lr > 0.0)) throw ValidationError("mhhcnn config: lr must be positive");
}

nlohmann::json MhhcnnConfig::to_json() const {
  return {{"embed_dim", embed_dim},       {"lstm_hidden", lstm_hidden},
          {"conv_channels", conv_channels}, {"kernel_size", kernel_size},
          {"dense_widths", dense_widths}, {"lr", lr},
          {"epochs", epochs},             {"batch_size", batch_size},
          {"seed", seed}};
}

void MhhcnnConfig::update_from_json(const nlohmann::json& j) {
  try {
    embed_dim = j.value("embed_dim", embed_dim);
    lstm_hidden = j.value("lstm_hidden", lstm_hidden);
    conv_channels = j.value("conv_channels", conv_channels);
    kernel_size = j.value("kernel_size", kernel_size);
    dense_widths = j.value("dense_widths", dense_widths);
    lr = j.value("lr", lr);
    epochs = j.value("epochs", epochs);
    batch_size = j.value("batch_size", batch_size);
    seed = j.value("seed", seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mhhcnn config: ") + e.what());
  }
}

FeatureEncoder FeatureEncoder::fit(const schema::Dataset& dataset,
                                   std::span<const std::size_t> rows) {
  const schema::FeatureSchema& schema = dataset.schema();
  FeatureEncoder enc;
  enc.edges_.resize(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].kind != FeatureKind::kContinuous) continue;
    std::vector<double> values;
    for (std::size_t r : rows) {
      if (const auto& v = dataset[r].values[f]) values.push_back(*v);
    }
    if (!values.empty()) enc.edges_[f] = schema::fit_quantile_bins(values, schema[f].bins);
  }
  return enc;
}

int FeatureEncoder::encode_value(std::size_t feature, const schema::FeatureSpec& spec,
                                 const schema::FeatureValue& value) const {
  if (!value) return spec.missing_index();
  if (spec.kind == FeatureKind::kCategorical) return static_cast<int>(*value);
  return edges_.at(feature).assign(*value);
}

EncodedRows FeatureEncoder::encode(const schema::Dataset& dataset) const {
  const schema::FeatureSchema& schema = dataset.schema();
  if (edges_.size() != schema.size()) {
    throw ValidationError("feature encoder was fitted for a different schema");
  }
  EncodedRows out;
  out.n_rows = dataset.size();
  out.n_features = schema.size();
  out.indices.reserve(out.n_rows * out.n_features);
  for (const auto& rec : dataset.records()) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      out.indices.push_back(encode_value(f, schema[f], rec.values[f]));
    }
  }
  return out;
}

nlohmann::json FeatureEncoder::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : edges_) arr.push_back(e.edges);
  return arr;
}

FeatureEncoder FeatureEncoder::from_json(const nlohmann::json& j) {
  FeatureEncoder enc;
  for (const auto& e : j) enc.edges_.push_back({e.get<std::vector<double>>()});
  return enc;
}

MhhcnnModel::MhhcnnModel(schema::FeatureSchema schema, MhhcnnConfig config)
    : schema_(std::move(schema)), config_(std::move(config)) {}

MhhcnnModel MhhcnnModel::build(const schema::FeatureSchema& schema,
                               const MhhcnnConfig& config) {
  config.validate();
  MhhcnnModel model(schema, config);
  const std::size_t hidden = static_cast<std::size_t>(config.lstm_hidden);
  const std::size_t kernel = static_cast<std::size_t>(config.kernel_size);
  for (SesLevel level : schema::kAllLevels) {
    std::vector<std::size_t> idx = schema.indices_at(level);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return schema[a].id < schema[b].id;
    });
    const std::size_t length = idx.size() * hidden;
    if (kernel > length) {
      throw ValidationError(
          std::string("mhhcnn: ") + schema::level_name(level) + " level has " +
          std::to_string(idx.size()) + " feature(s), a signal of length " +
          std::to_string(length) + ", shorter than kernel_size " +
          std::to_string(kernel) + "; use kernel_size <= " + std::to_string(length));
    }
    model.layout_[static_cast<std::size_t>(level)] = std::move(idx);
  }

  Rng rng(config.seed);
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const std::string name = "head." + schema[f].id;
    nn::EmbeddingTable emb(name + ".embedding",
                           static_cast<std::size_t>(schema[f].encoded_levels()),
                           static_cast<std::size_t>(config.embed_dim), rng);
    nn::LstmCellParams lstm(name + ".lstm", static_cast<std::size_t>(config.embed_dim),
                            hidden, rng);
    model.heads_.push_back({std::move(emb), std::move(lstm)});
  }
  std::size_t merged = 0;
  for (SesLevel level : schema::kAllLevels) {
    model.convs_.emplace_back(std::string("conv.") + schema::level_name(level), 1,
                              static_cast<std::size_t>(config.conv_channels), kernel, rng);
    merged += model.level_output_size(level);
  }
  std::size_t in = merged;
  for (std::size_t k = 0; k < config.dense_widths.size(); ++k) {
    const std::size_t out = static_cast<std::size_t>(config.dense_widths[k]);
    model.dense_.emplace_back("dense." + std::to_string(k), in, out, rng);
    in = out;
  }
  model.dense_.emplace_back("output", in, 1, rng);
  return model;
}

std::size_t MhhcnnModel::level_output_size(SesLevel level) const {
  const std::size_t length =
      level_layout(level).size() * static_cast<std::size_t>(config_.lstm_hidden);
  return static_cast<std::size_t>(config_.conv_channels) *
         (length - static_cast<std::size_t>(config_.kernel_size) + 1);
}

std::vector<nd::Parameter*> MhhcnnModel::parameters() {
  std::vector<nd::Parameter*> out;
  for (FeatureHead& h : heads_) {
    out.push_back(&h.embedding.weights);
    for (nd::Parameter* p : h.lstm.parameters()) out.push_back(p);
  }
  for (nn::Conv1dParams& c : convs_) {
    for (nd::Parameter* p : c.parameters()) out.push_back(p);
  }
  for (nn::DenseParams& d : dense_) {
    for (nd::Parameter* p : d.parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const nd::Parameter*> MhhcnnModel::parameters() const {
  auto mutable_params = const_cast<MhhcnnModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::size_t MhhcnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const nd::Parameter* p : parameters()) n += p->value.size();
  return n;
}

nd::Var MhhcnnModel::forward(nd::Tape& tape, const EncodedRows& rows,
                             std::span<const std::size_t> batch) {
  if (rows.n_features != schema_.size()) {
    throw ValidationError("mhhcnn: encoded rows have " + std::to_string(rows.n_features) +
                          " features, model expects " + std::to_string(schema_.size()));
  }
  const std::size_t b = batch.size();
  const std::size_t hidden = static_cast<std::size_t>(config_.lstm_hidden);
  std::vector<nd::Var> head_out(schema_.size());
  nd::Var zeros = tape.constant(nd::Tensor({b, hidden}));
  std::vector<int> column(b);
  for (std::size_t f = 0; f < schema_.size(); ++f) {
    for (std::size_t i = 0; i < b; ++i) column[i] = rows.at(batch[i], f);
    nd::Var emb = nn::embedding_lookup(tape, heads_[f].embedding, column);
    head_out[f] = nn::lstm_step(tape, heads_[f].lstm, emb, zeros, zeros).h;
  }
  std::vector<nd::Var> level_out;
  for (SesLevel level : schema::kAllLevels) {
    std::vector<nd::Var> parts;
    for (std::size_t f : level_layout(level)) parts.push_back(head_out[f]);
    nd::Var signal = nd::concat_cols(parts);
    const std::size_t length = parts.size() * hidden;
    nd::Var conv = nn::conv1d(tape, this->conv(level), nd::reshape(signal, {b, 1, length}));
    level_out.push_back(nd::reshape(nd::tanh(conv), {b, level_output_size(level)}));
  }
  nd::Var x = nd::concat_cols(level_out);
  for (std::size_t k = 0; k + 1 < dense_.size(); ++k) {
    x = nd::tanh(nn::dense(tape, dense_[k], x));
  }
  return nd::sigmoid(nn::dense(tape, dense_.back(), x));
}

std::vector<double> MhhcnnModel::predict(const EncodedRows& rows) const {
  IncrementalEvaluator eval(*this);
  std::vector<double> out(rows.n_rows);
  for (std::size_t r = 0; r < rows.n_rows; ++r) out[r] = eval.evaluate(rows.row(r));
  return out;
}

double MhhcnnModel::predict_row(std::span<const int> row) const {
  return IncrementalEvaluator(*this).evaluate(row);
}

namespace {

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

IncrementalEvaluator::IncrementalEvaluator(const MhhcnnModel& model)
    : n_features_(model.schema().size()),
      hidden_(static_cast<std::size_t>(model.config().lstm_hidden)),
      channels_(static_cast<std::size_t>(model.config().conv_channels)),
      kernel_(static_cast<std::size_t>(model.config().kernel_size)) {
  const std::size_t h = hidden_;
  head_cache_.resize(n_features_);
  for (std::size_t f = 0; f < n_features_; ++f) {
    const FeatureHead& head = model.head(f);
    const nd::Tensor& table = head.embedding.weights.value;
    const nd::Tensor& w = head.lstm.input_weights.value;
    const nd::Tensor& bias = head.lstm.bias.value;
    const std::size_t e = head.embedding.dim;
    for (std::size_t v = 0; v < head.embedding.n_levels; ++v) {
      // Zero initial state: the recurrent term vanishes.
      std::vector<double> z(4 * h);
      for (std::size_t j = 0; j < 4 * h; ++j) {
        double acc = bias[j];
        for (std::size_t k = 0; k < e; ++k) acc += table.at(v, k) * w.at(k, j);
        z[j] = acc;
      }
      std::vector<double> out(h);
      for (std::size_t j = 0; j < h; ++j) {
        const double i_gate = sigmoid(z[j]);
        const double o_gate = sigmoid(z[2 * h + j]);
        const double g = std::tanh(z[3 * h + j]);
        out[j] = o_gate * std::tanh(i_gate * g);
      }
      head_cache_[f].push_back(std::move(out));
    }
  }
  level_of_.assign(n_features_, 0);
  position_of_.assign(n_features_, 0);
  std::size_t offset = 0;
  for (SesLevel level : schema::kAllLevels) {
    const std::size_t l = static_cast<std::size_t>(level);
    Level& lv = levels_[l];
    lv.features = model.level_layout(level);
    for (std::size_t p = 0; p < lv.features.size(); ++p) {
      level_of_[lv.features[p]] = l;
      position_of_[lv.features[p]] = p;
    }
    lv.length = lv.features.size() * h;
    lv.out_len = lv.length - kernel_ + 1;
    lv.offset = offset;
    offset += channels_ * lv.out_len;
    const nn::Conv1dParams& conv = model.conv(level);
    conv_w_[l].assign(conv.kernel.value.values().begin(), conv.kernel.value.values().end());
    conv_b_[l].assign(conv.bias.value.values().begin(), conv.bias.value.values().end());
  }
  flat_size_ = offset;
  for (const nn::DenseParams& d : model.dense_layers()) {
    dense_.push_back({d.in_dim, d.out_dim,
                      {d.weights.value.values().begin(), d.weights.value.values().end()},
                      {d.bias.value.values().begin(), d.bias.value.values().end()}});
  }
}

void IncrementalEvaluator::recompute_level(std::size_t l, std::span<const int> row,
                                           std::vector<double>& signal,
                                           std::vector<double>& flat) const {
  const Level& lv = levels_[l];
  signal.resize(lv.length);
  for (std::size_t p = 0; p < lv.features.size(); ++p) {
    const std::size_t f = lv.features[p];
    const std::vector<double>& h = head_cache_[f].at(static_cast<std::size_t>(row[f]));
    std::copy(h.begin(), h.end(), signal.begin() + static_cast<long>(p * hidden_));
  }
  for (std::size_t o = 0; o < channels_; ++o) {
    const double* w = conv_w_[l].data() + o * kernel_;
    for (std::size_t t = 0; t < lv.out_len; ++t) {
      double acc = conv_b_[l][o];
      for (std::size_t k = 0; k < kernel_; ++k) acc += w[k] * signal[t + k];
      flat[lv.offset + o * lv.out_len + t] = std::tanh(acc);
    }
  }
}

double IncrementalEvaluator::finish(std::span<const double> z1) const {
  if (dense_.size() == 1) return sigmoid(z1[0]);
  std::vector<double> a(z1.begin(), z1.end());
  std::vector<double> z;
  for (std::size_t k = 1; k < dense_.size(); ++k) {
    const Dense& d = dense_[k];
    z.assign(d.b.begin(), d.b.end());
    for (std::size_t i = 0; i < d.in; ++i) {
      const double x = std::tanh(a[i]);
      const double* wrow = d.w.data() + i * d.out;
      for (std::size_t j = 0; j < d.out; ++j) z[j] += x * wrow[j];
    }
    a.swap(z);
  }
  return sigmoid(a[0]);
}

double IncrementalEvaluator::evaluate(std::span<const int> row) const {
  if (row.size() != n_features_) {
    throw ValidationError("mhhcnn: row has " + std::to_string(row.size()) +
                          " features, model expects " + std::to_string(n_features_));
  }
  for (std::size_t f = 0; f < n_features_; ++f) {
    if (row[f] < 0 || static_cast<std::size_t>(row[f]) >= head_cache_[f].size()) {
      throw ValidationError("mhhcnn: level index " + std::to_string(row[f]) +
                            " out of range for feature " + std::to_string(f));
    }
  }
  std::vector<double> flat(flat_size_);
  std::vector<double> signal;
  for (std::size_t l = 0; l < 3; ++l) recompute_level(l, row, signal, flat);
  const Dense& d0 = dense_[0];
  std::vector<double> z1(d0.b.begin(), d0.b.end());
  for (std::size_t i = 0; i < d0.in; ++i) {
    const double x = flat[i];
    const double* wrow = d0.w.data() + i * d0.out;
    for (std::size_t j = 0; j < d0.out; ++j) z1[j] += x * wrow[j];
  }
  return finish(z1);
}

double IncrementalEvaluator::reset(std::span<const int> row) {
  const double value = evaluate(row);
  current_.assign(row.begin(), row.end());
  flat_.assign(flat_size_, 0.0);
  for (std::size_t l = 0; l < 3; ++l) recompute_level(l, current_, signal_[l], flat_);
  const Dense& d0 = dense_[0];
  z1_.assign(d0.b.begin(), d0.b.end());
  for (std::size_t i = 0; i < d0.in; ++i) {
    const double* wrow = d0.w.data() + i * d0.out;
    for (std::size_t j = 0; j < d0.out; ++j) z1_[j] += flat_[i] * wrow[j];
  }
  return value;
}

double IncrementalEvaluator::set_feature(std::size_t f, int value) {
  if (current_.empty()) throw ValidationError("incremental evaluator used before reset");
  if (value < 0 || static_cast<std::size_t>(value) >= head_cache_.at(f).size()) {
    throw ValidationError("mhhcnn: level index out of range");
  }
  if (current_[f] == value) return output();
  current_[f] = value;
  const std::size_t l = level_of_[f];
  const Level& lv = levels_[l];
  std::vector<double>& signal = signal_[l];
  const std::size_t start = position_of_[f] * hidden_;
  const std::vector<double>& h = head_cache_[f][static_cast<std::size_t>(value)];
  std::copy(h.begin(), h.end(), signal.begin() + static_cast<long>(start));
  // Conv outputs t with [t, t + kernel) overlapping [start, start + hidden).
  const std::size_t t_begin = start + 1 >= kernel_ ? start + 1 - kernel_ : 0;
  const std::size_t t_end = std::min(lv.out_len, start + hidden_);
  const Dense& d0 = dense_[0];
  for (std::size_t o = 0; o < channels_; ++o) {
    const double* w = conv_w_[l].data() + o * kernel_;
    for (std::size_t t = t_begin; t < t_end; ++t) {
      double acc = conv_b_[l][o];
      for (std::size_t k = 0; k < kernel_; ++k) acc += w[k] * signal[t + k];
      const std::size_t idx = lv.offset + o * lv.out_len + t;
      const double updated = std::tanh(acc);
      const double delta = updated - flat_[idx];
      if (delta == 0.0) continue;
      flat_[idx] = updated;
      const double* wrow = d0.w.data() + idx * d0.out;
      for (std::size_t j = 0; j < d0.out; ++j) z1_[j] += delta * wrow[j];
    }
  }
  return output();
}

void IncrementalEvaluator::snapshot() {
  if (current_.empty()) throw ValidationError("incremental evaluator used before reset");
  saved_ = {current_, signal_, flat_, z1_};
}

double IncrementalEvaluator::restore() {
  if (saved_.current.empty()) throw ValidationError("incremental evaluator has no snapshot");
  current_ = saved_.current;
  signal_ = saved_.signal;
  flat_ = saved_.flat;
  z1_ = saved_.z1;
  return output();
}

double IncrementalEvaluator::output() const { return finish(z1_); }

}  // namespace sesnet::mhhcnn
