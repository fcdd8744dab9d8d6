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

#ifndef SESNET_MHHCNN_MODEL_H_
#define SESNET_MHHCNN_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/ndcore/tape.h"
#include "sesnet/nn/layers.h"
#include "sesnet/schema/schema.h"

namespace sesnet::mhhcnn {

struct MhhcnnConfig {
  int embed_dim = 8;
  int lstm_hidden = 8;
  int conv_channels = 4;
  int kernel_size = 3;
  std::vector<int> dense_widths = {32};
  double lr = 1e-3;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  // Keys absent from `j` keep their current values.
  void update_from_json(const nlohmann::json& j);
};

// Row-major matrix of per-feature level indices (one row per building).
struct EncodedRows {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<int> indices;

  std::span<const int> row(std::size_t r) const {
    return {indices.data() + r * n_features, n_features};
  }
  int at(std::size_t r, std::size_t f) const { return indices[r * n_features + f]; }
};

// Maps raw feature values to embedding indices. Continuous features use
// quantile edges fitted on the training rows only; missing values map to the
// feature's dedicated missing index.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  static FeatureEncoder fit(const schema::Dataset& dataset,
                            std::span<const std::size_t> rows);

  int encode_value(std::size_t feature, const schema::FeatureSpec& spec,
                   const schema::FeatureValue& value) const;
  EncodedRows encode(const schema::Dataset& dataset) const;

  // One entry per schema feature; empty for categorical features.
  const std::vector<schema::BinEdges>& edges() const { return edges_; }
  bool fitted() const { return !edges_.empty(); }

  nlohmann::json to_json() const;
  static FeatureEncoder from_json(const nlohmann::json& j);

 private:
  std::vector<schema::BinEdges> edges_;
};

// Per-feature input head: level index -> embedding -> one LSTM step.
struct FeatureHead {
  nn::EmbeddingTable embedding;
  nn::LstmCellParams lstm;
};

// Multi-headed hierarchical classifier. Heads sharing a socioecological level
// are laid side by side (feature-major, sorted by feature id) into a
// one-channel signal that feeds that level's convolution; the three flattened
// level outputs are concatenated and passed through a tanh dense stack to a
// sigmoid unit.
class MhhcnnModel {
 public:
  // Throws ValidationError when a level's signal is shorter than the kernel.
  static MhhcnnModel build(const schema::FeatureSchema& schema,
                           const MhhcnnConfig& config);

  const schema::FeatureSchema& schema() const { return schema_; }
  const MhhcnnConfig& config() const { return config_; }
  const FeatureEncoder& encoder() const { return encoder_; }
  void set_encoder(FeatureEncoder encoder) { encoder_ = std::move(encoder); }

  // Schema indices of the heads feeding `level`'s convolution, in signal
  // order.
  const std::vector<std::size_t>& level_layout(schema::SesLevel level) const {
    return layout_[static_cast<std::size_t>(level)];
  }
  // Length of the flattened conv output of `level`.
  std::size_t level_output_size(schema::SesLevel level) const;

  std::vector<nd::Parameter*> parameters();
  std::vector<const nd::Parameter*> parameters() const;
  std::size_t parameter_count() const;

  FeatureHead& head(std::size_t feature) { return heads_[feature]; }
  const FeatureHead& head(std::size_t feature) const { return heads_[feature]; }
  nn::Conv1dParams& conv(schema::SesLevel level) {
    return convs_[static_cast<std::size_t>(level)];
  }
  const nn::Conv1dParams& conv(schema::SesLevel level) const {
    return convs_[static_cast<std::size_t>(level)];
  }
  std::vector<nn::DenseParams>& dense_layers() { return dense_; }
  const std::vector<nn::DenseParams>& dense_layers() const { return dense_; }

  // Taped forward pass over `batch` rows of `rows`: (batch x 1) probabilities.
  nd::Var forward(nd::Tape& tape, const EncodedRows& rows,
                  std::span<const std::size_t> batch);

  // Tape-free probabilities for every row.
  std::vector<double> predict(const EncodedRows& rows) const;
  double predict_row(std::span<const int> row) const;

 private:
  MhhcnnModel(schema::FeatureSchema schema, MhhcnnConfig config);

  schema::FeatureSchema schema_;
  MhhcnnConfig config_;
  FeatureEncoder encoder_;
  std::vector<FeatureHead> heads_;
  std::array<std::vector<std::size_t>, 3> layout_;
  std::vector<nn::Conv1dParams> convs_;
  std::vector<nn::DenseParams> dense_;
};

// Frozen, tape-free view of a model supporting incremental re-evaluation
// when a single feature's level index changes. Changing one head touches
// only the conv outputs whose receptive field overlaps it, so the first dense
// layer's pre-activation is patched instead of recomputed.
class IncrementalEvaluator {
 public:
  explicit IncrementalEvaluator(const MhhcnnModel& model);

  std::size_t num_features() const { return n_features_; }

  // Full evaluation; resets the incremental state to `row`.
  double reset(std::span<const int> row);
  // Switches feature `f` to level `value` and returns the new output.
  double set_feature(std::size_t f, int value);
  double output() const;
  std::span<const int> current() const { return current_; }
  // Saves the incremental state so restore() can return to it cheaply.
  void snapshot();
  double restore();

  // Plain full evaluation (does not touch incremental state).
  double evaluate(std::span<const int> row) const;

 private:
  struct Level {
    std::vector<std::size_t> features;  // signal order
    std::size_t offset = 0;             // in the flattened concatenation
    std::size_t length = 0;             // signal length
    std::size_t out_len = 0;
  };
  struct Dense {
    std::size_t in = 0, out = 0;
    std::vector<double> w, b;
  };

  void recompute_level(std::size_t level, std::span<const int> row,
                       std::vector<double>& signal, std::vector<double>& flat) const;
  double finish(std::span<const double> z1) const;

  std::size_t n_features_ = 0;
  std::size_t hidden_ = 0;
  std::size_t channels_ = 0;
  std::size_t kernel_ = 0;
  // head_cache_[f][v] is the head output (hidden_) for level index v.
  std::vector<std::vector<std::vector<double>>> head_cache_;
  std::vector<std::size_t> level_of_;      // feature -> level slot
  std::vector<std::size_t> position_of_;   // feature -> position within level
  std::array<Level, 3> levels_;
  std::array<std::vector<double>, 3> conv_w_, conv_b_;
  std::vector<Dense> dense_;
  std::size_t flat_size_ = 0;

  // Incremental state.
  std::vector<int> current_;
  std::array<std::vector<double>, 3> signal_;
  std::vector<double> flat_;  // tanh(conv) outputs, concatenated
  std::vector<double> z1_;    // first dense pre-activation

  struct Saved {
    std::vector<int> current;
    std::array<std::vector<double>, 3> signal;
    std::vector<double> flat, z1;
  } saved_;
};

}  // namespace sesnet::mhhcnn

#endif  // SESNET_MHHCNN_MODEL_H_
