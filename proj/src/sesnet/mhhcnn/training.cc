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

#include "sesnet/mhhcnn/training.h"

#include <algorithm>
#include <numeric>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"
#include "sesnet/metrics/metrics.h"
#include "sesnet/ndcore/adam.h"
#include "sesnet/ndcore/ops.h"

namespace sesnet::mhhcnn {

namespace {

bool both_classes(std::span<const int> labels, std::span<const std::size_t> rows) {
  bool pos = false, neg = false;
  for (std::size_t r : rows) (labels[r] ? pos : neg) = true;
  return pos && neg;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::vector<int> binarize(std::span<const long> counts, long cutoff) {
  if (cutoff < 1) throw ValidationError("cutoff must be >= 1, got " + std::to_string(cutoff));
  std::vector<int> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] >= cutoff ? 1 : 0;
  return out;
}

nlohmann::json TrainReport::to_json() const {
  return {{"epoch_loss", epoch_loss}, {"epoch_auc", epoch_auc}, {"final_auc", final_auc},
          {"epochs", epochs},         {"seed", seed}};
}

TrainReport train(MhhcnnModel& model, const schema::Dataset& dataset,
                  std::span<const int> labels, std::span<const std::size_t> rows) {
  const MhhcnnConfig& config = model.config();
  if (labels.size() != dataset.size()) {
    throw ValidationError("train: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(dataset.size()) + " buildings");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("train: labels must be 0 or 1");
  }
  if (!both_classes(labels, rows)) {
    throw ValidationError("train: labels must contain both classes");
  }
  model.set_encoder(FeatureEncoder::fit(dataset, rows));
  const EncodedRows encoded = model.encoder().encode(dataset);

  std::vector<int> row_labels;
  for (std::size_t r : rows) row_labels.push_back(labels[r]);

  nd::AdamHyper hyper;
  hyper.lr = config.lr;
  nd::Adam adam(model.parameters(), hyper);
  Rng rng(run_seed(config.seed, 0x5eed));
  std::vector<std::size_t> order(rows.begin(), rows.end());
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  TrainReport report;
  report.seed = config.seed;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      std::vector<double> targets(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        targets[i] = static_cast<double>(labels[batch[i]]);
      }
      try {
        nd::Tape tape;
        nd::Var p = model.forward(tape, encoded, batch);
        nd::Var loss = nd::bce_loss(p, targets);
        loss_sum += loss.value()[0] * static_cast<double>(batch.size());
        tape.backward(loss);
        adam.step();
      } catch (const NumericalError& e) {
        throw NumericalError("train: epoch " + std::to_string(epoch + 1) + " batch " +
                             std::to_string(batch_index + 1) + ": " + e.what());
      }
    }
    std::vector<double> scores;
    const std::vector<double> all = model.predict(encoded);
    for (std::size_t r : rows) scores.push_back(all[r]);
    report.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
    report.epoch_auc.push_back(metrics::roc_auc(scores, row_labels));
  }
  report.epochs = config.epochs;
  report.final_auc = report.epoch_auc.empty() ? 0.0 : report.epoch_auc.back();
  return report;
}

TrainReport train(MhhcnnModel& model, const schema::Dataset& dataset,
                  std::span<const int> labels) {
  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train(model, dataset, labels, rows);
}

nlohmann::json CvReport::to_json() const {
  nlohmann::json folds_json = nlohmann::json::array();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    folds_json.push_back({{"fold", i}, {"size", folds[i].size()}, {"auc", optional_json(fold_auc[i])}});
  }
  nlohmann::json j = {{"k", k},
                      {"seed", seed},
                      {"stratified", stratified},
                      {"folds", folds_json},
                      {"mean_auc", optional_json(mean_auc)},
                      {"pooled_auc", pooled_auc}};
  if (!warning.empty()) j["warning"] = warning;
  return j;
}

CvReport cross_validate(const schema::Dataset& dataset, std::span<const int> labels,
                        const MhhcnnConfig& config, int k) {
  config.validate();
  if (labels.size() != dataset.size()) {
    throw ValidationError("cross_validate: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(dataset.size()) + " buildings");
  }
  if (k < 2) throw ValidationError("cross_validate: k must be >= 2");
  metrics::FoldSplit split =
      metrics::kfold_split(dataset.size(), labels, static_cast<std::size_t>(k), config.seed);

  CvReport report;
  report.k = k;
  report.seed = config.seed;
  report.stratified = split.stratified;
  report.warning = split.warning;
  report.out_of_fold.assign(dataset.size(), 0.0);

  std::vector<std::vector<std::size_t>> train_rows(split.folds.size());
  for (std::size_t i = 0; i < split.folds.size(); ++i) {
    std::vector<char> held(dataset.size(), 0);
    for (std::size_t r : split.folds[i]) held[r] = 1;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      if (!held[r]) train_rows[i].push_back(r);
    }
    if (!both_classes(labels, train_rows[i])) {
      throw ValidationError("cross_validate: training split of fold " + std::to_string(i) +
                            " contains a single class; use a smaller k");
    }
  }

  double auc_sum = 0.0;
  int defined = 0;
  for (std::size_t i = 0; i < split.folds.size(); ++i) {
    MhhcnnConfig fold_config = config;
    fold_config.seed = run_seed(config.seed, i + 1);
    MhhcnnModel model = MhhcnnModel::build(dataset.schema(), fold_config);
    train(model, dataset, labels, train_rows[i]);
    const EncodedRows encoded = model.encoder().encode(dataset);
    std::vector<double> scores;
    std::vector<int> truth;
    for (std::size_t r : split.folds[i]) {
      const double p = model.predict_row(encoded.row(r));
      report.out_of_fold[r] = p;
      scores.push_back(p);
      truth.push_back(labels[r]);
    }
    if (both_classes(labels, split.folds[i])) {
      const double auc = metrics::roc_auc(scores, truth);
      report.fold_auc.push_back(auc);
      auc_sum += auc;
      ++defined;
    } else {
      report.fold_auc.push_back(std::nullopt);
    }
  }
  if (defined > 0) report.mean_auc = auc_sum / defined;
  report.pooled_auc = metrics::roc_auc(report.out_of_fold, labels);
  report.folds = std::move(split.folds);
  return report;
}

nlohmann::json CutoffReport::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    nlohmann::json j = {{"cutoff", c.cutoff}, {"training_auc", optional_json(c.training_auc)}};
    if (!c.note.empty()) j["note"] = c.note;
    cands.push_back(j);
  }
  return {{"best_cutoff", best_cutoff}, {"candidates", cands}, {"seed", seed}};
}

CutoffReport select_cutoff(const schema::Dataset& dataset, std::span<const long> counts,
                           std::span<const long> candidates, const MhhcnnConfig& config) {
  config.validate();
  if (counts.size() != dataset.size()) {
    throw ValidationError("select_cutoff: " + std::to_string(counts.size()) +
                          " counts for " + std::to_string(dataset.size()) + " buildings");
  }
  if (candidates.empty()) throw ValidationError("select_cutoff: empty candidate grid");
  std::vector<long> grid(candidates.begin(), candidates.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  CutoffReport report;
  report.seed = config.seed;
  std::optional<double> best;
  for (long cutoff : grid) {
    CutoffCandidate cand;
    cand.cutoff = cutoff;
    const std::vector<int> labels = binarize(counts, cutoff);
    const long positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0 || positives == static_cast<long>(labels.size())) {
      cand.note = positives == 0 ? "skipped: no building reaches the cutoff"
                                 : "skipped: every building reaches the cutoff";
    } else {
      MhhcnnModel model = MhhcnnModel::build(dataset.schema(), config);
      cand.training_auc = train(model, dataset, labels).final_auc;
      // Ascending grid: strict improvement keeps the smaller cutoff on ties.
      if (!best || *cand.training_auc > *best) {
        best = cand.training_auc;
        report.best_cutoff = cutoff;
      }
    }
    report.candidates.push_back(std::move(cand));
  }
  if (!best) throw ValidationError("select_cutoff: no candidate cutoff yields two classes");
  return report;
}

}  // namespace sesnet::mhhcnn
