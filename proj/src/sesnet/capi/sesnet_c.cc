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

#include "sesnet/sesnet.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/common/errors.h"
#include "sesnet/common/text.h"
#include "sesnet/explain/ranking.h"
#include "sesnet/explain/shapley.h"
#include "sesnet/forecast/chains.h"
#include "sesnet/forecast/forecaster.h"
#include "sesnet/mhhcnn/checkpoint.h"
#include "sesnet/mhhcnn/training.h"
#include "sesnet/schema/io.h"
#include "sesnet/synthgen/synthgen.h"

using nlohmann::json;
namespace fs = std::filesystem;
namespace schema = sesnet::schema;
namespace mhhcnn = sesnet::mhhcnn;
namespace explain = sesnet::explain;
namespace forecast = sesnet::forecast;

struct sesnet_dataset {
  schema::Dataset dataset;
  std::vector<schema::CaseSeries> cases;
};

struct sesnet_classifier {
  mhhcnn::MhhcnnModel model;
};

struct sesnet_attribution {
  explain::ShapleyEstimate estimate;
  std::vector<explain::FeatureRanking> rankings;
  explain::CompositeScoreTable table;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
sesnet_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SESNET_OK;
  } catch (const sesnet::NumericalError& e) {
    g_last_error = e.what();
    return SESNET_ERR_NUMERICAL;
  } catch (const sesnet::ValidationError& e) {
    g_last_error = e.what();
    return SESNET_ERR_VALIDATION;
  } catch (const sesnet::IoError& e) {
    g_last_error = e.what();
    return SESNET_ERR_IO;
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return SESNET_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SESNET_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** out, const json& j) {
  if (out != nullptr) *out = dup_string(j.dump(2));
}

json parse_options(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw sesnet::ValidationError("options must be a JSON object");
  return j;
}

// Options shared by the classifier operations, with defaults filled in.
struct ClassifierOptions {
  mhhcnn::MhhcnnConfig model;
  long cutoff = 105;
  schema::StudyWindow label_window = schema::resurgence_build_window();
  int k = 10;
  std::vector<long> grid = mhhcnn::kDefaultCutoffGrid;

  json to_json() const {
    return {{"model", model.to_json()},
            {"cutoff", cutoff},
            {"label_window",
             {{"start", sesnet::format_date(label_window.start)},
              {"end", sesnet::format_date(label_window.end)}}},
            {"k", k},
            {"grid", grid}};
  }
};

// Defaults tuned for the 345-building scale: a small step size keeps the
// default 200 epochs from memorising estate and TPU groupings.
mhhcnn::MhhcnnConfig default_model_config() {
  mhhcnn::MhhcnnConfig c;
  c.lr = 2e-4;
  return c;
}

ClassifierOptions classifier_options(const json& j) {
  ClassifierOptions o;
  o.model = default_model_config();
  if (j.contains("model")) o.model.update_from_json(j.at("model"));
  if (j.contains("seed")) o.model.seed = j.at("seed").get<std::uint64_t>();
  o.cutoff = j.value("cutoff", o.cutoff);
  if (j.contains("label_window")) {
    const json& w = j.at("label_window");
    o.label_window = schema::StudyWindow(
        "label", sesnet::parse_date(w.at("start").get<std::string>()),
        sesnet::parse_date(w.at("end").get<std::string>()));
  }
  o.k = j.value("k", o.k);
  o.grid = j.value("grid", o.grid);
  o.model.validate();
  return o;
}

json stamp(json report, const json& config, std::uint64_t seed) {
  report["config"] = config;
  report["config_hash"] = sesnet::fnv1a_hex(config.dump());
  report["seed"] = seed;
  return report;
}

std::vector<long> label_counts(const sesnet_dataset& ds, const schema::StudyWindow& window) {
  return schema::accumulate_per_building(ds.dataset, ds.cases, window);
}

}  // namespace

extern "C" {

const char* sesnet_version(void) { return "0.1.0"; }

const char* sesnet_last_error(void) { return g_last_error.c_str(); }

void sesnet_string_free(char* s) { std::free(s); }

sesnet_status sesnet_synth(const char* options_json, sesnet_dataset** out, char** manifest_json) {
  if (out == nullptr) {
    g_last_error = "sesnet_synth: out is null";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const json options = parse_options(options_json);
    const sesnet::synthgen::SynthOptions so = sesnet::synthgen::synth_options_from_json(options);
    sesnet::synthgen::SynthOutput gen = sesnet::synthgen::generate(so.config, so.truth);
    json manifest = gen.manifest.to_json();
    manifest["synth_config"] = sesnet::synthgen::synth_config_json(so.config);
    auto ds = std::make_unique<sesnet_dataset>(
        sesnet_dataset{std::move(gen.dataset), std::move(gen.cases)});
    set_out(manifest_json, manifest);
    *out = ds.release();
  });
}

sesnet_status sesnet_dataset_load(const char* schema_path, const char* features_path,
                                  const char* cases_path, sesnet_dataset** out) {
  if (schema_path == nullptr || features_path == nullptr || cases_path == nullptr ||
      out == nullptr) {
    g_last_error = "sesnet_dataset_load: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    schema::FeatureSchema fs_schema = schema::load_schema(schema_path);
    schema::LoadedData data = schema::load_dataset(features_path, cases_path, fs_schema);
    *out = new sesnet_dataset{std::move(data.dataset), std::move(data.cases)};
  });
}

sesnet_status sesnet_dataset_write(const sesnet_dataset* ds, const char* dir) {
  if (ds == nullptr || dir == nullptr) {
    g_last_error = "sesnet_dataset_write: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const fs::path root(dir);
    sesnet::write_file(root / "schema.json", schema::schema_json_text(ds->dataset.schema()));
    sesnet::write_file(root / "features.csv", schema::features_csv_text(ds->dataset));
    sesnet::write_file(root / "cases.csv", schema::cases_csv_text(ds->dataset, ds->cases));
  });
}

sesnet_status sesnet_dataset_summary(const sesnet_dataset* ds, char** summary_json) {
  if (ds == nullptr || summary_json == nullptr) {
    g_last_error = "sesnet_dataset_summary: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    json districts = json::object();
    for (const std::string& d : ds->dataset.districts()) {
      districts[d] = ds->dataset.indices_in_district(d).size();
    }
    json levels = json::object();
    for (schema::SesLevel level : schema::kAllLevels) {
      levels[schema::level_name(level)] = ds->dataset.schema().indices_at(level).size();
    }
    long total = 0;
    std::string first, last;
    // First and last days with a reported case.
    for (const auto& s : ds->cases) {
      for (std::size_t t = 0; t < s.counts.size(); ++t) {
        if (s.counts[t] == 0) continue;
        total += s.counts[t];
        const std::string d = sesnet::format_date(sesnet::add_days(s.start, static_cast<long>(t)));
        if (first.empty() || d < first) first = d;
        if (last.empty() || d > last) last = d;
      }
    }
    set_out(summary_json, {{"n_buildings", ds->dataset.size()},
                           {"districts", districts},
                           {"features_per_level", levels},
                           {"schema_hash", ds->dataset.schema().hash()},
                           {"total_cases", total},
                           {"first_case_date", first},
                           {"last_case_date", last}});
  });
}

void sesnet_dataset_free(sesnet_dataset* ds) { delete ds; }

sesnet_status sesnet_classifier_train(const sesnet_dataset* ds, const char* options_json,
                                      sesnet_classifier** out, char** report_json) {
  if (ds == nullptr || out == nullptr) {
    g_last_error = "sesnet_classifier_train: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const ClassifierOptions o = classifier_options(parse_options(options_json));
    const std::vector<long> counts = label_counts(*ds, o.label_window);
    const std::vector<int> labels = mhhcnn::binarize(counts, o.cutoff);
    auto clf = std::make_unique<sesnet_classifier>(
        sesnet_classifier{mhhcnn::MhhcnnModel::build(ds->dataset.schema(), o.model)});
    const mhhcnn::TrainReport report = mhhcnn::train(clf->model, ds->dataset, labels);
    long positives = 0;
    for (int y : labels) positives += y;
    json j = report.to_json();
    j["n_buildings"] = labels.size();
    j["n_positive"] = positives;
    j["parameter_count"] = clf->model.parameter_count();
    set_out(report_json, stamp(j, o.to_json(), o.model.seed));
    *out = clf.release();
  });
}

sesnet_status sesnet_classifier_save(const sesnet_classifier* clf, const char* path) {
  if (clf == nullptr || path == nullptr) {
    g_last_error = "sesnet_classifier_save: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] { mhhcnn::save_checkpoint(clf->model, path); });
}

sesnet_status sesnet_classifier_load(const sesnet_dataset* ds, const char* path,
                                     sesnet_classifier** out) {
  if (ds == nullptr || path == nullptr || out == nullptr) {
    g_last_error = "sesnet_classifier_load: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    *out = new sesnet_classifier{mhhcnn::load_checkpoint(path, ds->dataset.schema())};
  });
}

sesnet_status sesnet_classifier_predict(const sesnet_classifier* clf, const sesnet_dataset* ds,
                                        char** out_json) {
  if (clf == nullptr || ds == nullptr || out_json == nullptr) {
    g_last_error = "sesnet_classifier_predict: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    if (clf->model.schema().hash() != ds->dataset.schema().hash()) {
      throw sesnet::ValidationError("classifier and dataset schemas differ");
    }
    const std::vector<double> p = clf->model.predict(clf->model.encoder().encode(ds->dataset));
    json j = json::object();
    for (std::size_t i = 0; i < p.size(); ++i) j[ds->dataset[i].building_id] = p[i];
    set_out(out_json, j);
  });
}

void sesnet_classifier_free(sesnet_classifier* clf) { delete clf; }

sesnet_status sesnet_cross_validate(const sesnet_dataset* ds, const char* options_json,
                                    char** report_json) {
  if (ds == nullptr) {
    g_last_error = "sesnet_cross_validate: null dataset";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const ClassifierOptions o = classifier_options(parse_options(options_json));
    const std::vector<int> labels =
        mhhcnn::binarize(label_counts(*ds, o.label_window), o.cutoff);
    const mhhcnn::CvReport report = mhhcnn::cross_validate(ds->dataset, labels, o.model, o.k);
    set_out(report_json, stamp(report.to_json(), o.to_json(), o.model.seed));
  });
}

sesnet_status sesnet_select_cutoff(const sesnet_dataset* ds, const char* options_json,
                                   char** report_json) {
  if (ds == nullptr) {
    g_last_error = "sesnet_select_cutoff: null dataset";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const ClassifierOptions o = classifier_options(parse_options(options_json));
    const mhhcnn::CutoffReport report =
        mhhcnn::select_cutoff(ds->dataset, label_counts(*ds, o.label_window), o.grid, o.model);
    set_out(report_json, stamp(report.to_json(), o.to_json(), o.model.seed));
  });
}

sesnet_status sesnet_explain(const sesnet_classifier* clf, const sesnet_dataset* ds,
                             const char* options_json, sesnet_attribution** out,
                             char** report_json) {
  if (clf == nullptr || ds == nullptr || out == nullptr) {
    g_last_error = "sesnet_explain: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const json j = parse_options(options_json);
    explain::ShapleyOptions so;
    so.n_perm = j.value("n_perm", so.n_perm);
    so.seed = j.value("seed", so.seed);
    const std::string mode = j.value("mode", std::string("auto"));
    if (mode == "auto") {
      so.mode = explain::ShapleyMode::kAuto;
    } else if (mode == "sampling") {
      so.mode = explain::ShapleyMode::kSampling;
    } else if (mode == "exact") {
      so.mode = explain::ShapleyMode::kExact;
    } else {
      throw sesnet::ValidationError("explain: mode must be auto, sampling or exact");
    }
    const int top_k = j.value("top_k", 20);

    std::vector<std::size_t> rows(ds->dataset.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const mhhcnn::EncodedRows encoded = clf->model.encoder().encode(ds->dataset);
    const std::vector<int> baseline = explain::baseline_row(ds->dataset, encoded, rows);
    auto attr = std::make_unique<sesnet_attribution>();
    attr->estimate = explain::estimate_shapley(clf->model, ds->dataset, baseline, so);
    for (const std::string& d : ds->dataset.districts()) {
      attr->rankings.push_back(explain::rank_features(attr->estimate, ds->dataset, d));
    }
    attr->table = explain::inverse_rank_scores(attr->rankings, top_k);

    json rankings = json::object();
    for (const auto& r : attr->rankings) rankings[r.district] = r.feature_ids;
    double worst = 0.0;
    for (std::size_t b = 0; b < attr->estimate.n_buildings(); ++b) {
      const double gap = std::abs(explain::building_composite(attr->estimate,
                                                              attr->estimate.building_ids[b]) -
                                  (attr->estimate.output[b] - attr->estimate.baseline_output[b]));
      worst = std::max(worst, gap);
    }
    json baseline_json = json::object();
    for (std::size_t f = 0; f < baseline.size(); ++f) {
      baseline_json[ds->dataset.schema()[f].id] = baseline[f];
    }
    json config = so.to_json();
    config["top_k"] = top_k;
    json report = {{"rankings", rankings},
                   {"baseline_levels", baseline_json},
                   {"exact", attr->estimate.exact},
                   {"max_efficiency_gap", worst}};
    set_out(report_json, stamp(report, config, so.seed));
    *out = attr.release();
  });
}

sesnet_status sesnet_attribution_write(const sesnet_attribution* attr, const char* dir) {
  if (attr == nullptr || dir == nullptr) {
    g_last_error = "sesnet_attribution_write: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const fs::path root(dir);
    sesnet::write_file(root / "shapley.csv", explain::shapley_csv_text(attr->estimate));
    for (const auto& r : attr->rankings) {
      sesnet::write_file(root / ("ranking_" + r.district + ".csv"), explain::ranking_csv_text(r));
    }
    sesnet::write_file(root / "composite_scores.csv", explain::composite_csv_text(attr->table));
  });
}

void sesnet_attribution_free(sesnet_attribution* attr) { delete attr; }

sesnet_status sesnet_forward_chain(const sesnet_dataset* ds, const char* shapley_csv_path,
                                   const char* options_json, const char* out_dir,
                                   char** report_json) {
  if (ds == nullptr || shapley_csv_path == nullptr) {
    g_last_error = "sesnet_forward_chain: null argument";
    return SESNET_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const json j = parse_options(options_json);
    forecast::ForecastConfig config;
    if (j.contains("forecast")) config.update_from_json(j.at("forecast"));
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    const std::vector<int> horizons = j.value("horizons", std::vector<int>{3, 7, 14});
    const int n_chains = j.value("chains", 3);
    for (int h : horizons) {
      forecast::ForecastConfig probe = config;
      probe.horizon = h;
      probe.validate();
    }
    std::map<std::string, double> composites;
    for (auto& [id, v] : explain::composites_from_csv(sesnet::read_lines(shapley_csv_path))) {
      composites[id] = v;
    }
    const schema::StudyWindow window = schema::resurgence_window();
    const forecast::ForecastData data =
        forecast::make_forecast_data(ds->dataset, ds->cases, window, composites);
    const std::vector<forecast::ChainSpec> chains = forecast::make_chains(window, n_chains);
    const forecast::ForecastReport report =
        forecast::forward_chain(chains, data, config, horizons);

    json config_json = {{"forecast", config.to_json()}, {"horizons", horizons},
                        {"chains", n_chains}};
    json full = stamp(report.to_json(), config_json, config.seed);
    if (out_dir != nullptr) {
      const fs::path root(out_dir);
      sesnet::write_file(root / "forecast_report.json", full.dump(2) + "\n");
      sesnet::write_file(root / "forecast_summary.csv", report.summary_csv());
    }
    set_out(report_json, full);
  });
}

}  // extern "C"
