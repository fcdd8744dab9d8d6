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

// sesnet command-line front end. Links only the C interface.

#include <sesnet/sesnet.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

struct CliError {
  int code;
  std::string message;
};

int exit_code(sesnet_status s) {
  switch (s) {
    case SESNET_ERR_VALIDATION:
    case SESNET_ERR_INVALID_ARGUMENT:
      return kExitValidation;
    case SESNET_ERR_NUMERICAL:
      return kExitNumerical;
    case SESNET_ERR_IO:
      return kExitIo;
    default:
      return kExitInternal;
  }
}

void check(sesnet_status s) {
  if (s != SESNET_OK) throw CliError{exit_code(s), sesnet_last_error()};
}

// Owns a string returned by the library.
class LibString {
 public:
  LibString() = default;
  ~LibString() { sesnet_string_free(p_); }
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;
  char** out() { return &p_; }
  json parse() const { return p_ ? json::parse(p_) : json(); }

 private:
  char* p_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Free(p_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T** out() { return &p_; }
  T* get() const { return p_; }

 private:
  T* p_ = nullptr;
};

using Dataset = Handle<sesnet_dataset, sesnet_dataset_free>;
using Classifier = Handle<sesnet_classifier, sesnet_classifier_free>;
using Attribution = Handle<sesnet_attribution, sesnet_attribution_free>;

std::vector<long> parse_list(const std::string& text, const char* flag) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CliError{kExitValidation, std::string(flag) + ": not an integer list: " + text};
    }
  }
  if (out.empty()) throw CliError{kExitValidation, std::string(flag) + ": empty list"};
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw CliError{kExitIo, "cannot write " + path.string()};
}

// Global options plus the resolved configuration file.
struct Run {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string data_dir;
  json file = json::object();

  json section(const char* name) const {
    return file.contains(name) ? file.at(name) : json::object();
  }

  void load() {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw CliError{kExitIo, "cannot read config " + config_path};
      try {
        file = json::parse(f);
      } catch (const json::exception& e) {
        throw CliError{kExitValidation, "config " + config_path + ": " + e.what()};
      }
      if (!file.is_object()) throw CliError{kExitValidation, "config must be a JSON object"};
    }
    if (out_dir.empty()) out_dir = file.value("out", std::string("out"));
    if (data_dir.empty()) data_dir = file.value("data", out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw CliError{kExitIo, "cannot create output directory " + out_dir};
  }

  fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }

  void load_dataset(Dataset& ds) const {
    const fs::path d(data_dir);
    check(sesnet_dataset_load((d / "schema.json").c_str(), (d / "features.csv").c_str(),
                              (d / "cases.csv").c_str(), ds.out()));
  }
};

// Classifier options: the file's "train" section, then the command's own
// section, then flags.
struct ClassifierFlags {
  std::optional<long> cutoff;
  std::optional<int> epochs;
  std::optional<double> lr;

  void add(CLI::App* app) {
    app->add_option("--cutoff", cutoff, "case-count cutoff for the high-risk label");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--lr", lr, "Adam learning rate");
  }

  json resolve(const Run& run, const char* command) const {
    json j = run.section("train");
    if (std::string(command) != "train") j.merge_patch(run.section(command));
    if (!j.contains("model")) j["model"] = json::object();
    if (run.seed) j["seed"] = *run.seed;
    if (cutoff) j["cutoff"] = *cutoff;
    if (epochs) j["model"]["epochs"] = *epochs;
    if (lr) j["model"]["lr"] = *lr;
    return j;
  }
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Left-aligned table cell.
std::string cell(const std::string& text, std::size_t width) {
  std::string out = text;
  if (out.size() < width) out.resize(width, ' ');
  return out + " ";
}

void cmd_synth(const Run& run, const std::string& districts, std::optional<double> noise,
               std::optional<int> planted_cutoff) {
  json options = run.section("synth");
  if (run.seed) options["seed"] = *run.seed;
  if (!districts.empty()) {
    std::vector<long> sizes = parse_list(districts, "--districts");
    options["district_sizes"] = sizes;
    if (!run.section("synth").contains("estates_per_district")) {
      options["estates_per_district"] = json::array();
    }
    if (!run.section("synth").contains("tpus_per_district")) {
      options["tpus_per_district"] = json::array();
    }
  }
  if (noise) options["noise_scale"] = *noise;
  if (planted_cutoff) options["planted_cutoff"] = *planted_cutoff;

  Dataset ds;
  LibString manifest;
  check(sesnet_synth(options.dump().c_str(), ds.out(), manifest.out()));
  check(sesnet_dataset_write(ds.get(), run.out_dir.c_str()));
  write_text(run.out("manifest.json"), manifest.parse().dump(2) + "\n");
  LibString summary;
  check(sesnet_dataset_summary(ds.get(), summary.out()));
  const json s = summary.parse();
  std::cout << "buildings  " << s["n_buildings"] << "\n";
  for (const auto& [d, n] : s["districts"].items()) std::cout << "district " << d << "  " << n << "\n";
  std::cout << "cases      " << s["total_cases"] << "\n";
  std::cout << "written to " << run.out_dir << "\n";
}

void cmd_train(const Run& run, const ClassifierFlags& flags) {
  Dataset ds;
  run.load_dataset(ds);
  const json options = flags.resolve(run, "train");
  Classifier clf;
  LibString report;
  check(sesnet_classifier_train(ds.get(), options.dump().c_str(), clf.out(), report.out()));
  check(sesnet_classifier_save(clf.get(), run.out("model.ckpt").c_str()));
  const json r = report.parse();
  write_text(run.out("train_report.json"), r.dump(2) + "\n");
  std::cout << "epochs       " << r["epochs"] << "\n"
            << "positives    " << r["n_positive"] << " / " << r["n_buildings"] << "\n"
            << "training AUC " << fixed(r["final_auc"].get<double>()) << "\n"
            << "checkpoint   " << run.out("model.ckpt").string() << "\n";
}

void cmd_cv(const Run& run, const ClassifierFlags& flags, std::optional<int> k) {
  Dataset ds;
  run.load_dataset(ds);
  json options = flags.resolve(run, "cv");
  if (k) options["k"] = *k;
  LibString report;
  check(sesnet_cross_validate(ds.get(), options.dump().c_str(), report.out()));
  const json r = report.parse();
  write_text(run.out("cv_report.json"), r.dump(2) + "\n");
  std::cout << "fold  size  AUC\n";
  for (const auto& f : r["folds"]) {
    std::cout << f["fold"].get<int>() + 1 << "     " << f["size"] << "    "
              << (f["auc"].is_null() ? std::string("n/a") : fixed(f["auc"].get<double>()))
              << "\n";
  }
  std::cout << "mean AUC   "
            << (r["mean_auc"].is_null() ? std::string("n/a") : fixed(r["mean_auc"].get<double>()))
            << "\npooled AUC " << fixed(r["pooled_auc"].get<double>()) << "\n";
  if (r.contains("warning")) std::cout << "warning: " << r["warning"].get<std::string>() << "\n";
}

void cmd_cutoff(const Run& run, const ClassifierFlags& flags, const std::string& grid) {
  Dataset ds;
  run.load_dataset(ds);
  json options = flags.resolve(run, "cutoff");
  if (!grid.empty()) options["grid"] = parse_list(grid, "--grid");
  LibString report;
  check(sesnet_select_cutoff(ds.get(), options.dump().c_str(), report.out()));
  const json r = report.parse();
  write_text(run.out("cutoff_report.json"), r.dump(2) + "\n");
  std::cout << cell("cutoff", 7) << "training AUC\n";
  for (const auto& c : r["candidates"]) {
    std::cout << cell(c["cutoff"].dump(), 7)
              << (c["training_auc"].is_null() ? c.value("note", std::string("skipped"))
                                              : fixed(c["training_auc"].get<double>()))
              << "\n";
  }
  std::cout << "selected " << r["best_cutoff"] << "\n";
}

void cmd_explain(const Run& run, const std::string& model_path, std::optional<int> n_perm) {
  Dataset ds;
  run.load_dataset(ds);
  json options = run.section("explain");
  if (run.seed) options["seed"] = *run.seed;
  if (n_perm) options["n_perm"] = *n_perm;
  Classifier clf;
  const std::string path = model_path.empty() ? run.out("model.ckpt").string() : model_path;
  check(sesnet_classifier_load(ds.get(), path.c_str(), clf.out()));
  Attribution attr;
  LibString report;
  check(sesnet_explain(clf.get(), ds.get(), options.dump().c_str(), attr.out(), report.out()));
  check(sesnet_attribution_write(attr.get(), run.out_dir.c_str()));
  const json r = report.parse();
  write_text(run.out("explain_report.json"), r.dump(2) + "\n");
  for (const auto& [d, ids] : r["rankings"].items()) {
    std::cout << "district " << d << " top features:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ids.size()); ++i) {
      std::cout << " " << ids[i].get<std::string>();
    }
    std::cout << "\n";
  }
  std::cout << "max efficiency gap " << r["max_efficiency_gap"] << "\n";
}

void cmd_chain(const Run& run, const std::string& shapley, const std::string& horizons,
               std::optional<int> max_epochs) {
  Dataset ds;
  run.load_dataset(ds);
  json options = run.section("chain");
  if (run.seed) options["seed"] = *run.seed;
  if (!horizons.empty()) options["horizons"] = parse_list(horizons, "--horizons");
  if (max_epochs) options["forecast"]["max_epochs"] = *max_epochs;
  const std::string path = shapley.empty() ? run.out("shapley.csv").string() : shapley;
  LibString report;
  check(sesnet_forward_chain(ds.get(), path.c_str(), options.dump().c_str(),
                             run.out_dir.c_str(), report.out()));
  const json r = report.parse();
  std::cout << cell("chain", 6) << cell("horizon", 8) << cell("variant", 10)
            << cell("peak", 9) << "epoch\n";
  for (const auto& run_j : r["runs"]) {
    std::cout << cell(run_j["chain"].dump(), 6) << cell(run_j["horizon"].dump(), 8)
              << cell(run_j["variant"].get<std::string>(), 10)
              << cell(fixed(run_j["peak"].get<double>()), 9) << run_j["epoch_at_peak"] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sesnet: building-level COVID-19 risk classification, attribution and forecasting"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Run run;
  app.add_option("--config", run.config_path, "JSON configuration file");
  app.add_option("--seed", run.seed, "random seed for the command");
  app.add_option("--out", run.out_dir, "output directory");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string districts;
  std::optional<double> noise;
  std::optional<int> planted_cutoff;
  synth->add_option("--districts", districts, "comma-separated buildings per district");
  synth->add_option("--noise", noise, "noise scale of the planted scores");
  synth->add_option("--planted-cutoff", planted_cutoff, "plant a sharp risk threshold");

  ClassifierFlags train_flags, cv_flags, cutoff_flags;
  std::optional<int> k;
  std::string grid, model_path, shapley, horizons;
  std::optional<int> n_perm, max_epochs;

  CLI::App* train = app.add_subcommand("train", "train the classifier");
  CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validation");
  CLI::App* cutoff = app.add_subcommand("cutoff", "select the label cutoff");
  CLI::App* explain = app.add_subcommand("explain", "Shapley attribution and rankings");
  CLI::App* chain = app.add_subcommand("chain", "forward-chaining forecast comparison");
  for (CLI::App* sub : {train, cv, cutoff, explain, chain}) {
    sub->add_option("--data", run.data_dir, "directory with schema.json, features.csv, cases.csv");
  }
  train_flags.add(train);
  cv_flags.add(cv);
  cv->add_option("--k", k, "number of folds");
  cutoff_flags.add(cutoff);
  cutoff->add_option("--grid", grid, "comma-separated candidate cutoffs");
  explain->add_option("--model", model_path, "checkpoint (default <out>/model.ckpt)");
  explain->add_option("--n-perm", n_perm, "permutations per building");
  chain->add_option("--shapley", shapley, "shapley.csv (default <out>/shapley.csv)");
  chain->add_option("--horizons", horizons, "comma-separated horizons");
  chain->add_option("--max-epochs", max_epochs, "forecaster epoch limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    run.load();
    if (*synth) cmd_synth(run, districts, noise, planted_cutoff);
    if (*train) cmd_train(run, train_flags);
    if (*cv) cmd_cv(run, cv_flags, k);
    if (*cutoff) cmd_cutoff(run, cutoff_flags, grid);
    if (*explain) cmd_explain(run, model_path, n_perm);
    if (*chain) cmd_chain(run, shapley, horizons, max_epochs);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
