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

#include "sesnet/synthgen/synthgen.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"

namespace sesnet::synthgen {
namespace {

using schema::FeatureKind;
using schema::SesLevel;

struct FeatureTemplate {
  const char* id;
  const char* name;
  FeatureKind kind;
  int n_levels;  // categorical
  double mean;
  double sd;
  double min_value;
  double step;  // rounding granularity
};

constexpr FeatureKind kCat = FeatureKind::kCategorical;
constexpr FeatureKind kCont = FeatureKind::kContinuous;

// Built environment first: the first five are the resurgence carriers.
const FeatureTemplate kBuildingTemplates[] = {
    {"n_flats", "Number of flat", kCont, 0, 560, 250, 40, 1},
    {"max_flats_per_floor", "Maximum number of flat per floor", kCont, 0, 20, 7, 4, 1},
    {"n_floors", "Number of floors", kCont, 0, 26, 10, 3, 1},
    {"n_corridors", "Number of corridors of the building", kCont, 0, 4, 2, 1, 1},
    {"n_lifts", "Number of lifts", kCont, 0, 4, 1.5, 1, 1},
    {"orientation", "Cardinal orientation", kCat, 8, 0, 0, 0, 0},
    {"year_completed", "Year of completion", kCont, 0, 1990, 11, 1950, 1},
    {"reentrant_bay", "Indication of re-entrant bay", kCat, 2, 0, 0, 0, 0},
};

// Sociodemographics; the first three are early-era carriers.
const FeatureTemplate kEstateTemplates[] = {
    {"nonworking_pop", "Non-working population in building group", kCont, 0, 0.45, 0.08, 0.05, 1e-4},
    {"weekly_hours_upper_q", "Weekly usual hours of work: upper quartile", kCont, 0, 54, 4, 30, 0.1},
    {"income_lower_q", "Monthly domestic household income: lower quartile", kCont, 0, 9000, 2500, 1000, 1},
    {"avg_household_size", "Average domestic household size", kCont, 0, 2.7, 0.4, 1, 0.01},
    {"median_rent", "Monthly domestic household rent (median)", kCont, 0, 1700, 550, 300, 0.01},
    {"median_age_heads", "Median age of heads of domestic households", kCont, 0, 60, 5, 30, 0.1},
};

// The first two are early-era carriers.
const FeatureTemplate kTpuTemplates[] = {
    {"craft_workers_pct", "Occupation: craft workers and machine operators", kCont, 0, 0.15, 0.04, 0.01, 1e-4},
    {"pop_under15_pct", "Population aged under 15", kCont, 0, 0.11, 0.03, 0.01, 1e-4},
    {"employee_pct", "Economic activity status: employee", kCont, 0, 0.43, 0.05, 0.1, 1e-4},
    {"work_same_district_pct", "Place of work: same district of residence", kCont, 0, 0.27, 0.05, 0.02, 1e-4},
    {"public_rental_pct", "Domestic households in public rental housing", kCont, 0, 0.6, 0.1, 0.1, 1e-4},
    {"mtr_commute_pct", "Main mode of transport to work: MTR", kCont, 0, 0.4, 0.12, 0.02, 1e-4},
};

struct GeneratedFeature {
  schema::FeatureSpec spec;
  FeatureTemplate tmpl;
};

std::vector<GeneratedFeature> level_features(SesLevel level, int count) {
  std::span<const FeatureTemplate> templates;
  std::string prefix;
  switch (level) {
    case SesLevel::kBuilding: templates = kBuildingTemplates; prefix = "bld"; break;
    case SesLevel::kEstate: templates = kEstateTemplates; prefix = "est"; break;
    case SesLevel::kTpu: templates = kTpuTemplates; prefix = "tpu"; break;
  }
  std::vector<GeneratedFeature> out;
  for (int i = 0; i < count; ++i) {
    FeatureTemplate t;
    std::string id, name;
    if (static_cast<std::size_t>(i) < templates.size()) {
      t = templates[static_cast<std::size_t>(i)];
      id = t.id;
      name = t.name;
    } else {
      id = prefix + "_extra_" + std::to_string(i + 1);
      name = "Additional " + std::string(schema::level_name(level)) + " statistic " +
             std::to_string(i + 1);
      t = {nullptr, nullptr, kCont, 0, 0.0, 1.0, -1e9, 1e-4};
    }
    schema::FeatureSpec spec;
    spec.id = id;
    spec.name = name;
    spec.level = level;
    spec.kind = t.kind;
    if (t.kind == kCat) spec.n_levels = t.n_levels;
    out.push_back({spec, t});
  }
  return out;
}

std::vector<GeneratedFeature> all_features(const SynthConfig& config) {
  if (config.building_features < 1 || config.estate_features < 1 ||
      config.tpu_features < 1) {
    throw ValidationError("synth: every level needs at least one feature");
  }
  std::vector<GeneratedFeature> out;
  for (auto [level, count] :
       {std::pair{SesLevel::kBuilding, config.building_features},
        std::pair{SesLevel::kEstate, config.estate_features},
        std::pair{SesLevel::kTpu, config.tpu_features}}) {
    auto part = level_features(level, count);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::string district_name(std::size_t d) {
  if (d < 26) return std::string(1, static_cast<char>('A' + d));
  return "D" + std::to_string(d + 1);
}

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const Date kEpidemicPeak = make_date(2022, 3, 5);
constexpr double kEpidemicWidthDays = 16.0;
constexpr double kEpidemicFloor = 0.03;

}  // namespace

PlantedTruth default_truth(const SynthConfig& config) {
  PlantedTruth truth;
  truth.noise_scale = config.noise_scale;
  const std::vector<GeneratedFeature> features = all_features(config);
  const double effects[] = {1.0, 0.9, -0.8, 0.7, 0.6};
  std::size_t next_res = 0, next_early = 0;
  for (const GeneratedFeature& f : features) {
    if (f.spec.kind != kCont) continue;
    if (f.spec.level == SesLevel::kBuilding) {
      if (next_res < 5) truth.resurgence_effects[f.spec.id] = std::abs(effects[next_res++]);
    } else if (next_early < 5) {
      // Alternate estate and TPU carriers the way the templates are ordered.
      truth.early_effects[f.spec.id] = effects[next_early++];
    }
  }
  if (next_res < 5 || next_early < 5) {
    throw ValidationError(
        "synth: default truth needs five continuous building features and five "
        "continuous estate/TPU features");
  }
  return truth;
}

double Manifest::daily_intensity(std::size_t index, std::size_t day) const {
  const BuildingTruth& b = buildings.at(index);
  return b.base_intensity * epidemic_curve.at(day) +
         b.surge_intensity * surge_curve.at(day);
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["noise_scale"] = truth.noise_scale;
  j["planted_cutoff"] = truth.planted_cutoff;
  j["base_gain"] = truth.base_gain;
  j["surge_gain"] = truth.surge_gain;
  j["surge_level"] = truth.surge_level;
  j["surge_center"] = format_date(truth.surge_center);
  j["surge_scale_days"] = truth.surge_scale_days;
  j["surge_period_days"] = truth.surge_period_days;
  j["early_effects"] = truth.early_effects;
  j["resurgence_effects"] = truth.resurgence_effects;
  auto window = [](const schema::StudyWindow& w) {
    return nlohmann::json{{"name", w.name},
                          {"start", format_date(w.start)},
                          {"end", format_date(w.end)}};
  };
  j["early_window"] = window(truth.early_window);
  j["resurgence_window"] = window(truth.resurgence_window);
  j["build_window"] = window(truth.build_window);
  nlohmann::json stdz = nlohmann::json::object();
  for (const auto& [id, ms] : standardization) {
    stdz[id] = {{"mean", ms.first}, {"sd", ms.second}};
  }
  j["standardization"] = stdz;
  j["intensity_model"] =
      "daily = base_intensity * epidemic_curve[day] + surge_intensity * "
      "surge_curve[day], day 0 = resurgence_window.start";
  j["epidemic_curve"] = epidemic_curve;
  j["surge_curve"] = surge_curve;
  nlohmann::json rows = nlohmann::json::array();
  for (const BuildingTruth& b : buildings) {
    rows.push_back({{"building_id", b.building_id},
                    {"early_noise", b.early_noise},
                    {"early_score", b.early_score},
                    {"early_risk", b.early_risk},
                    {"resurgence_noise", b.resurgence_noise},
                    {"resurgence_score", b.resurgence_score},
                    {"resurgence_risk", b.resurgence_risk},
                    {"base_intensity", b.base_intensity},
                    {"surge_intensity", b.surge_intensity}});
  }
  j["buildings"] = rows;
  return j;
}

SynthOutput generate(const SynthConfig& config, const PlantedTruth& truth) {
  const std::size_t n_districts = config.district_sizes.size();
  if (n_districts == 0) throw ValidationError("synth: no districts");
  if (config.noise_scale < 0 || truth.noise_scale < 0) {
    throw ValidationError("synth: noise_scale must be >= 0");
  }
  if (config.median_resurgence_counts.empty()) {
    throw ValidationError("synth: median_resurgence_counts is empty");
  }
  if (!(truth.surge_scale_days > 0) || truth.surge_period_days < 0 || truth.surge_level < 0) {
    throw ValidationError(
        "synth: surge_scale_days must be positive, surge_period_days and surge_level >= 0");
  }
  std::vector<int> estates(n_districts), tpus(n_districts);
  for (std::size_t d = 0; d < n_districts; ++d) {
    const int n = config.district_sizes[d];
    if (n <= 0) throw ValidationError("synth: district sizes must be positive");
    estates[d] = d < config.estates_per_district.size()
                     ? config.estates_per_district[d]
                     : std::max(1, static_cast<int>(std::lround(n / 8.0)));
    tpus[d] = d < config.tpus_per_district.size()
                  ? config.tpus_per_district[d]
                  : std::max(1, static_cast<int>(std::lround(estates[d] / 4.0)));
    estates[d] = std::clamp(estates[d], 1, n);
    tpus[d] = std::clamp(tpus[d], 1, estates[d]);
  }

  const std::vector<GeneratedFeature> features = all_features(config);
  std::vector<schema::FeatureSpec> specs;
  for (const auto& f : features) specs.push_back(f.spec);
  schema::FeatureSchema schema(specs);

  // Effects by schema column.
  std::vector<double> early_effect(features.size(), 0.0);
  std::vector<double> res_effect(features.size(), 0.0);
  auto place = [&](const std::map<std::string, double>& effects,
                   std::vector<double>& out, const char* era) {
    int nonzero = 0;
    for (const auto& [id, effect] : effects) {
      auto idx = schema.index_of(id);
      if (!idx) {
        throw ValidationError(std::string("synth: ") + era +
                              " effect on unknown feature '" + id + "'");
      }
      if (features[*idx].spec.kind != kCont) {
        throw ValidationError(std::string("synth: ") + era +
                              " effect on categorical feature '" + id + "'");
      }
      out[*idx] = effect;
      if (effect != 0.0) ++nonzero;
    }
    if (nonzero < 1) {
      throw ValidationError(std::string("synth: ") + era +
                            " era needs at least one effect-bearing feature");
    }
  };
  place(truth.early_effects, early_effect, "early");
  place(truth.resurgence_effects, res_effect, "resurgence");

  Rng feature_rng(derive_seed(config.seed, 1));
  Rng noise_rng(derive_seed(config.seed, 2));
  std::normal_distribution<double> normal(0.0, 1.0);

  auto draw = [&](const GeneratedFeature& f) -> schema::FeatureValue {
    if (f.spec.kind == kCat) {
      std::uniform_int_distribution<int> cat(0, f.spec.n_levels - 1);
      return static_cast<double>(cat(feature_rng));
    }
    double v = f.tmpl.mean + f.tmpl.sd * normal(feature_rng);
    v = std::max(v, f.tmpl.min_value);
    return std::round(v / f.tmpl.step) * f.tmpl.step;
  };

  std::vector<schema::BuildingRecord> records;
  std::vector<std::size_t> district_of;
  for (std::size_t d = 0; d < n_districts; ++d) {
    const std::string dname = district_name(d);
    const int n = config.district_sizes[d];
    std::vector<std::vector<schema::FeatureValue>> tpu_values(tpus[d]);
    std::vector<std::vector<schema::FeatureValue>> estate_values(estates[d]);
    for (auto& tv : tpu_values) {
      for (const auto& f : features) {
        if (f.spec.level == SesLevel::kTpu) tv.push_back(draw(f));
      }
    }
    for (auto& ev : estate_values) {
      for (const auto& f : features) {
        if (f.spec.level == SesLevel::kEstate) ev.push_back(draw(f));
      }
    }
    const bool blank_orientation = config.missing_orientation_last_district &&
                                   n_districts >= 2 && d + 1 == n_districts;
    for (int i = 0; i < n; ++i) {
      const int e = static_cast<int>(static_cast<long>(i) * estates[d] / n);
      const int t = static_cast<int>(static_cast<long>(e) * tpus[d] / estates[d]);
      schema::BuildingRecord rec;
      rec.building_id = dname + "-" + padded(i + 1, 3);
      rec.estate_id = dname + "-E" + padded(e + 1, 2);
      rec.tpu_id = dname + "-T" + padded(t + 1, 2);
      rec.district_id = dname;
      std::size_t ei = 0, ti = 0;
      for (const auto& f : features) {
        switch (f.spec.level) {
          case SesLevel::kBuilding:
            rec.values.push_back(draw(f));
            if (blank_orientation && f.spec.id == "orientation") rec.values.back().reset();
            break;
          case SesLevel::kEstate: rec.values.push_back(estate_values[e][ei++]); break;
          case SesLevel::kTpu: rec.values.push_back(tpu_values[t][ti++]); break;
        }
      }
      records.push_back(std::move(rec));
      district_of.push_back(d);
    }
  }

  Manifest manifest;
  manifest.truth = truth;
  manifest.seed = config.seed;
  for (const auto& f : features) {
    if (f.spec.kind == kCont) manifest.standardization[f.spec.id] = {f.tmpl.mean, f.tmpl.sd};
  }

  const std::size_t n_buildings = records.size();
  const double noise = truth.noise_scale;
  for (std::size_t b = 0; b < n_buildings; ++b) {
    BuildingTruth bt;
    bt.building_id = records[b].building_id;
    bt.early_noise = normal(noise_rng);
    bt.resurgence_noise = normal(noise_rng);
    double early = 0.0, res = 0.0;
    for (std::size_t c = 0; c < features.size(); ++c) {
      if (features[c].spec.kind != kCont || !records[b].values[c]) continue;
      const double z = (*records[b].values[c] - features[c].tmpl.mean) / features[c].tmpl.sd;
      early += early_effect[c] * z;
      res += res_effect[c] * z;
    }
    bt.early_score = early + noise * bt.early_noise;
    bt.resurgence_score = res + noise * bt.resurgence_noise;
    bt.early_risk = logistic(bt.early_score);
    bt.resurgence_risk = logistic(bt.resurgence_score);
    manifest.buildings.push_back(bt);
  }

  // Resurgence curves; the epidemic curve sums to 1 over the build window.
  const schema::StudyWindow& res_window = truth.resurgence_window;
  const std::size_t n_days = static_cast<std::size_t>(res_window.length_days());
  manifest.epidemic_curve.resize(n_days);
  manifest.surge_curve.resize(n_days);
  double build_mass = 0.0;
  for (std::size_t t = 0; t < n_days; ++t) {
    const Date day = add_days(res_window.start, static_cast<long>(t));
    const double u = static_cast<double>(days_between(kEpidemicPeak, day)) / kEpidemicWidthDays;
    manifest.epidemic_curve[t] = std::exp(-0.5 * u * u) + kEpidemicFloor;
    const double offset = static_cast<double>(days_between(truth.surge_center, day));
    if (truth.surge_period_days > 0) {
      const double period = truth.surge_period_days;
      const double phase = offset - period * std::round(offset / period);
      const double v = phase / truth.surge_scale_days;
      manifest.surge_curve[t] = std::exp(-0.5 * v * v);
    } else {
      manifest.surge_curve[t] = logistic(offset / truth.surge_scale_days);
    }
    if (truth.build_window.contains(day)) build_mass += manifest.epidemic_curve[t];
  }
  for (double& g : manifest.epidemic_curve) g /= build_mass;

  // Score standardisation for the intensity link: centred on the district
  // median, scaled by the overall sd.
  std::vector<double> scores;
  for (const auto& bt : manifest.buildings) scores.push_back(bt.resurgence_score);
  const double mean_score = std::accumulate(scores.begin(), scores.end(), 0.0) /
                            static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean_score) * (s - mean_score);
  const double sd_score = std::sqrt(var / static_cast<double>(scores.size()));
  const double median_risk = median_of([&] {
    std::vector<double> r;
    for (const auto& bt : manifest.buildings) r.push_back(bt.resurgence_risk);
    return r;
  }());
  Rng class_rng(derive_seed(config.seed, 3));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t d = 0; d < n_districts; ++d) {
    std::vector<double> district_scores;
    for (std::size_t b = 0; b < n_buildings; ++b) {
      if (district_of[b] == d) district_scores.push_back(scores[b]);
    }
    const double centre = median_of(district_scores);
    const double target = config.median_resurgence_counts[d % config.median_resurgence_counts.size()];
    for (std::size_t b = 0; b < n_buildings; ++b) {
      if (district_of[b] != d) continue;
      BuildingTruth& bt = manifest.buildings[b];
      const double z = sd_score > 0 ? (scores[b] - centre) / sd_score : 0.0;
      bt.surge_intensity = truth.surge_level * std::exp(truth.surge_gain * z);
      if (truth.planted_cutoff > 0) {
        const double u = noise > 0 ? unit(class_rng) : 0.5;
        const double c = truth.planted_cutoff;
        bt.base_intensity = bt.resurgence_risk >= median_risk ? c * (1.15 + u) : c * (0.4 + 0.45 * u);
      } else {
        bt.base_intensity = target * std::exp(truth.base_gain * z);
      }
    }
  }

  // Case series covering both eras.
  const Date series_start = std::min(truth.early_window.start, res_window.start);
  const Date series_end = std::max(truth.early_window.end, res_window.end);
  const std::size_t series_len = static_cast<std::size_t>(days_between(series_start, series_end) + 1);
  const long early_offset = days_between(series_start, truth.early_window.start);
  const long early_len = truth.early_window.length_days();
  const long res_offset = days_between(series_start, res_window.start);
  std::vector<schema::CaseSeries> cases;
  for (std::size_t b = 0; b < n_buildings; ++b) {
    const BuildingTruth& bt = manifest.buildings[b];
    Rng count_rng(derive_seed(config.seed, 1000 + b));
    schema::CaseSeries series{records[b].building_id, series_start,
                              std::vector<int>(series_len, 0)};
    int early_total;
    if (noise > 0) {
      early_total = unit(count_rng) < bt.early_risk
                        ? 1 + std::poisson_distribution<int>(1.5 * bt.early_risk)(count_rng)
                        : 0;
    } else {
      early_total = static_cast<int>(std::floor(4.0 * bt.early_risk));
    }
    std::uniform_int_distribution<long> early_day(0, early_len - 1);
    for (int k = 0; k < early_total; ++k) {
      series.counts[static_cast<std::size_t>(early_offset + early_day(count_rng))] += 1;
    }
    for (std::size_t t = 0; t < n_days; ++t) {
      const double lambda = manifest.daily_intensity(b, t);
      int count;
      if (noise > 0) {
        count = lambda > 0 ? std::poisson_distribution<int>(lambda)(count_rng) : 0;
      } else {
        count = static_cast<int>(std::lround(lambda));
      }
      series.counts[static_cast<std::size_t>(res_offset) + t] += count;
    }
    cases.push_back(std::move(series));
  }

  return {schema::Dataset(std::move(schema), std::move(records)), std::move(cases),
          std::move(manifest)};
}

SynthOptions synth_options_from_json(const nlohmann::json& j) {
  SynthOptions out;
  SynthConfig& c = out.config;
  try {
    c.district_sizes = j.value("district_sizes", c.district_sizes);
    c.estates_per_district = j.value("estates_per_district", c.estates_per_district);
    c.tpus_per_district = j.value("tpus_per_district", c.tpus_per_district);
    c.building_features = j.value("building_features", c.building_features);
    c.estate_features = j.value("estate_features", c.estate_features);
    c.tpu_features = j.value("tpu_features", c.tpu_features);
    c.noise_scale = j.value("noise_scale", c.noise_scale);
    c.seed = j.value("seed", c.seed);
    c.median_resurgence_counts = j.value("median_resurgence_counts", c.median_resurgence_counts);
    c.missing_orientation_last_district =
        j.value("missing_orientation_last_district", c.missing_orientation_last_district);
    out.truth = default_truth(c);
    out.truth.planted_cutoff = j.value("planted_cutoff", out.truth.planted_cutoff);
    out.truth.base_gain = j.value("base_gain", out.truth.base_gain);
    out.truth.surge_gain = j.value("surge_gain", out.truth.surge_gain);
    out.truth.surge_level = j.value("surge_level", out.truth.surge_level);
    if (j.contains("surge_center")) {
      out.truth.surge_center = parse_date(j.at("surge_center").get<std::string>());
    }
    out.truth.surge_scale_days = j.value("surge_scale_days", out.truth.surge_scale_days);
    out.truth.surge_period_days = j.value("surge_period_days", out.truth.surge_period_days);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth options: ") + e.what());
  }
  return out;
}

nlohmann::json synth_config_json(const SynthConfig& c) {
  return {{"district_sizes", c.district_sizes},
          {"estates_per_district", c.estates_per_district},
          {"tpus_per_district", c.tpus_per_district},
          {"building_features", c.building_features},
          {"estate_features", c.estate_features},
          {"tpu_features", c.tpu_features},
          {"noise_scale", c.noise_scale},
          {"seed", c.seed},
          {"median_resurgence_counts", c.median_resurgence_counts},
          {"missing_orientation_last_district", c.missing_orientation_last_district}};
}

}  // namespace sesnet::synthgen
