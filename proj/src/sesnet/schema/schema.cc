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

#include "sesnet/schema/schema.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sesnet/common/errors.h"
#include "sesnet/common/text.h"

namespace sesnet::schema {

const char* level_name(SesLevel level) {
  switch (level) {
    case SesLevel::kBuilding: return "building";
    case SesLevel::kEstate: return "estate";
    case SesLevel::kTpu: return "tpu";
  }
  return "unknown";
}

SesLevel parse_level(std::string_view text) {
  if (text == "building") return SesLevel::kBuilding;
  if (text == "estate") return SesLevel::kEstate;
  if (text == "tpu") return SesLevel::kTpu;
  throw ValidationError("unknown level '" + std::string(text) +
                        "' (expected building, estate or tpu)");
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features)
    : features_(std::move(features)) {
  std::set<std::string> seen;
  for (const FeatureSpec& f : features_) {
    if (f.id.empty()) throw ValidationError("feature with empty id");
    if (f.id.find(',') != std::string::npos) {
      throw ValidationError("feature id '" + f.id + "' contains a comma");
    }
    if (!seen.insert(f.id).second) {
      throw ValidationError("duplicate feature id '" + f.id + "'");
    }
    if (f.kind == FeatureKind::kCategorical && f.n_levels < 2) {
      throw ValidationError("categorical feature '" + f.id +
                            "' needs at least 2 levels");
    }
    if (f.kind == FeatureKind::kContinuous && f.bins < 2) {
      throw ValidationError("continuous feature '" + f.id +
                            "' needs at least 2 bins");
    }
  }
  for (SesLevel level : kAllLevels) {
    if (indices_at(level).empty()) {
      throw ValidationError(std::string("schema has no ") + level_name(level) +
                            "-level feature");
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> FeatureSchema::indices_at(SesLevel level) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].level == level) out.push_back(i);
  }
  return out;
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const FeatureSpec& f : features_) {
    nlohmann::json kind;
    if (f.kind == FeatureKind::kCategorical) {
      kind["categorical"] = f.n_levels;
    } else {
      kind["continuous"] = f.bins;
    }
    arr.push_back({{"id", f.id},
                   {"name", f.name},
                   {"level", level_name(f.level)},
                   {"kind", kind}});
  }
  return arr;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("schema JSON must be an array");
  std::vector<FeatureSpec> features;
  for (const auto& item : j) {
    try {
      FeatureSpec f;
      f.id = item.at("id").get<std::string>();
      f.name = item.value("name", f.id);
      f.level = parse_level(item.at("level").get<std::string>());
      const auto& kind = item.at("kind");
      if (kind.contains("categorical")) {
        f.kind = FeatureKind::kCategorical;
        f.n_levels = kind.at("categorical").get<int>();
      } else if (kind.contains("continuous")) {
        f.kind = FeatureKind::kContinuous;
        f.bins = kind.at("continuous").get<int>();
      } else {
        throw ValidationError("feature kind must be categorical or continuous");
      }
      features.push_back(std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed schema entry: ") + e.what());
    }
  }
  return FeatureSchema(std::move(features));
}

std::string FeatureSchema::hash() const { return fnv1a_hex(to_json().dump()); }

namespace {

void check_level_consistency(const FeatureSchema& schema,
                             const std::vector<BuildingRecord>& records,
                             SesLevel level) {
  const std::vector<std::size_t> cols = schema.indices_at(level);
  // group id -> first record carrying it
  std::unordered_map<std::string, std::size_t> first;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const std::string& group = level == SesLevel::kEstate ? records[r].estate_id
                                                          : records[r].tpu_id;
    auto [it, inserted] = first.emplace(group, r);
    if (inserted) continue;
    const BuildingRecord& ref = records[it->second];
    for (std::size_t c : cols) {
      if (records[r].values[c] != ref.values[c]) {
        throw ValidationError(
            "building '" + records[r].building_id + "' disagrees with building '" +
            ref.building_id + "' on " + level_name(level) + "-level feature '" +
            schema[c].id + "' (" + level_name(level) + " '" + group + "')");
      }
    }
  }
}

}  // namespace

Dataset::Dataset(FeatureSchema schema, std::vector<BuildingRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const BuildingRecord& rec = records_[r];
    if (rec.building_id.empty() || rec.estate_id.empty() || rec.tpu_id.empty() ||
        rec.district_id.empty()) {
      throw ValidationError("record " + std::to_string(r) + " has an empty identifier");
    }
    if (!by_id_.emplace(rec.building_id, r).second) {
      throw ValidationError("duplicate building id '" + rec.building_id + "'");
    }
    if (rec.values.size() != schema_.size()) {
      throw ValidationError("building '" + rec.building_id + "' has " +
                            std::to_string(rec.values.size()) + " values, schema has " +
                            std::to_string(schema_.size()) + " features");
    }
    for (std::size_t c = 0; c < schema_.size(); ++c) {
      const FeatureSpec& f = schema_[c];
      if (!rec.values[c]) continue;
      const double v = *rec.values[c];
      if (!std::isfinite(v)) {
        throw ValidationError("building '" + rec.building_id +
                              "': non-finite value for feature '" + f.id + "'");
      }
      if (f.kind == FeatureKind::kCategorical &&
          (v != std::floor(v) || v < 0 || v >= f.n_levels)) {
        throw ValidationError("building '" + rec.building_id + "': category " +
                              format_double(v) + " out of range for feature '" +
                              f.id + "' with " + std::to_string(f.n_levels) +
                              " levels");
      }
    }
  }
  check_level_consistency(schema_, records_, SesLevel::kEstate);
  check_level_consistency(schema_, records_, SesLevel::kTpu);
}

std::optional<std::size_t> Dataset::find(std::string_view building_id) const {
  auto it = by_id_.find(std::string(building_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Dataset::districts() const {
  std::set<std::string> ids;
  for (const auto& r : records_) ids.insert(r.district_id);
  return {ids.begin(), ids.end()};
}

std::vector<std::size_t> Dataset::indices_in_district(std::string_view district) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].district_id == district) out.push_back(i);
  }
  return out;
}

StudyWindow::StudyWindow(std::string name, Date start, Date end)
    : name(std::move(name)), start(start), end(end) {
  if (end < start) {
    throw ValidationError("study window '" + this->name + "' ends (" +
                          format_date(end) + ") before it starts (" +
                          format_date(start) + ")");
  }
}

StudyWindow early_waves_window() {
  return {"waves1-4", make_date(2020, 1, 23), make_date(2021, 5, 21)};
}

StudyWindow resurgence_window() {
  return {"wave5", make_date(2021, 12, 24), make_date(2022, 7, 23)};
}

StudyWindow resurgence_build_window() {
  return {"wave5-build", make_date(2021, 12, 24), make_date(2022, 5, 21)};
}

int CaseSeries::count_on(Date d) const {
  const long offset = days_between(start, d);
  if (offset < 0 || offset >= static_cast<long>(counts.size())) return 0;
  return counts[static_cast<std::size_t>(offset)];
}

long accumulate_cases(const CaseSeries& series, const StudyWindow& window) {
  if (series.counts.empty()) return 0;
  const Date first = std::max(series.start, window.start);
  const Date last = std::min(series.end(), window.end);
  long total = 0;
  for (Date d = first; d <= last; d = add_days(d, 1)) total += series.count_on(d);
  return total;
}

std::vector<long> accumulate_per_building(const Dataset& dataset,
                                          std::span<const CaseSeries> series,
                                          const StudyWindow& window) {
  std::vector<long> totals(dataset.size(), 0);
  for (const CaseSeries& s : series) {
    if (auto idx = dataset.find(s.building_id)) {
      totals[*idx] += accumulate_cases(s, window);
    }
  }
  return totals;
}

int BinEdges::assign(double value) const {
  // Edges are sorted; count those <= value.
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) -
                          edges.begin());
}

BinEdges fit_quantile_bins(std::span<const double> values, int bins) {
  if (bins < 2) throw ValidationError("discretize: bins must be >= 2");
  if (values.empty()) throw ValidationError("discretize: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  BinEdges out;
  for (int j = 1; j < bins; ++j) {
    // Rank of the first element that belongs to bin j: ceil(j * n / bins).
    const std::size_t rank =
        (static_cast<std::size_t>(j) * n + static_cast<std::size_t>(bins) - 1) /
        static_cast<std::size_t>(bins);
    if (rank >= n) continue;
    const double edge = sorted[rank];
    if (edge > sorted.front()) out.edges.push_back(edge);
  }
  return out;
}

std::vector<int> discretize(std::span<const double> values, int bins) {
  const BinEdges edges = fit_quantile_bins(values, bins);
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(edges.assign(v));
  return out;
}

}  // namespace sesnet::schema
