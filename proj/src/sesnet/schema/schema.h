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

#ifndef SESNET_SCHEMA_SCHEMA_H_
#define SESNET_SCHEMA_SCHEMA_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/common/dates.h"

namespace sesnet::schema {

// Socioecological level at which a statistic is reported.
enum class SesLevel { kBuilding, kEstate, kTpu };

inline constexpr std::array<SesLevel, 3> kAllLevels = {
    SesLevel::kBuilding, SesLevel::kEstate, SesLevel::kTpu};

const char* level_name(SesLevel level);
SesLevel parse_level(std::string_view text);

enum class FeatureKind { kCategorical, kContinuous };

struct FeatureSpec {
  std::string id;
  std::string name;
  SesLevel level = SesLevel::kBuilding;
  FeatureKind kind = FeatureKind::kContinuous;
  int n_levels = 0;  // categorical only
  int bins = 4;      // continuous only

  // Distinct model inputs: categories (or bins) plus one slot for missing.
  int encoded_levels() const { return value_levels() + 1; }
  int value_levels() const {
    return kind == FeatureKind::kCategorical ? n_levels : bins;
  }
  int missing_index() const { return value_levels(); }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws ValidationError on duplicate ids, n_levels/bins < 2, or a level
  // without any feature.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  // Feature indices at `level`, in schema order.
  std::vector<std::size_t> indices_at(SesLevel level) const;

  nlohmann::json to_json() const;
  static FeatureSchema from_json(const nlohmann::json& j);

  // Stable digest of the canonical JSON form.
  std::string hash() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<FeatureSpec> features_;
};

// nullopt marks a missing ("NA") value.
using FeatureValue = std::optional<double>;

struct BuildingRecord {
  std::string building_id;
  std::string estate_id;
  std::string tpu_id;
  std::string district_id;
  std::vector<FeatureValue> values;

  friend bool operator==(const BuildingRecord&, const BuildingRecord&) = default;
};

// Immutable validated collection of building records.
class Dataset {
 public:
  Dataset() = default;
  // Validates value counts, categorical ranges, unique building ids, and that
  // estate- and TPU-level values agree across every building that shares the
  // estate (TPU).
  Dataset(FeatureSchema schema, std::vector<BuildingRecord> records);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<BuildingRecord>& records() const { return records_; }
  const BuildingRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }

  std::optional<std::size_t> find(std::string_view building_id) const;

  // Sorted distinct district ids.
  std::vector<std::string> districts() const;
  std::vector<std::size_t> indices_in_district(std::string_view district) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.schema_ == b.schema_ && a.records_ == b.records_;
  }

 private:
  FeatureSchema schema_;
  std::vector<BuildingRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Inclusive calendar range.
struct StudyWindow {
  StudyWindow() = default;
  StudyWindow(std::string name, Date start, Date end);

  bool contains(Date d) const { return start <= d && d <= end; }
  long length_days() const { return days_between(start, end) + 1; }

  std::string name;
  Date start;
  Date end;
};

// Waves 1-4, the resurgence (wave 5), and the resurgence model-building span.
StudyWindow early_waves_window();
StudyWindow resurgence_window();
StudyWindow resurgence_build_window();

// Daily counts for one building on contiguous days from `start`.
struct CaseSeries {
  std::string building_id;
  Date start;
  std::vector<int> counts;

  Date end() const { return add_days(start, static_cast<long>(counts.size()) - 1); }
  // 0 outside the covered range.
  int count_on(Date d) const;

  friend bool operator==(const CaseSeries&, const CaseSeries&) = default;
};

// Sum of daily counts dated inside `window` (both ends inclusive).
long accumulate_cases(const CaseSeries& series, const StudyWindow& window);

// Accumulated counts per dataset record; buildings without a series get 0.
std::vector<long> accumulate_per_building(const Dataset& dataset,
                                          std::span<const CaseSeries> series,
                                          const StudyWindow& window);

// Quantile bin edges fitted on one sample. Values below every retained edge
// fall in bin 0; an edge equal to the sample minimum is dropped so a constant
// sample maps entirely to bin 0.
struct BinEdges {
  std::vector<double> edges;

  int assign(double value) const;
  friend bool operator==(const BinEdges&, const BinEdges&) = default;
};

BinEdges fit_quantile_bins(std::span<const double> values, int bins);

// Fits edges on `values` and assigns each of them. bins >= 2, values
// nonempty. Monotone, and bin populations differ by at most one when all
// values are distinct.
std::vector<int> discretize(std::span<const double> values, int bins);

}  // namespace sesnet::schema

#endif  // SESNET_SCHEMA_SCHEMA_H_
