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

#include "sesnet/schema/io.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "sesnet/common/errors.h"
#include "sesnet/common/text.h"

namespace sesnet::schema {

FeatureSchema load_schema(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("schema '" + path.string() + "': " + e.what());
  }
  return FeatureSchema::from_json(j);
}

std::string schema_json_text(const FeatureSchema& schema) {
  return schema.to_json().dump(2) + "\n";
}

Dataset parse_features_csv(const std::vector<std::string>& lines,
                           const FeatureSchema& schema) {
  if (lines.empty()) throw ValidationError("features CSV: missing header");
  const std::vector<std::string> header = split_csv_line(lines[0]);
  static const char* kIdColumns[] = {"building_id", "estate_id", "tpu_id",
                                     "district_id"};
  if (header.size() < 4) throw ValidationError("features CSV: header too short");
  for (int i = 0; i < 4; ++i) {
    if (header[i] != kIdColumns[i]) {
      throw ValidationError(std::string("features CSV: column ") +
                            std::to_string(i + 1) + " must be '" + kIdColumns[i] +
                            "', got '" + header[i] + "'");
    }
  }
  // column position -> schema index
  std::vector<std::size_t> column_feature;
  std::vector<bool> covered(schema.size(), false);
  for (std::size_t c = 4; c < header.size(); ++c) {
    auto idx = schema.index_of(header[c]);
    if (!idx) throw ValidationError("features CSV: unknown feature id '" + header[c] + "'");
    if (covered[*idx]) {
      throw ValidationError("features CSV: feature '" + header[c] + "' repeated");
    }
    covered[*idx] = true;
    column_feature.push_back(*idx);
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!covered[i]) {
      throw ValidationError("features CSV: missing column for feature '" +
                            schema[i].id + "'");
    }
  }

  std::vector<BuildingRecord> records;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::vector<std::string> fields = split_csv_line(lines[row]);
    if (fields.size() != header.size()) {
      throw ValidationError("features CSV line " + std::to_string(row + 1) +
                            ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    }
    BuildingRecord rec{fields[0], fields[1], fields[2], fields[3],
                       std::vector<FeatureValue>(schema.size())};
    for (std::size_t c = 4; c < fields.size(); ++c) {
      const std::string& cell = fields[c];
      if (cell == "NA") continue;
      const std::string context = "features CSV line " + std::to_string(row + 1) +
                                  ", feature '" + header[c] + "'";
      rec.values[column_feature[c - 4]] = parse_double(cell, context);
    }
    records.push_back(std::move(rec));
  }
  return Dataset(schema, std::move(records));
}

std::vector<CaseSeries> parse_cases_csv(const std::vector<std::string>& lines,
                                        const Dataset& dataset) {
  if (lines.empty()) return {};
  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header != std::vector<std::string>{"building_id", "date", "count"}) {
    throw ValidationError("cases CSV: header must be 'building_id,date,count'");
  }
  // record index -> date -> count
  std::map<std::size_t, std::map<Date, int>> by_building;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::vector<std::string> fields = split_csv_line(lines[row]);
    const std::string where = "cases CSV line " + std::to_string(row + 1);
    if (fields.size() != 3) throw ValidationError(where + ": expected 3 fields");
    auto idx = dataset.find(fields[0]);
    if (!idx) throw ValidationError(where + ": unknown building '" + fields[0] + "'");
    const Date date = parse_date(fields[1]);
    const long long count = parse_int(fields[2], where);
    if (count < 0) throw ValidationError(where + ": negative count");
    if (!by_building[*idx].emplace(date, static_cast<int>(count)).second) {
      throw ValidationError(where + ": duplicate day " + fields[1] +
                            " for building '" + fields[0] + "'");
    }
  }
  std::vector<CaseSeries> out;
  for (const auto& [idx, days] : by_building) {
    CaseSeries s;
    s.building_id = dataset[idx].building_id;
    s.start = days.begin()->first;
    s.counts.assign(static_cast<std::size_t>(
                        days_between(s.start, days.rbegin()->first) + 1),
                    0);
    for (const auto& [d, c] : days) {
      s.counts[static_cast<std::size_t>(days_between(s.start, d))] = c;
    }
    out.push_back(std::move(s));
  }
  return out;
}

LoadedData load_dataset(const std::filesystem::path& features_file,
                        const std::filesystem::path& cases_file,
                        const FeatureSchema& schema) {
  Dataset dataset = parse_features_csv(read_lines(features_file), schema);
  std::vector<CaseSeries> cases = parse_cases_csv(read_lines(cases_file), dataset);
  return {std::move(dataset), std::move(cases)};
}

std::string features_csv_text(const Dataset& dataset) {
  const FeatureSchema& schema = dataset.schema();
  std::ostringstream out;
  out << "building_id,estate_id,tpu_id,district_id";
  for (const FeatureSpec& f : schema.features()) out << ',' << f.id;
  out << '\n';
  for (const BuildingRecord& r : dataset.records()) {
    out << r.building_id << ',' << r.estate_id << ',' << r.tpu_id << ','
        << r.district_id;
    for (const FeatureValue& v : r.values) {
      out << ',' << (v ? format_double(*v) : std::string("NA"));
    }
    out << '\n';
  }
  return out.str();
}

std::string cases_csv_text(const Dataset& dataset,
                           std::span<const CaseSeries> cases) {
  std::vector<const CaseSeries*> ordered;
  for (const CaseSeries& s : cases) ordered.push_back(&s);
  auto rank = [&](const CaseSeries* s) {
    auto idx = dataset.find(s->building_id);
    return idx ? *idx : dataset.size();
  };
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const CaseSeries* a, const CaseSeries* b) {
                     return rank(a) < rank(b);
                   });
  std::ostringstream out;
  out << "building_id,date,count\n";
  for (const CaseSeries* s : ordered) {
    for (std::size_t i = 0; i < s->counts.size(); ++i) {
      if (s->counts[i] == 0) continue;
      out << s->building_id << ','
          << format_date(add_days(s->start, static_cast<long>(i))) << ','
          << s->counts[i] << '\n';
    }
  }
  return out.str();
}

}  // namespace sesnet::schema
