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

#ifndef SESNET_SCHEMA_IO_H_
#define SESNET_SCHEMA_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sesnet/schema/schema.h"

// File formats:
//   schema JSON   [{"id", "name", "level": "building"|"estate"|"tpu",
//                   "kind": {"categorical": n} | {"continuous": bins}}, ...]
//   features CSV  building_id,estate_id,tpu_id,district_id,<feature ids...>
//                 with "NA" for missing values
//   cases CSV     building_id,date,count  (sparse; absent days are 0)
namespace sesnet::schema {

FeatureSchema load_schema(const std::filesystem::path& path);
std::string schema_json_text(const FeatureSchema& schema);

struct LoadedData {
  Dataset dataset;
  std::vector<CaseSeries> cases;
};

// Feature columns may appear in any order but must match the schema ids
// exactly. Throws ValidationError naming the offending row or column.
Dataset parse_features_csv(const std::vector<std::string>& lines,
                           const FeatureSchema& schema);
std::vector<CaseSeries> parse_cases_csv(const std::vector<std::string>& lines,
                                        const Dataset& dataset);

LoadedData load_dataset(const std::filesystem::path& features_file,
                        const std::filesystem::path& cases_file,
                        const FeatureSchema& schema);

std::string features_csv_text(const Dataset& dataset);
// One row per nonzero building-day, in record then date order.
std::string cases_csv_text(const Dataset& dataset,
                           std::span<const CaseSeries> cases);

}  // namespace sesnet::schema

#endif  // SESNET_SCHEMA_IO_H_
