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

#include "sesnet/mhhcnn/checkpoint.h"

#include <bit>
#include <cstdint>

#include "sesnet/common/errors.h"
#include "sesnet/common/text.h"

namespace sesnet::mhhcnn {

std::string serialize_checkpoint(const MhhcnnModel& model) {
  const auto params = model.parameters();
  nlohmann::json header = {{"format", kCheckpointFormat},
                           {"schema_hash", model.schema().hash()},
                           {"config", model.config().to_json()},
                           {"seed", model.config().seed},
                           {"n_params", model.parameter_count()},
                           {"encoder", model.encoder().to_json()}};
  std::string out = header.dump() + "\n";
  out.reserve(out.size() + 8 * model.parameter_count());
  for (const nd::Parameter* p : params) {
    for (double v : p->value.values()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  return out;
}

MhhcnnModel deserialize_checkpoint(const std::string& bytes,
                                   const schema::FeatureSchema& schema) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw ValidationError("checkpoint: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (header.value("format", "") != kCheckpointFormat) {
    throw ValidationError("checkpoint: unsupported format");
  }
  if (header.value("schema_hash", "") != schema.hash()) {
    throw ValidationError("checkpoint: schema hash " + header.value("schema_hash", "") +
                          " does not match dataset schema " + schema.hash());
  }
  MhhcnnConfig config;
  config.update_from_json(header.at("config"));
  MhhcnnModel model = MhhcnnModel::build(schema, config);
  const std::size_t n = header.value("n_params", std::size_t{0});
  if (n != model.parameter_count() || bytes.size() - newline - 1 != 8 * n) {
    throw ValidationError("checkpoint: parameter blob size does not match the model");
  }
  model.set_encoder(FeatureEncoder::from_json(header.at("encoder")));
  std::size_t pos = newline + 1;
  for (nd::Parameter* p : model.parameters()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * b);
      }
      p->value[i] = std::bit_cast<double>(bits);
    }
  }
  return model;
}

void save_checkpoint(const MhhcnnModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(model));
}

MhhcnnModel load_checkpoint(const std::filesystem::path& path,
                            const schema::FeatureSchema& schema) {
  return deserialize_checkpoint(read_file(path), schema);
}

}  // namespace sesnet::mhhcnn
