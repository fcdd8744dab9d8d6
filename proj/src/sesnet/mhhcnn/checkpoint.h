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

#ifndef SESNET_MHHCNN_CHECKPOINT_H_
#define SESNET_MHHCNN_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "sesnet/mhhcnn/model.h"

namespace sesnet::mhhcnn {

inline constexpr const char* kCheckpointFormat = "sesnet-mhhcnn-1";

// One JSON header line followed by every parameter as a little-endian
// float64, in parameters() order.
std::string serialize_checkpoint(const MhhcnnModel& model);
MhhcnnModel deserialize_checkpoint(const std::string& bytes,
                                   const schema::FeatureSchema& schema);

void save_checkpoint(const MhhcnnModel& model, const std::filesystem::path& path);
// Throws ValidationError when the checkpoint was written for another schema.
MhhcnnModel load_checkpoint(const std::filesystem::path& path,
                            const schema::FeatureSchema& schema);

}  // namespace sesnet::mhhcnn

#endif  // SESNET_MHHCNN_CHECKPOINT_H_
