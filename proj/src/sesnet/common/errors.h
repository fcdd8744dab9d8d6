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

#ifndef SESNET_COMMON_ERRORS_H_
#define SESNET_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace sesnet {

// Invalid input data, configuration or arguments. Maps to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes incompatible with a primitive.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite values produced during computation. Maps to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system failures (unreadable input, unwritable output).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sesnet

#endif  // SESNET_COMMON_ERRORS_H_
