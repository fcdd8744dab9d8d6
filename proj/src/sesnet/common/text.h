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

#ifndef SESNET_COMMON_TEXT_H_
#define SESNET_COMMON_TEXT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sesnet {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

// Splits one CSV line on commas. Quoted fields are not supported; the file
// formats used here never need them.
std::vector<std::string> split_csv_line(std::string_view line);

// Non-empty lines of `text`; strips '\r' and a UTF-8 BOM.
std::vector<std::string> split_lines(std::string_view text);

// split_lines over a file's contents.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes atomically enough for our purposes: truncate then write. Throws
// IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

// FNV-1a 64-bit hash, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

double parse_double(std::string_view text, std::string_view context);
long long parse_int(std::string_view text, std::string_view context);

}  // namespace sesnet

#endif  // SESNET_COMMON_TEXT_H_
