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

#include "sesnet/common/dates.h"

#include <charconv>
#include <cstdio>

#include "sesnet/common/errors.h"

namespace sesnet {

Date make_date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw ValidationError("invalid calendar date " + std::to_string(year) +
                          "-" + std::to_string(month) + "-" +
                          std::to_string(day));
  }
  return Date{ymd};
}

Date parse_date(std::string_view text) {
  auto bad = [&] {
    return ValidationError("malformed date '" + std::string(text) +
                           "' (expected YYYY-MM-DD)");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  auto parse_part = [&](size_t pos, size_t len, auto& out) {
    const char* first = text.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) throw bad();
  };
  parse_part(0, 4, year);
  parse_part(5, 2, month);
  parse_part(8, 2, day);
  return make_date(year, month, day);
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace sesnet
