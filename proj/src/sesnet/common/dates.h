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

#ifndef SESNET_COMMON_DATES_H_
#define SESNET_COMMON_DATES_H_

#include <chrono>
#include <string>
#include <string_view>

namespace sesnet {

// Proleptic Gregorian calendar day.
using Date = std::chrono::sys_days;

Date make_date(int year, unsigned month, unsigned day);

// Parses an ISO-8601 calendar date ("YYYY-MM-DD"). Throws ValidationError.
Date parse_date(std::string_view text);

std::string format_date(Date date);

// Signed number of days from `from` to `to`.
inline long days_between(Date from, Date to) {
  return static_cast<long>((to - from).count());
}

inline Date add_days(Date date, long days) {
  return date + std::chrono::days(days);
}

}  // namespace sesnet

#endif  // SESNET_COMMON_DATES_H_
