// Copyright 2026 The tplvm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace tplvm {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws InputError.
Date parse_date(std::string_view text);

/// Formats as YYYY-MM-DD.
std::string format_date(const Date& date);

/// Last calendar day of the month `months` after the month containing `start`.
Date add_months_end(const Date& start, int months);

}  // namespace tplvm
