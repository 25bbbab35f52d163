// Copyright 2026 The lpref Authors
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

namespace lpref {

using Timestamp =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;
using Day = std::chrono::sys_days;

Timestamp now_utc();

// "2023-06-01T12:34:56.789Z". Parsing also accepts a missing fractional
// part. Throws Error(kInvalidArgument) on bad input.
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// "2023-06-01".
std::string format_day(Day d);
Day parse_day(std::string_view text);

Day day_of(Timestamp t);

}  // namespace lpref
