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

#include "timeutil.hpp"

#include <cstdio>

#include "error.hpp"

namespace lpref {

namespace {

using namespace std::chrono;

[[noreturn]] void bad(std::string_view what, std::string_view text) {
  throw Error(ErrorCode::kInvalidArgument,
              "invalid " + std::string(what) + " '" + std::string(text) + "'");
}

bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, int* out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  *out = v;
  return true;
}

bool parse_ymd(std::string_view s, year_month_day* out) {
  int y, m, d;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
  if (!parse_digits(s, 0, 4, &y) || !parse_digits(s, 5, 2, &m) ||
      !parse_digits(s, 8, 2, &d)) {
    return false;
  }
  *out = year_month_day{year{y}, month{unsigned(m)}, day{unsigned(d)}};
  return out->ok();
}

}  // namespace

Timestamp now_utc() {
  return time_point_cast<milliseconds>(system_clock::now());
}

std::string format_timestamp(Timestamp t) {
  const Day d = floor<days>(t);
  const year_month_day ymd{d};
  long long ms = (t - d).count();
  const long long h = ms / 3'600'000;
  ms %= 3'600'000;
  const long long mi = ms / 60'000;
  ms %= 60'000;
  const long long s = ms / 1000;
  ms %= 1000;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()), h,
                mi, s, ms);
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  year_month_day ymd;
  if (!parse_ymd(text, &ymd) || text.size() < 20 || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':') {
    bad("timestamp", text);
  }
  int h, mi, s, frac = 0;
  if (!parse_digits(text, 11, 2, &h) || !parse_digits(text, 14, 2, &mi) ||
      !parse_digits(text, 17, 2, &s) || h > 23 || mi > 59 || s > 60) {
    bad("timestamp", text);
  }
  std::size_t pos = 19;
  if (text[pos] == '.') {
    if (!parse_digits(text, pos + 1, 3, &frac)) bad("timestamp", text);
    pos += 4;
  }
  if (pos + 1 != text.size() || text[pos] != 'Z') bad("timestamp", text);
  return Timestamp(sys_days(ymd).time_since_epoch() + hours(h) + minutes(mi) +
                   seconds(s) + milliseconds(frac));
}

std::string format_day(Day d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

Day parse_day(std::string_view text) {
  year_month_day ymd;
  if (text.size() != 10 || !parse_ymd(text, &ymd)) bad("date", text);
  return sys_days(ymd);
}

Day day_of(Timestamp t) { return floor<days>(t); }

}  // namespace lpref
