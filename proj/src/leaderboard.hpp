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


// Award-track rankings and the cumulative daily progress series, derived on
// demand from a snapshot of evaluation records. Only Qualified records count.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "records.hpp"

namespace lpref {

enum class Track { kScore, kAccuracy, kSpeed };

std::string_view to_string(Track t);
// "score", "accuracy" or "speed"; anything else throws Error(kUnknownTrack).
Track track_from_string(std::string_view s);

struct LeaderboardEntry {
  std::string team;
  EvaluationRecord best_record;
  Track track = Track::kScore;
  int rank = 0;
};

// One entry per team, best record first by the track key, ties to the
// earlier submission and then the team name.
std::vector<LeaderboardEntry> rank(std::span<const EvaluationRecord> records,
                                   Track track);

struct DailyPoint {
  Day day;
  std::optional<double> best_score;
  std::optional<double> best_accuracy;
  std::optional<Milliseconds> lowest_time;

  friend bool operator==(const DailyPoint&, const DailyPoint&) = default;
};

// One point per day in [from, to], each aggregating every qualified record
// submitted up to the end of that day. Throws Error(kInvalidRange) if
// from > to.
std::vector<DailyPoint> daily_series(std::span<const EvaluationRecord> records,
                                     Day from, Day to);

nlohmann::json to_json(const LeaderboardEntry& e);
// {generated_at, tracks: {score, accuracy, speed}}; `only` limits the
// snapshot to one track.
nlohmann::json leaderboard_snapshot(std::span<const EvaluationRecord> records,
                                    Timestamp generated_at,
                                    std::optional<Track> only = std::nullopt);

// Header "day,best_score,best_accuracy,lowest_time_ms"; absent values are
// empty fields.
std::string daily_series_csv(std::span<const DailyPoint> series);

}  // namespace lpref
