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


#include "leaderboard.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "error.hpp"

namespace lpref {

namespace {

double key(const EvaluationRecord& r, Track t) {
  switch (t) {
    case Track::kScore: return *r.score;
    case Track::kAccuracy: return *r.accuracy;
    case Track::kSpeed: return -r.mean_time->count();
  }
  return 0.0;
}

// Strictly better by key, then by earlier submission.
bool better(const EvaluationRecord& a, const EvaluationRecord& b, Track t) {
  const double ka = key(a, t), kb = key(b, t);
  if (ka != kb) return ka > kb;
  return a.submitted_at < b.submitted_at;
}

bool counts(const EvaluationRecord& r) {
  return r.qualification == Qualification::kQualified && r.score &&
         r.accuracy && r.mean_time;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string_view to_string(Track t) {
  switch (t) {
    case Track::kScore: return "score";
    case Track::kAccuracy: return "accuracy";
    case Track::kSpeed: return "speed";
  }
  return "score";
}

Track track_from_string(std::string_view s) {
  if (s == "score") return Track::kScore;
  if (s == "accuracy") return Track::kAccuracy;
  if (s == "speed") return Track::kSpeed;
  throw Error(ErrorCode::kUnknownTrack, "unknown track '" + std::string(s) +
                                            "' (expected score, accuracy or speed)");
}

std::vector<LeaderboardEntry> rank(std::span<const EvaluationRecord> records,
                                   Track track) {
  std::map<std::string, const EvaluationRecord*> best;
  for (const auto& r : records) {
    if (!counts(r)) continue;
    auto [it, inserted] = best.try_emplace(r.team, &r);
    if (!inserted && better(r, *it->second, track)) it->second = &r;
  }
  std::vector<LeaderboardEntry> out;
  out.reserve(best.size());
  for (const auto& [team, r] : best) out.push_back({team, *r, track, 0});
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    if (better(a.best_record, b.best_record, track)) return true;
    if (better(b.best_record, a.best_record, track)) return false;
    return a.team < b.team;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = int(i) + 1;
  return out;
}

std::vector<DailyPoint> daily_series(std::span<const EvaluationRecord> records,
                                     Day from, Day to) {
  if (from > to) {
    throw Error(ErrorCode::kInvalidRange,
                "from " + format_day(from) + " is after to " + format_day(to));
  }
  std::vector<const EvaluationRecord*> qualified;
  for (const auto& r : records)
    if (counts(r)) qualified.push_back(&r);
  std::sort(qualified.begin(), qualified.end(),
            [](auto* a, auto* b) { return a->submitted_at < b->submitted_at; });

  std::vector<DailyPoint> out;
  DailyPoint running{from, std::nullopt, std::nullopt, std::nullopt};
  std::size_t next = 0;
  for (Day d = from; d <= to; d += std::chrono::days(1)) {
    while (next < qualified.size() && day_of(qualified[next]->submitted_at) <= d) {
      const EvaluationRecord& r = *qualified[next++];
      running.best_score = std::max(running.best_score.value_or(*r.score), *r.score);
      running.best_accuracy =
          std::max(running.best_accuracy.value_or(*r.accuracy), *r.accuracy);
      running.lowest_time =
          std::min(running.lowest_time.value_or(*r.mean_time), *r.mean_time);
    }
    running.day = d;
    out.push_back(running);
  }
  return out;
}

nlohmann::json to_json(const LeaderboardEntry& e) {
  return {{"rank", e.rank},
          {"team", e.team},
          {"track", to_string(e.track)},
          {"best_record", to_json(e.best_record)}};
}

nlohmann::json leaderboard_snapshot(std::span<const EvaluationRecord> records,
                                    Timestamp generated_at,
                                    std::optional<Track> only) {
  nlohmann::json tracks = nlohmann::json::object();
  for (Track t : {Track::kScore, Track::kAccuracy, Track::kSpeed}) {
    if (only && *only != t) continue;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : rank(records, t)) list.push_back(to_json(e));
    tracks[std::string(to_string(t))] = std::move(list);
  }
  return {{"generated_at", format_timestamp(generated_at)}, {"tracks", tracks}};
}

std::string daily_series_csv(std::span<const DailyPoint> series) {
  std::string out = "day,best_score,best_accuracy,lowest_time_ms\n";
  for (const auto& p : series) {
    out += format_day(p.day);
    out += ',';
    if (p.best_score) out += format_number(*p.best_score);
    out += ',';
    if (p.best_accuracy) out += format_number(*p.best_accuracy);
    out += ',';
    if (p.lowest_time) out += format_number(p.lowest_time->count());
    out += '\n';
  }
  return out;
}

}  // namespace lpref
