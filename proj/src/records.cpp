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

#include "records.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace lpref {

namespace {

constexpr std::array<std::pair<SubmissionStatus, std::string_view>, 5>
    kStatusNames{{{SubmissionStatus::kQueued, "Queued"},
                  {SubmissionStatus::kRunning, "Running"},
                  {SubmissionStatus::kScored, "Scored"},
                  {SubmissionStatus::kDisqualified, "Disqualified"},
                  {SubmissionStatus::kFailed, "Failed"}}};

constexpr std::array<std::pair<Qualification, std::string_view>, 6>
    kQualificationNames{{
        {Qualification::kQualified, "Qualified"},
        {Qualification::kDisqualifiedBelowReferenceAccuracy,
         "DisqualifiedBelowReferenceAccuracy"},
        {Qualification::kDisqualifiedAboveReferenceTime,
         "DisqualifiedAboveReferenceTime"},
        {Qualification::kDisqualifiedWrongOutputCount,
         "DisqualifiedWrongOutputCount"},
        {Qualification::kDisqualifiedRunFailure, "DisqualifiedRunFailure"},
        {Qualification::kDisqualifiedMalformedOutput,
         "DisqualifiedMalformedOutput"},
    }};

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_double(const nlohmann::json& j,
                                      const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

std::string_view to_string(SubmissionStatus s) {
  for (const auto& [value, name] : kStatusNames)
    if (value == s) return name;
  return "Unknown";
}

SubmissionStatus submission_status_from_string(std::string_view s) {
  for (const auto& [value, name] : kStatusNames)
    if (name == s) return value;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown submission status '" + std::string(s) + "'");
}

bool is_terminal(SubmissionStatus s) {
  return s == SubmissionStatus::kScored ||
         s == SubmissionStatus::kDisqualified ||
         s == SubmissionStatus::kFailed;
}

std::string_view to_string(Qualification q) {
  for (const auto& [value, name] : kQualificationNames)
    if (value == q) return name;
  return "Unknown";
}

Qualification qualification_from_string(std::string_view s) {
  for (const auto& [value, name] : kQualificationNames)
    if (name == s) return value;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown qualification '" + std::string(s) + "'");
}

nlohmann::json to_json(const Submission& s) {
  return {{"id", s.id},
          {"team", s.team},
          {"submitted_at", format_timestamp(s.submitted_at)},
          {"archive_ref", s.archive_ref},
          {"status", to_string(s.status)}};
}

Submission submission_from_json(const nlohmann::json& j) {
  Submission s;
  s.id = j.at("id").get<std::string>();
  s.team = j.at("team").get<std::string>();
  s.submitted_at = parse_timestamp(j.at("submitted_at").get<std::string>());
  s.archive_ref = j.at("archive_ref").get<std::string>();
  s.status = submission_status_from_string(j.at("status").get<std::string>());
  return s;
}

SubmissionStatus EvaluationRecord::terminal_status() const {
  if (infrastructure_failure) return SubmissionStatus::kFailed;
  return qualification == Qualification::kQualified
             ? SubmissionStatus::kScored
             : SubmissionStatus::kDisqualified;
}

void EvaluationRecord::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument,
                "record " + submission_id + ": " + why);
  };
  if (submission_id.empty()) fail("empty submission id");
  const bool has_all = accuracy && mean_time && score;
  const bool has_any = accuracy || mean_time || score;
  switch (qualification) {
    case Qualification::kQualified: {
      if (!has_all) fail("qualified record without metrics");
      const double expected = *accuracy / (mean_time->count() / 1000.0);
      if (std::abs(expected - *score) > 1e-9 * std::max(1.0, expected))
        fail("score inconsistent with accuracy and time");
      if (infrastructure_failure) fail("qualified record marked as failure");
      break;
    }
    case Qualification::kDisqualifiedRunFailure:
    case Qualification::kDisqualifiedWrongOutputCount:
      if (has_any) fail("run failure records carry no metrics");
      break;
    default:
      break;
  }
  if (accuracy && !(*accuracy >= 0.0 && *accuracy <= 1.0))
    fail("accuracy outside [0, 1]");
  if (mean_time && !(mean_time->count() > 0)) fail("non-positive mean time");
}

nlohmann::json to_json(const EvaluationRecord& r) {
  nlohmann::json j{
      {"submission_id", r.submission_id},
      {"team", r.team},
      {"submitted_at", format_timestamp(r.submitted_at)},
      {"evaluated_at", format_timestamp(r.evaluated_at)},
      {"accuracy", optional_json(r.accuracy)},
      {"mean_time_ms", r.mean_time ? nlohmann::json(r.mean_time->count())
                                   : nlohmann::json(nullptr)},
      {"score", optional_json(r.score)},
      {"qualification", to_string(r.qualification)},
      {"suspect_timing", r.suspect_timing},
      {"per_image_report_ref", r.per_image_report_ref},
      {"detail", r.detail},
  };
  if (r.infrastructure_failure) j["infrastructure_failure"] = true;
  return j;
}

EvaluationRecord evaluation_record_from_json(const nlohmann::json& j) {
  EvaluationRecord r;
  r.submission_id = j.at("submission_id").get<std::string>();
  r.team = j.at("team").get<std::string>();
  r.submitted_at = parse_timestamp(j.at("submitted_at").get<std::string>());
  r.evaluated_at = parse_timestamp(j.at("evaluated_at").get<std::string>());
  r.accuracy = optional_double(j, "accuracy");
  if (auto ms = optional_double(j, "mean_time_ms")) r.mean_time = Milliseconds(*ms);
  r.score = optional_double(j, "score");
  r.qualification =
      qualification_from_string(j.at("qualification").get<std::string>());
  r.suspect_timing = j.value("suspect_timing", false);
  r.per_image_report_ref = j.value("per_image_report_ref", "");
  r.detail = j.value("detail", "");
  r.infrastructure_failure = j.value("infrastructure_failure", false);
  return r;
}

}  // namespace lpref
