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

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "metrics.hpp"
#include "timeutil.hpp"

namespace lpref {

enum class SubmissionStatus { kQueued, kRunning, kScored, kDisqualified, kFailed };

std::string_view to_string(SubmissionStatus s);
SubmissionStatus submission_status_from_string(std::string_view s);
bool is_terminal(SubmissionStatus s);

enum class Qualification {
  kQualified,
  kDisqualifiedBelowReferenceAccuracy,
  kDisqualifiedAboveReferenceTime,
  kDisqualifiedWrongOutputCount,
  kDisqualifiedRunFailure,
  kDisqualifiedMalformedOutput,
};

std::string_view to_string(Qualification q);
Qualification qualification_from_string(std::string_view s);

struct Submission {
  std::string id;
  std::string team;
  Timestamp submitted_at{};
  std::string archive_ref;
  SubmissionStatus status = SubmissionStatus::kQueued;
};

nlohmann::json to_json(const Submission& s);
Submission submission_from_json(const nlohmann::json& j);

struct EvaluationRecord {
  std::string submission_id;
  std::string team;
  Timestamp submitted_at{};
  Timestamp evaluated_at{};
  std::optional<double> accuracy;
  std::optional<Milliseconds> mean_time;
  std::optional<double> score;
  Qualification qualification = Qualification::kDisqualifiedRunFailure;
  bool suspect_timing = false;
  std::string per_image_report_ref;
  // Human-readable cause for disqualifications and failures.
  std::string detail;
  // Set when the pipeline itself failed (worker unreachable after retries);
  // the submission then ends as Failed rather than Disqualified.
  bool infrastructure_failure = false;

  SubmissionStatus terminal_status() const;

  // Throws Error(kInvalidArgument) when the record breaks its invariants:
  // a Qualified record needs all metrics with a consistent score, run
  // failures and wrong output counts carry no metrics.
  void validate() const;

  friend bool operator==(const EvaluationRecord&,
                         const EvaluationRecord&) = default;
};

nlohmann::json to_json(const EvaluationRecord& r);
EvaluationRecord evaluation_record_from_json(const nlohmann::json& j);

}  // namespace lpref
