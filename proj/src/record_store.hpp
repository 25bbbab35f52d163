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

// Durable state of the referee, kept in one directory:
//
//   submissions.ndjson   submission events ("submitted", "status")
//   records.ndjson       one EvaluationRecord per line, write-once per id
//   blobs/<sha256>       archives and scoring reports
//
// Both logs are append-only newline-delimited JSON. Opening the store
// replays them into in-memory indexes; a torn final line (crash during an
// append) is dropped.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "records.hpp"

namespace lpref {

struct RecordFilter {
  std::optional<std::string> team;
  // Inclusive bounds on submitted_at.
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;

  static RecordFilter all() { return {}; }
  static RecordFilter by_team(std::string team) {
    RecordFilter f;
    f.team = std::move(team);
    return f;
  }
  bool matches(const EvaluationRecord& r) const;
};

class AppendLog;

class RecordStore {
 public:
  // Throws Error(kStorageFailure) if the directory cannot be prepared or a
  // log is corrupt before its last line.
  explicit RecordStore(const std::filesystem::path& dir);
  ~RecordStore();
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  const std::filesystem::path& dir() const { return dir_; }

  // Content-addressed blobs; put is idempotent.
  std::string put_blob(ByteView data);
  bool has_blob(const std::string& ref) const;
  Bytes get_blob(const std::string& ref) const;

  // Throws Error(kDuplicateSubmissionId) when the id exists.
  void add_submission(const Submission& s);
  // Throws Error(kUnknownSubmission).
  void set_status(const std::string& id, SubmissionStatus status);
  std::optional<Submission> submission(const std::string& id) const;
  // Arrival order.
  std::vector<Submission> submissions() const;

  // Write-once. Throws Error(kStorageFailure) on a second record for the
  // same submission id or when the append fails.
  void persist_record(const EvaluationRecord& record);
  bool has_record(const std::string& submission_id) const;
  // Throws Error(kUnknownSubmission).
  EvaluationRecord load_record(const std::string& submission_id) const;
  // Ordered by submitted_at, ties in append order.
  std::vector<EvaluationRecord> load_records(
      const RecordFilter& filter = RecordFilter::all()) const;

 private:
  void replay();

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::unique_ptr<AppendLog> submission_log_;
  std::unique_ptr<AppendLog> record_log_;
  std::vector<std::string> arrival_;
  std::map<std::string, Submission> submissions_;
  std::vector<EvaluationRecord> records_;
  std::map<std::string, std::size_t> record_index_;
};

}  // namespace lpref
