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

#include "record_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "digest.hpp"
#include "fsutil.hpp"

namespace lpref {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void storage_failure(const std::string& what) {
  throw Error(ErrorCode::kStorageFailure, what);
}

bool valid_blob_ref(const std::string& ref) {
  constexpr std::string_view kPrefix = "sha256:";
  if (ref.size() != kPrefix.size() + 64 || ref.compare(0, kPrefix.size(), kPrefix) != 0)
    return false;
  return std::all_of(ref.begin() + kPrefix.size(), ref.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

}  // namespace

// One newline-delimited JSON file opened for appending.
class AppendLog {
 public:
  explicit AppendLog(fs::path path) : path_(std::move(path)) {}
  ~AppendLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  // Returns parsed lines. Drops an unterminated or unparsable final line
  // and truncates the file to the last good newline.
  std::vector<nlohmann::json> replay() {
    std::vector<nlohmann::json> out;
    std::string text;
    if (fs::exists(path_)) text = read_text_file(path_);
    std::size_t pos = 0, good_end = 0;
    while (pos < text.size()) {
      const std::size_t eol = text.find('\n', pos);
      const bool terminated = eol != std::string::npos;
      const std::string_view line(text.data() + pos,
                                  (terminated ? eol : text.size()) - pos);
      const bool last = !terminated || eol + 1 == text.size();
      if (!line.empty()) {
        try {
          if (!terminated) throw std::runtime_error("torn");
          out.push_back(nlohmann::json::parse(line));
        } catch (const std::exception&) {
          if (!last) {
            storage_failure("corrupt line in " + path_.string() +
                            " at byte " + std::to_string(pos));
          }
          break;
        }
      }
      pos = terminated ? eol + 1 : text.size();
      good_end = pos;
    }
    if (good_end != text.size()) {
      std::error_code ec;
      fs::resize_file(path_, good_end, ec);
      if (ec) storage_failure("cannot truncate " + path_.string());
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC,
                 0644);
    if (fd_ < 0) {
      storage_failure("cannot open " + path_.string() + ": " +
                      std::strerror(errno));
    }
    return out;
  }

  void append(const nlohmann::json& value) {
    std::string line = value.dump();
    line.push_back('\n');
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        storage_failure("append to " + path_.string() + " failed: " +
                        std::strerror(errno));
      }
      off += std::size_t(n);
    }
    if (::fdatasync(fd_) != 0) {
      storage_failure("fdatasync " + path_.string() + " failed: " +
                      std::strerror(errno));
    }
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

bool RecordFilter::matches(const EvaluationRecord& r) const {
  if (team && r.team != *team) return false;
  if (from && r.submitted_at < *from) return false;
  if (to && r.submitted_at > *to) return false;
  return true;
}

RecordStore::RecordStore(const fs::path& dir) : dir_(dir) {
  std::error_code ec;
  fs::create_directories(dir_ / "blobs", ec);
  if (ec) storage_failure("cannot create " + dir_.string() + ": " + ec.message());
  submission_log_ = std::make_unique<AppendLog>(dir_ / "submissions.ndjson");
  record_log_ = std::make_unique<AppendLog>(dir_ / "records.ndjson");
  replay();
}

RecordStore::~RecordStore() = default;

void RecordStore::replay() {
  try {
    for (const auto& event : submission_log_->replay()) {
      const std::string kind = event.at("event").get<std::string>();
      if (kind == "submitted") {
        Submission s = submission_from_json(event.at("submission"));
        if (!submissions_.count(s.id)) arrival_.push_back(s.id);
        submissions_[s.id] = std::move(s);
      } else if (kind == "status") {
        const auto it = submissions_.find(event.at("id").get<std::string>());
        if (it == submissions_.end()) continue;
        it->second.status =
            submission_status_from_string(event.at("status").get<std::string>());
      }
    }
    for (const auto& line : record_log_->replay()) {
      EvaluationRecord r = evaluation_record_from_json(line);
      if (record_index_.count(r.submission_id)) continue;  // first write wins
      record_index_[r.submission_id] = records_.size();
      records_.push_back(std::move(r));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kStorageFailure) throw;
    storage_failure(std::string("cannot replay store: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    storage_failure(std::string("cannot replay store: ") + e.what());
  }
}

std::string RecordStore::put_blob(ByteView data) {
  const std::string hex = sha256_hex(data);
  const fs::path target = dir_ / "blobs" / hex;
  std::error_code ec;
  if (fs::exists(target, ec)) return "sha256:" + hex;
  // Write under a temporary name so readers never see a partial blob.
  const fs::path tmp = dir_ / "blobs" / (hex + ".tmp" + std::to_string(::getpid()));
  try {
    write_file(tmp, data);
  } catch (const Error& e) {
    storage_failure(e.what());
  }
  fs::rename(tmp, target, ec);
  if (ec) storage_failure("cannot store blob: " + ec.message());
  return "sha256:" + hex;
}

bool RecordStore::has_blob(const std::string& ref) const {
  if (!valid_blob_ref(ref)) return false;
  std::error_code ec;
  return fs::exists(dir_ / "blobs" / ref.substr(7), ec);
}

Bytes RecordStore::get_blob(const std::string& ref) const {
  if (!has_blob(ref)) storage_failure("unknown blob " + ref);
  try {
    return read_file(dir_ / "blobs" / ref.substr(7));
  } catch (const Error& e) {
    storage_failure(e.what());
  }
}

void RecordStore::add_submission(const Submission& s) {
  std::unique_lock lock(mu_);
  if (submissions_.count(s.id)) {
    throw Error(ErrorCode::kDuplicateSubmissionId,
                "submission " + s.id + " already exists");
  }
  submission_log_->append({{"event", "submitted"}, {"submission", to_json(s)}});
  arrival_.push_back(s.id);
  submissions_[s.id] = s;
}

void RecordStore::set_status(const std::string& id, SubmissionStatus status) {
  std::unique_lock lock(mu_);
  const auto it = submissions_.find(id);
  if (it == submissions_.end()) {
    throw Error(ErrorCode::kUnknownSubmission, "unknown submission " + id);
  }
  submission_log_->append({{"event", "status"},
                           {"id", id},
                           {"status", to_string(status)},
                           {"at", format_timestamp(now_utc())}});
  it->second.status = status;
}

std::optional<Submission> RecordStore::submission(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = submissions_.find(id);
  if (it == submissions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Submission> RecordStore::submissions() const {
  std::shared_lock lock(mu_);
  std::vector<Submission> out;
  out.reserve(arrival_.size());
  for (const auto& id : arrival_) out.push_back(submissions_.at(id));
  return out;
}

void RecordStore::persist_record(const EvaluationRecord& record) {
  record.validate();
  std::unique_lock lock(mu_);
  if (record_index_.count(record.submission_id)) {
    storage_failure("record for " + record.submission_id + " already written");
  }
  record_log_->append(to_json(record));
  record_index_[record.submission_id] = records_.size();
  records_.push_back(record);
}

bool RecordStore::has_record(const std::string& submission_id) const {
  std::shared_lock lock(mu_);
  return record_index_.count(submission_id) > 0;
}

EvaluationRecord RecordStore::load_record(const std::string& submission_id) const {
  std::shared_lock lock(mu_);
  const auto it = record_index_.find(submission_id);
  if (it == record_index_.end()) {
    throw Error(ErrorCode::kUnknownSubmission,
                "no record for submission " + submission_id);
  }
  return records_[it->second];
}

std::vector<EvaluationRecord> RecordStore::load_records(
    const RecordFilter& filter) const {
  std::vector<EvaluationRecord> out;
  {
    std::shared_lock lock(mu_);
    for (const auto& r : records_)
      if (filter.matches(r)) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.submitted_at < b.submitted_at;
  });
  return out;
}

}  // namespace lpref
