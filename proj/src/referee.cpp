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

#include "referee.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fsutil.hpp"
#include "zip_archive.hpp"

namespace lpref {

namespace fs = std::filesystem;

namespace {

std::chrono::milliseconds default_timeout(Milliseconds reference_mean,
                                          std::size_t image_count) {
  const double total = 2.0 * reference_mean.count() * double(image_count);
  return std::chrono::milliseconds(static_cast<long long>(std::ceil(total)));
}

std::string new_submission_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::vector<std::string> png_names(const fs::path& dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  }
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot list " + dir.string() + ": " +
                                    ec.message());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string format_ms(Milliseconds ms) {
  std::ostringstream out;
  out << ms.count() << " ms";
  return out.str();
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of("\r\n");
  if (end == std::string::npos) return {};
  auto start = text.find_last_of('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1,
                     end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

void RefereeConfig::validate() const {
  auto fail = [](const std::string& why) {
    throw Error(ErrorCode::kConfig, "referee config: " + why);
  };
  if (!(reference_accuracy > 0.0 && reference_accuracy <= 1.0))
    fail("reference_accuracy must be in (0, 1]");
  if (!(reference_mean_time.count() > 0))
    fail("reference_mean_time_ms must be positive");
  if (expected_image_count == 0) fail("expected_image_count must be positive");
  if (image_dims.width == 0 || image_dims.height == 0)
    fail("image dimensions must be positive");
  if (max_retries < 0) fail("max_retries must be non-negative");
  if (!(timing_slack >= 0.0)) fail("timing_slack must be non-negative");
  if (test_set_ref.empty()) fail("test_set_ref is empty");
  try {
    run_limits.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

RefereeConfig RefereeConfig::standings_preset() {
  RefereeConfig c;
  c.reference_accuracy = 0.50;
  c.reference_mean_time = Milliseconds(108.1);
  c.run_limits.wall_clock_timeout =
      default_timeout(c.reference_mean_time, c.expected_image_count);
  return c;
}

RefereeConfig RefereeConfig::writeup_preset() {
  RefereeConfig c;
  c.reference_accuracy = 0.5011;
  c.reference_mean_time = Milliseconds(200.0);
  c.run_limits.wall_clock_timeout =
      default_timeout(c.reference_mean_time, c.expected_image_count);
  return c;
}

RefereeConfig RefereeConfig::preset(std::string_view name) {
  if (name == "standings") return standings_preset();
  if (name == "writeup") return writeup_preset();
  throw Error(ErrorCode::kConfig,
              "unknown referee preset '" + std::string(name) + "'");
}

nlohmann::json to_json(const RefereeConfig& c) {
  return {{"reference_accuracy", c.reference_accuracy},
          {"reference_mean_time_ms", c.reference_mean_time.count()},
          {"test_set_ref", c.test_set_ref},
          {"expected_image_count", c.expected_image_count},
          {"run_limits", to_json(c.run_limits)},
          {"image_width", c.image_dims.width},
          {"image_height", c.image_dims.height},
          {"ground_truth_dir", c.ground_truth_dir.string()},
          {"max_retries", c.max_retries},
          {"timing_slack", c.timing_slack}};
}

RefereeConfig referee_config_from_json(const nlohmann::json& j,
                                       RefereeConfig base) {
  try {
    RefereeConfig c = j.contains("preset")
                          ? RefereeConfig::preset(j.at("preset").get<std::string>())
                          : std::move(base);
    c.reference_accuracy = j.value("reference_accuracy", c.reference_accuracy);
    if (j.contains("reference_mean_time_ms")) {
      c.reference_mean_time =
          Milliseconds(j.at("reference_mean_time_ms").get<double>());
    }
    c.test_set_ref = j.value("test_set_ref", c.test_set_ref);
    c.expected_image_count =
        j.value("expected_image_count", c.expected_image_count);
    c.image_dims.width = j.value("image_width", c.image_dims.width);
    c.image_dims.height = j.value("image_height", c.image_dims.height);
    if (j.contains("ground_truth_dir"))
      c.ground_truth_dir = j.at("ground_truth_dir").get<std::string>();
    c.max_retries = j.value("max_retries", c.max_retries);
    c.timing_slack = j.value("timing_slack", c.timing_slack);

    nlohmann::json limits = j.value("run_limits", nlohmann::json::object());
    if (!limits.contains("wall_clock_timeout_ms")) {
      limits["wall_clock_timeout_ms"] =
          default_timeout(c.reference_mean_time, c.expected_image_count)
              .count();
    }
    if (!limits.contains("max_output_bytes"))
      limits["max_output_bytes"] = c.run_limits.max_output_bytes;
    if (!limits.contains("max_stdout_bytes"))
      limits["max_stdout_bytes"] = c.run_limits.max_stdout_bytes;
    c.run_limits = run_limits_from_json(limits);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("referee config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string("referee config: ") + e.what());
  }
}

Qualification qualify(double accuracy, Milliseconds mean_time,
                      const RefereeConfig& config) {
  if (accuracy < config.reference_accuracy)
    return Qualification::kDisqualifiedBelowReferenceAccuracy;
  if (mean_time > config.reference_mean_time)
    return Qualification::kDisqualifiedAboveReferenceTime;
  return Qualification::kQualified;
}

Referee::Referee(RefereeConfig config, RecordStore& store, WorkerClient& worker)
    : config_(std::move(config)), store_(store), worker_(worker) {
  config_.validate();
  if (config_.ground_truth_dir.empty()) {
    throw Error(ErrorCode::kConfig, "referee config: ground_truth_dir not set");
  }
  ground_truth_names_ = png_names(config_.ground_truth_dir);
  if (ground_truth_names_.size() != config_.expected_image_count) {
    throw Error(ErrorCode::kConfig,
                "ground truth has " + std::to_string(ground_truth_names_.size()) +
                    " maps, expected " +
                    std::to_string(config_.expected_image_count));
  }

  for (const Submission& s : store_.submissions()) {
    if (store_.has_record(s.id)) {
      const auto terminal = store_.load_record(s.id).terminal_status();
      if (s.status != terminal) store_.set_status(s.id, terminal);
      continue;
    }
    if (s.status == SubmissionStatus::kRunning) {
      store_.set_status(s.id, SubmissionStatus::kQueued);
    } else if (s.status != SubmissionStatus::kQueued) {
      continue;
    }
    queue_.push_back(s.id);
  }
}

std::size_t Referee::enqueue(Submission submission) {
  if (!store_.has_blob(submission.archive_ref)) {
    throw Error(ErrorCode::kStorageFailure,
                "archive " + submission.archive_ref + " is not in the store");
  }
  submission.status = SubmissionStatus::kQueued;
  std::size_t position;
  {
    // Holding the lock across the append keeps log order == queue order.
    std::lock_guard lock(mu_);
    store_.add_submission(submission);
    queue_.push_back(submission.id);
    position = queue_.size() - 1;
  }
  cv_.notify_all();
  return position;
}

std::pair<std::string, std::size_t> Referee::submit(
    const std::string& team, ByteView archive, std::optional<std::string> id) {
  Submission s;
  s.id = id ? *id : new_submission_id();
  s.team = team;
  s.submitted_at = now_utc();
  s.archive_ref = store_.put_blob(archive);
  const std::size_t pos = enqueue(s);
  return {s.id, pos};
}

std::optional<std::size_t> Referee::queue_position(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = std::find(queue_.begin(), queue_.end(), id);
  if (it == queue_.end()) return std::nullopt;
  return std::size_t(it - queue_.begin());
}

std::size_t Referee::queue_size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

bool Referee::wait_for_work(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); });
}

void Referee::notify_all() { cv_.notify_all(); }

std::optional<SubmissionView> Referee::view(const std::string& id) const {
  auto s = store_.submission(id);
  if (!s) return std::nullopt;
  SubmissionView v{*s, std::nullopt, std::nullopt};
  if (store_.has_record(id)) {
    v.record = store_.load_record(id);
  } else if (s->status == SubmissionStatus::kQueued) {
    v.queue_position = queue_position(id);
  }
  return v;
}

EvaluationRecord Referee::evaluate_next() {
  std::string id;
  {
    std::lock_guard lock(mu_);
    if (queue_.empty()) throw Error(ErrorCode::kEmptyQueue, "queue is empty");
    id = queue_.front();
    queue_.pop_front();
  }
  const Submission s = *store_.submission(id);
  if (store_.has_record(id)) return store_.load_record(id);

  auto requeue = [&] {
    store_.set_status(id, SubmissionStatus::kQueued);
    std::lock_guard lock(mu_);
    queue_.push_front(id);
  };

  store_.set_status(id, SubmissionStatus::kRunning);
  WorkerResponse response;
  try {
    const Bytes archive = store_.get_blob(s.archive_ref);
    response = worker_.evaluate(archive, config_.test_set_ref,
                                config_.run_limits);
  } catch (const std::exception& e) {
    int attempts;
    {
      std::lock_guard lock(mu_);
      attempts = ++attempts_[id];
    }
    if (attempts <= config_.max_retries) {
      requeue();
      throw Error(ErrorCode::kWorkerUnreachable,
                  "attempt " + std::to_string(attempts) + " for " + id +
                      " failed: " + e.what());
    }
    EvaluationRecord r;
    r.submission_id = s.id;
    r.team = s.team;
    r.submitted_at = s.submitted_at;
    r.evaluated_at = now_utc();
    r.qualification = Qualification::kDisqualifiedRunFailure;
    r.infrastructure_failure = true;
    r.detail = "worker unavailable after " + std::to_string(attempts) +
               " attempts: " + e.what();
    return finish(s, std::move(r));
  }

  EvaluationRecord record;
  try {
    record = score_response(s, response);
  } catch (...) {
    // Referee-side problem (ground truth, storage); keep the submission.
    requeue();
    throw;
  }
  return finish(s, std::move(record));
}

EvaluationRecord Referee::finish(const Submission& s, EvaluationRecord record) {
  store_.persist_record(record);
  store_.set_status(s.id, record.terminal_status());
  std::lock_guard lock(mu_);
  attempts_.erase(s.id);
  return record;
}

EvaluationRecord Referee::score_response(const Submission& s,
                                         const WorkerResponse& response) {
  EvaluationRecord r;
  r.submission_id = s.id;
  r.team = s.team;
  r.submitted_at = s.submitted_at;
  r.evaluated_at = now_utc();
  auto disqualify = [&](Qualification q, std::string detail) {
    r.qualification = q;
    r.detail = std::move(detail);
    return r;
  };

  if (response.setup_error) {
    return disqualify(Qualification::kDisqualifiedRunFailure,
                      std::string(error_code_name(*response.setup_error)) +
                          ": " + response.setup_detail);
  }
  const RunResult& run = response.run;
  if (run.timed_out) {
    return disqualify(Qualification::kDisqualifiedRunFailure,
                      "timed out after " + format_ms(run.wall_clock));
  }
  if (run.exit_status != 0) {
    std::string detail = "exited with status " + std::to_string(run.exit_status);
    const std::string tail = last_line(run.stderr_tail);
    if (!tail.empty()) detail += ": " + tail;
    return disqualify(Qualification::kDisqualifiedRunFailure, detail);
  }
  if (response.collection.wrong_count()) {
    return disqualify(Qualification::kDisqualifiedWrongOutputCount,
                      response.collection.describe());
  }
  if (!response.collection.failures.empty()) {
    return disqualify(Qualification::kDisqualifiedMalformedOutput,
                      response.collection.describe());
  }
  if (run.output_limit_exceeded) {
    return disqualify(Qualification::kDisqualifiedMalformedOutput,
                      "output directory exceeds " +
                          std::to_string(config_.run_limits.max_output_bytes) +
                          " bytes");
  }
  if (run.sentinel_error) {
    return disqualify(Qualification::kDisqualifiedMalformedOutput,
                      *run.sentinel_error);
  }
  if (!run.reported_total_inference) {
    return disqualify(Qualification::kDisqualifiedMalformedOutput,
                      "no " + std::string(kSentinelPrefix) + " line on stdout");
  }

  std::optional<ZipReader> zip;
  try {
    zip.emplace(response.outputs_zip);
  } catch (const Error& e) {
    return disqualify(Qualification::kDisqualifiedMalformedOutput, e.what());
  }
  CollectReport names;
  std::set<std::string> shipped;
  for (const auto& e : zip->entries()) shipped.insert(e.name);
  const std::set<std::string> wanted(ground_truth_names_.begin(),
                                     ground_truth_names_.end());
  for (const auto& n : ground_truth_names_)
    if (!shipped.count(n)) names.missing.push_back(n);
  for (const auto& n : shipped)
    if (!wanted.count(n)) names.extra.push_back(n);
  if (names.wrong_count()) {
    return disqualify(Qualification::kDisqualifiedWrongOutputCount,
                      names.describe());
  }

  std::vector<NamedImageScore> per_image;
  per_image.reserve(ground_truth_names_.size());
  for (const auto& name : ground_truth_names_) {
    std::optional<LabelMap> pred;
    try {
      pred.emplace(decode_label_map(zip->extract(*zip->find(name))));
      validate_dimensions(*pred, config_.image_dims).require();
    } catch (const Error& e) {
      return disqualify(Qualification::kDisqualifiedMalformedOutput,
                        name + ": " + e.what());
    }
    const LabelMap gt =
        decode_label_map(read_file(config_.ground_truth_dir / name));
    per_image.push_back({name, image_mdsc(*pred, gt)});
  }

  const Milliseconds total = *run.reported_total_inference;
  DatasetScore ds;
  ds.image_count = config_.expected_image_count;
  std::vector<double> values;
  values.reserve(per_image.size());
  for (const auto& p : per_image) values.push_back(p.score.mdsc);
  ds.accuracy = dataset_accuracy(std::span<const double>(values));
  ds.mean_inference_time = mean_inference_time(total, ds.image_count);
  if (!(ds.mean_inference_time.count() > 0)) {
    return disqualify(Qualification::kDisqualifiedMalformedOutput,
                      "reported inference time is zero");
  }
  ds.score = score(ds.accuracy, ds.mean_inference_time);

  const std::string report = scoring_report(ds, per_image).dump();
  r.per_image_report_ref = store_.put_blob(ByteView(
      reinterpret_cast<const std::uint8_t*>(report.data()), report.size()));
  r.accuracy = ds.accuracy;
  r.mean_time = ds.mean_inference_time;
  r.score = ds.score;
  r.suspect_timing = total > run.wall_clock * (1.0 + config_.timing_slack);
  r.qualification = qualify(ds.accuracy, ds.mean_inference_time, config_);
  std::ostringstream detail;
  switch (r.qualification) {
    case Qualification::kDisqualifiedBelowReferenceAccuracy:
      detail << "accuracy " << ds.accuracy << " below reference "
             << config_.reference_accuracy;
      break;
    case Qualification::kDisqualifiedAboveReferenceTime:
      detail << "mean inference time " << ds.mean_inference_time.count()
             << " ms above reference " << config_.reference_mean_time.count()
             << " ms";
      break;
    default:
      break;
  }
  if (r.suspect_timing) {
    detail << (detail.tellp() > 0 ? "; " : "") << "reported "
           << total.count() << " ms exceeds measured wall clock "
           << run.wall_clock.count() << " ms";
  }
  r.detail = detail.str();
  return r;
}

DirectoryScore score_directories(const fs::path& pred_dir,
                                 const fs::path& gt_dir,
                                 Milliseconds total_time) {
  const std::vector<std::string> names = png_names(gt_dir);
  if (names.empty()) {
    throw Error(ErrorCode::kEmptyDataset,
                "no ground-truth maps in " + gt_dir.string());
  }
  std::set<std::string> present;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(pred_dir, ec))
    if (entry.is_regular_file()) present.insert(entry.path().filename().string());
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot list " + pred_dir.string() + ": " +
                                    ec.message());
  }
  for (const auto& n : names) {
    if (!present.count(n)) {
      throw Error(ErrorCode::kWrongOutputCount, "missing prediction: " + n);
    }
  }
  const std::set<std::string> wanted(names.begin(), names.end());
  for (const auto& n : present) {
    if (!wanted.count(n)) {
      throw Error(ErrorCode::kWrongOutputCount, "unexpected prediction: " + n);
    }
  }

  DirectoryScore out;
  out.per_image.reserve(names.size());
  std::vector<double> values;
  for (const auto& n : names) {
    auto decode = [&](const fs::path& p) {
      try {
        return decode_label_map(read_file(p));
      } catch (const Error& e) {
        throw Error(e.code(), p.string() + ": " + e.what());
      }
    };
    const LabelMap pred = decode(pred_dir / n);
    const LabelMap gt = decode(gt_dir / n);
    ImageScore s;
    try {
      s = image_mdsc(pred, gt);
    } catch (const Error& e) {
      throw Error(e.code(), n + ": " + e.what());
    }
    values.push_back(s.mdsc);
    out.per_image.push_back({n, s});
  }
  out.dataset.image_count = names.size();
  out.dataset.accuracy = dataset_accuracy(std::span<const double>(values));
  out.dataset.mean_inference_time = mean_inference_time(total_time, names.size());
  out.dataset.score = score(out.dataset.accuracy, out.dataset.mean_inference_time);
  return out;
}

}  // namespace lpref
