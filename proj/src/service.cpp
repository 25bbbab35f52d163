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


#include "service.hpp"

#include <iostream>

#include <httplib.h>

#include "digest.hpp"
#include "leaderboard.hpp"
#include "zip_archive.hpp"

namespace lpref {

namespace fs = std::filesystem;

namespace {

constexpr const char* kJson = "application/json";
constexpr std::chrono::days kMaxTimelineDays{3660};

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const ApiError& e) {
  send_json(res, e.http_status, to_json(e));
}

void send_error(httplib::Response& res, const Error& e) {
  send_error(res, {http_status_for(e.code()), std::string(error_code_name(e.code())),
                   e.what()});
}

std::string generic_code(int status) {
  switch (status) {
    case 400: return "BadRequest";
    case 401: return "UnknownToken";
    case 404: return "NotFound";
    case 405: return "MethodNotAllowed";
    case 413: return "ArchiveTooLarge";
    case 429: return "CooldownActive";
    default: return status >= 500 ? "Internal" : "HttpError";
  }
}

std::optional<std::string> bearer_token(const httplib::Request& req) {
  const std::string h = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (h.size() <= kPrefix.size() || h.compare(0, kPrefix.size(), kPrefix) != 0)
    return std::nullopt;
  return h.substr(kPrefix.size());
}

// Same team + same key always maps to the same submission id.
std::string idempotent_id(const std::string& team, const std::string& key) {
  const std::string material = team + '\n' + key;
  return sha256_hex(ByteView(reinterpret_cast<const std::uint8_t*>(material.data()),
                             material.size()))
      .substr(0, 32);
}

nlohmann::json submission_json(const SubmissionView& v) {
  nlohmann::json j = {{"id", v.submission.id},
                      {"team", v.submission.team},
                      {"submitted_at", format_timestamp(v.submission.submitted_at)},
                      {"status", to_string(v.submission.status)}};
  if (v.queue_position) j["queue_position"] = *v.queue_position;
  if (v.record) j["record"] = to_json(*v.record);
  return j;
}

}  // namespace

nlohmann::json to_json(const ApiError& e) {
  return {{"http_status", e.http_status}, {"code", e.code}, {"detail", e.detail}};
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSubmission: return 404;
    case ErrorCode::kDuplicateSubmissionId: return 409;
    case ErrorCode::kStorageFailure:
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
    case ErrorCode::kConfig: return 500;
    case ErrorCode::kWorkerUnreachable: return 503;
    default: return 400;
  }
}

FailoverWorkerClient::FailoverWorkerClient(std::vector<WorkerEndpoint> endpoints) {
  if (endpoints.empty()) {
    throw Error(ErrorCode::kConfig, "no worker endpoints configured");
  }
  for (auto& e : endpoints)
    clients_.push_back(std::make_unique<RemoteWorkerClient>(e.host, e.port));
}

WorkerResponse FailoverWorkerClient::evaluate(ByteView archive,
                                              const std::string& test_set,
                                              const RunLimits& limits) {
  std::string failures;
  for (auto& c : clients_) {
    try {
      return c->evaluate(archive, test_set, limits);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kWorkerUnreachable) throw;
      if (!failures.empty()) failures += "; ";
      failures += e.what();
    }
  }
  throw Error(ErrorCode::kWorkerUnreachable, failures);
}

Service::Service(Config config) : config_(std::move(config)) {
  store_ = std::make_unique<RecordStore>(config_.store_dir);
  if (config_.workers.empty()) {
    local_worker_ = std::make_unique<Worker>(config_.worker_config());
    worker_client_ = std::make_unique<LocalWorkerClient>(*local_worker_);
  } else {
    worker_client_ = std::make_unique<FailoverWorkerClient>(config_.workers);
  }
  referee_ = std::make_unique<Referee>(config_.referee, *store_, *worker_client_);
  for (const auto& s : store_->submissions()) {
    auto& last = last_submission_[s.team];
    last = std::max(last, s.submitted_at);
  }
  http_ = std::make_unique<httplib::Server>();
  install_routes();
}

Service::~Service() { stop(); }

void Service::install_routes() {
  auto& srv = *http_;
  // Multipart framing needs a little room above the archive cap.
  srv.set_payload_max_length(config_.http.max_archive_bytes + (1u << 20));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    send_error(res, {res.status, generic_code(res.status),
                     httplib::status_message(res.status)});
    return httplib::Server::HandlerResponse::Handled;
  });
  srv.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const Error& e) {
          send_error(res, e);
        } catch (const std::exception& e) {
          send_error(res, {500, "Internal", e.what()});
        }
      });

  srv.Post("/api/v1/submissions", [this](const httplib::Request& req,
                                          httplib::Response& res) {
    const auto token = bearer_token(req);
    const auto team_it = token ? config_.teams.find(*token) : config_.teams.end();
    if (team_it == config_.teams.end()) {
      return send_error(res, {401, "UnknownToken", "unknown team token"});
    }
    const std::string& team = team_it->second;

    const std::string* body = nullptr;
    if (req.is_multipart_form_data()) {
      if (req.has_file("archive")) {
        const auto it = req.files.find("archive");
        body = &it->second.content;
      }
    } else if (!req.body.empty()) {
      body = &req.body;
    }
    if (!body) {
      return send_error(res, {400, "MissingArchive",
                              "expected a multipart field named 'archive'"});
    }
    if (body->size() > config_.http.max_archive_bytes) {
      return send_error(res, {413, "ArchiveTooLarge",
                              "archive is " + std::to_string(body->size()) +
                                  " bytes; the limit is " +
                                  std::to_string(config_.http.max_archive_bytes)});
    }
    const ByteView archive(reinterpret_cast<const std::uint8_t*>(body->data()),
                           body->size());
    try {
      ZipReader check(archive);
    } catch (const Error& e) {
      return send_error(res, {400, "CorruptArchive", e.what()});
    }

    std::optional<std::string> id;
    const std::string key = req.get_header_value("Idempotency-Key");
    if (!key.empty()) {
      id = idempotent_id(team, key);
      if (auto v = referee_->view(*id)) {
        return send_json(res, 202, {{"id", *id},
                                    {"queue_position", v->queue_position
                                                           ? nlohmann::json(*v->queue_position)
                                                           : nlohmann::json()},
                                    {"status", to_string(v->submission.status)}});
      }
    }

    std::optional<Timestamp> previous;
    {
      std::lock_guard lock(cooldown_mu_);
      const auto now = now_utc();
      const auto it = last_submission_.find(team);
      if (it != last_submission_.end() &&
          now < it->second + config_.http.submission_cooldown) {
        const auto wait = std::chrono::ceil<std::chrono::seconds>(
            it->second + config_.http.submission_cooldown - now);
        res.set_header("Retry-After", std::to_string(wait.count()));
        return send_error(res, {429, "CooldownActive",
                                "next submission allowed in " +
                                    std::to_string(wait.count()) + " s"});
      }
      previous = it != last_submission_.end() ? std::optional(it->second)
                                              : std::nullopt;
      last_submission_[team] = now;
    }
    // A submission that never made it into the queue does not start a
    // cooldown.
    auto release_cooldown = [&] {
      std::lock_guard lock(cooldown_mu_);
      if (previous) {
        last_submission_[team] = *previous;
      } else {
        last_submission_.erase(team);
      }
    };

    try {
      const auto [sid, pos] = referee_->submit(team, archive, id);
      send_json(res, 202, {{"id", sid},
                           {"queue_position", pos},
                           {"status", to_string(SubmissionStatus::kQueued)}});
    } catch (const Error& e) {
      release_cooldown();
      if (e.code() == ErrorCode::kDuplicateSubmissionId && id) {
        // Lost a race with a retry carrying the same key.
        const auto v = referee_->view(*id);
        return send_json(res, 202, {{"id", *id},
                                    {"queue_position", v && v->queue_position
                                                           ? nlohmann::json(*v->queue_position)
                                                           : nlohmann::json()},
                                    {"status", v ? to_string(v->submission.status)
                                                 : to_string(SubmissionStatus::kQueued)}});
      }
      throw;
    }
  });

  srv.Get(R"(/api/v1/submissions/([^/]+))", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto v = referee_->view(id);
    if (!v) {
      return send_error(res, {404, "UnknownSubmission",
                              "no submission with id '" + id + "'"});
    }
    send_json(res, 200, submission_json(*v));
  });

  srv.Get("/api/v1/leaderboard", [this](const httplib::Request& req,
                                         httplib::Response& res) {
    std::optional<Track> only;
    if (req.has_param("track") && !req.get_param_value("track").empty()) {
      try {
        only = track_from_string(req.get_param_value("track"));
      } catch (const Error& e) {
        return send_error(res, e);
      }
    }
    const auto records = store_->load_records();
    nlohmann::json snap = leaderboard_snapshot(records, now_utc(), only);
    const auto& rc = referee_->config();
    snap["reference"] = {
        {"accuracy", rc.reference_accuracy},
        {"mean_time_ms", rc.reference_mean_time.count()},
        {"score", score(rc.reference_accuracy, rc.reference_mean_time)}};
    send_json(res, 200, snap);
  });

  srv.Get("/api/v1/timeline", [this](const httplib::Request& req,
                                      httplib::Response& res) {
    const auto records = store_->load_records();
    const Day today = day_of(now_utc());
    Day from = today, to = today;
    for (const auto& r : records) from = std::min(from, day_of(r.submitted_at));
    try {
      if (req.has_param("from")) from = parse_day(req.get_param_value("from"));
      if (req.has_param("to")) to = parse_day(req.get_param_value("to"));
      if (to - from > kMaxTimelineDays) {
        return send_error(res, {400, "InvalidRange",
                                "timeline spans more than " +
                                    std::to_string(kMaxTimelineDays.count()) +
                                    " days"});
      }
      const auto series = daily_series(records, from, to);
      res.status = 200;
      res.set_content(daily_series_csv(series), "text/csv");
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  if (!config_.http.static_dir.empty() && fs::is_directory(config_.http.static_dir)) {
    srv.set_mount_point("/", config_.http.static_dir.string());
  }
}

void Service::start() {
  if (config_.http.port == 0) {
    const int p = http_->bind_to_any_port(config_.http.host);
    if (p <= 0) throw Error(ErrorCode::kIo, "cannot bind " + config_.http.host);
    port_ = std::uint16_t(p);
  } else {
    if (!http_->bind_to_port(config_.http.host, config_.http.port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + config_.http.host + ":" +
                                      std::to_string(config_.http.port));
    }
    port_ = config_.http.port;
  }
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  dispatch_thread_ = std::thread([this] { dispatch_loop(); });
  http_->wait_until_ready();
}

void Service::dispatch_loop() {
  auto backoff = std::chrono::milliseconds(500);
  while (!stopping_) {
    if (paused_ || !referee_->wait_for_work(std::chrono::milliseconds(200))) {
      if (paused_) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      continue;
    }
    try {
      referee_->evaluate_next();
      backoff = std::chrono::milliseconds(500);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kEmptyQueue) continue;
      std::cerr << "lpref: " << e.what() << "\n";
      std::unique_lock lock(stop_mu_);
      stop_cv_.wait_for(lock, backoff, [&] { return stopping_.load(); });
      backoff = std::min(backoff * 2, std::chrono::milliseconds(30'000));
    } catch (const std::exception& e) {
      std::cerr << "lpref: " << e.what() << "\n";
      std::unique_lock lock(stop_mu_);
      stop_cv_.wait_for(lock, backoff, [&] { return stopping_.load(); });
    }
  }
}

void Service::wait() {
  std::unique_lock lock(stop_mu_);
  stop_cv_.wait(lock, [&] { return stopped_; });
}

void Service::stop() {
  {
    std::lock_guard lock(stop_mu_);
    if (stopping_.exchange(true)) return;
  }
  referee_->notify_all();
  stop_cv_.notify_all();
  if (http_) http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (dispatch_thread_.joinable()) dispatch_thread_.join();
  {
    std::lock_guard lock(stop_mu_);
    stopped_ = true;
  }
  stop_cv_.notify_all();
}

}  // namespace lpref
