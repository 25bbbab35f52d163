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

#include "worker.hpp"

#include <poll.h>
#include <sys/socket.h>

#include <iostream>

#include "digest.hpp"
#include "fsutil.hpp"
#include "zip_archive.hpp"

namespace lpref {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kEvaluateOp = "EvaluateArchive";

bool is_setup_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCorruptArchive:
    case ErrorCode::kMissingManifest:
    case ErrorCode::kPathEscape:
    case ErrorCode::kManifestInvalid:
    case ErrorCode::kSpawnFailure:
      return true;
    default:
      return false;
  }
}

Frame error_frame(ErrorCode code, const std::string& detail) {
  Frame f;
  f.header = {{"ok", false},
              {"error", {{"code", error_code_name(code)}, {"detail", detail}}}};
  return f;
}

}  // namespace

Worker::Worker(WorkerConfig config) : config_(std::move(config)) {}

WorkerResponse Worker::evaluate(ByteView archive, const std::string& test_set,
                                const RunLimits& limits) {
  const auto it = config_.test_sets.find(test_set);
  if (it == config_.test_sets.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "worker has no test set '" + test_set + "'");
  }
  limits.validate();
  const fs::path input_dir = it->second;
  const std::vector<std::string> expected = expected_output_names(input_dir);

  // One solution at a time keeps timings comparable.
  std::lock_guard lock(run_mu_);
  WorkerResponse response;
  if (archive.size() > config_.max_archive_bytes) {
    response.setup_error = ErrorCode::kCorruptArchive;
    response.setup_detail = "archive exceeds " +
                            std::to_string(config_.max_archive_bytes) + " bytes";
    return response;
  }

  const fs::path job = make_unique_dir(config_.scratch_dir, "lpref-job");
  struct Cleanup {
    const fs::path& dir;
    bool keep;
    ~Cleanup() {
      if (!keep) remove_tree_quietly(dir);
    }
  } cleanup{job, config_.keep_scratch};

  const fs::path output_dir = job / "output";
  fs::create_directories(output_dir);
  try {
    const SolutionManifest manifest = unpack_archive(archive, job / "solution");
    response.run = execute_solution(manifest, input_dir, output_dir, limits,
                                    config_.isolation);
  } catch (const Error& e) {
    if (!is_setup_error(e.code())) throw;
    response.setup_error = e.code();
    response.setup_detail = e.what();
    return response;
  }
  if (!response.run.succeeded()) return response;

  response.collection =
      check_outputs(output_dir, expected, config_.image_dims);
  if (response.collection.ok() && !response.run.output_limit_exceeded) {
    ZipWriter zip;
    for (const auto& name : expected) {
      zip.add(name, read_file(output_dir / name), /*deflate=*/false);
    }
    response.outputs_zip = zip.finish();
    response.outputs_digest = content_ref(response.outputs_zip);
  }
  return response;
}

WorkerResponse LocalWorkerClient::evaluate(ByteView archive,
                                           const std::string& test_set,
                                           const RunLimits& limits) {
  return worker_.evaluate(archive, test_set, limits);
}

Frame encode_evaluate_request(ByteView archive, const std::string& test_set,
                              const RunLimits& limits) {
  Frame f;
  f.header = {{"op", kEvaluateOp},
              {"test_set", test_set},
              {"limits", to_json(limits)}};
  f.payload.assign(archive.begin(), archive.end());
  return f;
}

Frame encode_worker_response(const WorkerResponse& r) {
  if (r.setup_error) return error_frame(*r.setup_error, r.setup_detail);
  Frame f;
  f.header = {{"ok", true},
              {"run_result", to_json(r.run)},
              {"collection", to_json(r.collection)},
              {"outputs_digest", r.outputs_digest}};
  f.payload = r.outputs_zip;
  return f;
}

WorkerResponse decode_worker_response(const Frame& frame) {
  WorkerResponse r;
  try {
    const auto& h = frame.header;
    if (!h.at("ok").get<bool>()) {
      const ErrorCode code =
          error_code_from_name(h.at("error").at("code").get<std::string>());
      const std::string detail = h.at("error").at("detail").get<std::string>();
      if (!is_setup_error(code)) {
        throw Error(ErrorCode::kProtocol, "worker error: " + detail);
      }
      r.setup_error = code;
      r.setup_detail = detail;
      return r;
    }
    r.run = run_result_from_json(h.at("run_result"));
    r.collection = collect_report_from_json(h.at("collection"));
    r.outputs_digest = h.at("outputs_digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol,
                std::string("malformed worker response: ") + e.what());
  }
  r.outputs_zip = frame.payload;
  if (!r.outputs_zip.empty() &&
      content_ref(r.outputs_zip) != r.outputs_digest) {
    throw Error(ErrorCode::kProtocol, "outputs digest mismatch");
  }
  return r;
}

RemoteWorkerClient::RemoteWorkerClient(std::string host, std::uint16_t port,
                                       std::chrono::milliseconds connect_timeout)
    : host_(std::move(host)), port_(port), connect_timeout_(connect_timeout) {}

WorkerResponse RemoteWorkerClient::evaluate(ByteView archive,
                                            const std::string& test_set,
                                            const RunLimits& limits) {
  Socket s = connect_tcp(host_, port_, connect_timeout_);
  // The worker answers only after the run, so allow the full wall-clock
  // limit plus unpack/collect time.
  s.set_receive_timeout(limits.wall_clock_timeout + std::chrono::minutes(5));
  Frame reply;
  try {
    write_frame(s.fd(), encode_evaluate_request(archive, test_set, limits));
    reply = read_frame(s.fd());
  } catch (const Error& e) {
    throw Error(ErrorCode::kWorkerUnreachable,
                "worker " + host_ + ":" + std::to_string(port_) +
                    " lost: " + e.what());
  }
  return decode_worker_response(reply);
}

WorkerServer::WorkerServer(Worker& worker, const std::string& host,
                           std::uint16_t port)
    : worker_(worker), listener_(listen_tcp(host, port)) {
  port_ = local_port(listener_);
}

WorkerServer::~WorkerServer() { stop(); }

void WorkerServer::start() {
  thread_ = std::thread([this] { run(); });
}

void WorkerServer::run() {
  while (!stopping_) {
    pollfd pfd{listener_.fd(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    if (rc <= 0) continue;
    Socket conn(::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!conn.valid()) continue;
    serve_connection(std::move(conn));
  }
}

void WorkerServer::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
}

void WorkerServer::serve_connection(Socket conn) {
  conn.set_receive_timeout(std::chrono::seconds(60));
  Frame reply;
  try {
    const Frame request = read_frame(conn.fd());
    const auto& h = request.header;
    if (h.value("op", "") != kEvaluateOp) {
      reply = error_frame(ErrorCode::kProtocol,
                          "unknown op '" + h.value("op", "") + "'");
    } else {
      const RunLimits limits =
          h.contains("limits") ? run_limits_from_json(h.at("limits"))
                               : RunLimits{};
      reply = encode_worker_response(worker_.evaluate(
          request.payload, h.at("test_set").get<std::string>(), limits));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kWorkerUnreachable) return;  // peer went away
    reply = error_frame(e.code(), e.what());
  } catch (const std::exception& e) {
    reply = error_frame(ErrorCode::kInternal, e.what());
  }
  try {
    write_frame(conn.fd(), reply);
  } catch (const Error& e) {
    std::cerr << "lpref worker: reply failed: " << e.what() << "\n";
  }
}

}  // namespace lpref
