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

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "runner.hpp"
#include "wire.hpp"

namespace lpref {

// Outcome of EvaluateArchive. A setup error means the archive never ran
// (corrupt, no manifest, path escape, bad manifest, spawn failure).
struct WorkerResponse {
  std::optional<ErrorCode> setup_error;
  std::string setup_detail;
  RunResult run;
  CollectReport collection;
  // content_ref() of outputs_zip; empty when no outputs are shipped.
  std::string outputs_digest;
  // Stored zip of the prediction PNGs, only when the run succeeded and the
  // collection checks passed.
  Bytes outputs_zip;
};

// Orchestrator-side handle on a worker.
class WorkerClient {
 public:
  virtual ~WorkerClient() = default;
  // Throws Error(kWorkerUnreachable) when the request could not be
  // delivered or answered, Error(kProtocol) on a garbled exchange.
  virtual WorkerResponse evaluate(ByteView archive, const std::string& test_set,
                                  const RunLimits& limits) = 0;
};

struct WorkerConfig {
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path();
  Isolation isolation = Isolation::kLandlock;
  Dimensions image_dims{512, 512};
  // test-set id -> directory of input images.
  std::map<std::string, std::filesystem::path> test_sets;
  std::uint64_t max_archive_bytes = std::uint64_t(512) << 20;
  bool keep_scratch = false;
};

// Executes archives one at a time.
class Worker {
 public:
  explicit Worker(WorkerConfig config);

  // Throws Error(kInvalidArgument) for an unknown test set; every problem
  // with the submission itself is reported in the response.
  WorkerResponse evaluate(ByteView archive, const std::string& test_set,
                          const RunLimits& limits);

  const WorkerConfig& config() const { return config_; }

 private:
  WorkerConfig config_;
  std::mutex run_mu_;
};

class LocalWorkerClient : public WorkerClient {
 public:
  explicit LocalWorkerClient(Worker& worker) : worker_(worker) {}
  WorkerResponse evaluate(ByteView archive, const std::string& test_set,
                          const RunLimits& limits) override;

 private:
  Worker& worker_;
};

class RemoteWorkerClient : public WorkerClient {
 public:
  RemoteWorkerClient(std::string host, std::uint16_t port,
                     std::chrono::milliseconds connect_timeout =
                         std::chrono::seconds(5));
  WorkerResponse evaluate(ByteView archive, const std::string& test_set,
                          const RunLimits& limits) override;

 private:
  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds connect_timeout_;
};

// Serves EvaluateArchive over TCP, one connection at a time.
class WorkerServer {
 public:
  WorkerServer(Worker& worker, const std::string& host, std::uint16_t port);
  ~WorkerServer();

  std::uint16_t port() const { return port_; }
  // Runs the accept loop in a background thread.
  void start();
  // Blocks until stop() is called from another thread.
  void run();
  void stop();

 private:
  void serve_connection(Socket conn);

  Worker& worker_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

// Header/payload mapping shared by both ends; exposed for tests.
Frame encode_evaluate_request(ByteView archive, const std::string& test_set,
                              const RunLimits& limits);
Frame encode_worker_response(const WorkerResponse& response);
WorkerResponse decode_worker_response(const Frame& frame);

}  // namespace lpref
