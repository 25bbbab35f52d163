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


// HTTP front end: submission intake, status, leaderboard and timeline, plus
// the dispatcher thread that drains the referee queue.

#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "record_store.hpp"
#include "referee.hpp"
#include "worker.hpp"

namespace httplib {
class Server;
}

namespace lpref {

struct ApiError {
  int http_status = 500;
  std::string code;
  std::string detail;
};

nlohmann::json to_json(const ApiError& e);
// HTTP status used for each core error kind.
int http_status_for(ErrorCode code);

// Tries each endpoint in order; unreachable only when all of them are.
class FailoverWorkerClient : public WorkerClient {
 public:
  explicit FailoverWorkerClient(std::vector<WorkerEndpoint> endpoints);
  WorkerResponse evaluate(ByteView archive, const std::string& test_set,
                          const RunLimits& limits) override;

 private:
  std::vector<std::unique_ptr<RemoteWorkerClient>> clients_;
};

class Service {
 public:
  // Opens the store and recovers the queue. Nothing listens until start().
  explicit Service(Config config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the HTTP port and starts the server and dispatcher threads.
  // Throws Error(kIo) if the port cannot be bound.
  void start();
  std::uint16_t port() const { return port_; }
  // Blocks until stop().
  void wait();
  void stop();

  Referee& referee() { return *referee_; }
  RecordStore& store() { return *store_; }

  // Pauses evaluation without stopping intake (used by tests that inspect
  // queued submissions).
  void set_dispatch_paused(bool paused) { paused_ = paused; }

 private:
  void install_routes();
  void dispatch_loop();

  Config config_;
  std::unique_ptr<RecordStore> store_;
  std::unique_ptr<Worker> local_worker_;
  std::unique_ptr<WorkerClient> worker_client_;
  std::unique_ptr<Referee> referee_;
  std::unique_ptr<httplib::Server> http_;

  std::mutex cooldown_mu_;
  std::map<std::string, Timestamp> last_submission_;  // by team

  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> paused_{false};
  std::thread http_thread_;
  std::thread dispatch_thread_;
  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopped_ = false;
};

}  // namespace lpref
