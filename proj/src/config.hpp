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


// Deployment configuration: one JSON file shared by the service and the
// worker. Relative paths are resolved against the file's directory.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "referee.hpp"
#include "worker.hpp"

namespace lpref {

inline constexpr const char* kConfigEnvVar = "LPREF_CONFIG";

struct HttpConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::uint64_t max_archive_bytes = std::uint64_t(512) << 20;
  std::chrono::seconds submission_cooldown{600};
  std::filesystem::path static_dir;  // empty: no static files
};

struct TestSetPaths {
  std::filesystem::path images;
  std::filesystem::path ground_truth;
};

struct WorkerEndpoint {
  std::string host;
  std::uint16_t port = 0;
};

struct WorkerServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 9090;
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path();
  Isolation isolation = Isolation::kLandlock;
  bool keep_scratch = false;
};

struct Config {
  std::filesystem::path store_dir = "lpref-store";
  HttpConfig http;
  // Bearer token -> team name.
  std::map<std::string, std::string> teams;
  RefereeConfig referee;
  std::map<std::string, TestSetPaths> test_sets;
  // Remote workers tried in order; empty runs solutions in-process.
  std::vector<WorkerEndpoint> workers;
  WorkerServerConfig worker;

  // Worker settings derived from this config (test-set images only).
  WorkerConfig worker_config() const;
};

// Throws Error(kConfig) on unknown enum values, wrong types or missing
// test sets.
Config config_from_json(const nlohmann::json& j,
                        const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

// `explicit_path` if given, else $LPREF_CONFIG. Throws Error(kConfig) when
// neither is set.
std::filesystem::path resolve_config_path(
    const std::optional<std::filesystem::path>& explicit_path);

}  // namespace lpref
