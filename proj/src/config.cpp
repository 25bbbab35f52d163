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


#include "config.hpp"

#include <cstdlib>

#include "fsutil.hpp"

namespace lpref {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::uint16_t port_value(const nlohmann::json& j, const char* key,
                         std::uint16_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 0 || v > 65535) {
    throw Error(ErrorCode::kConfig, std::string(key) + " out of range");
  }
  return std::uint16_t(v);
}

}  // namespace

WorkerConfig Config::worker_config() const {
  WorkerConfig w;
  w.scratch_dir = worker.scratch_dir;
  w.isolation = worker.isolation;
  w.keep_scratch = worker.keep_scratch;
  w.image_dims = referee.image_dims;
  w.max_archive_bytes = http.max_archive_bytes;
  for (const auto& [id, paths] : test_sets) w.test_sets[id] = paths.images;
  return w;
}

Config config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  Config c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::kConfig, "config must be an object");
    if (j.contains("store_dir"))
      c.store_dir = resolve(base_dir, j.at("store_dir").get<std::string>());
    else
      c.store_dir = base_dir / c.store_dir;

    const auto http = j.value("http", nlohmann::json::object());
    c.http.host = http.value("host", c.http.host);
    c.http.port = port_value(http, "port", c.http.port);
    c.http.max_archive_bytes =
        http.value("max_archive_bytes", c.http.max_archive_bytes);
    c.http.submission_cooldown = std::chrono::seconds(
        http.value("submission_cooldown_s", c.http.submission_cooldown.count()));
    if (c.http.submission_cooldown.count() < 0)
      throw Error(ErrorCode::kConfig, "submission_cooldown_s is negative");
    if (http.contains("static_dir"))
      c.http.static_dir = resolve(base_dir, http.at("static_dir").get<std::string>());

    c.teams = j.value("teams", std::map<std::string, std::string>{});

    const auto test_sets = j.value("test_sets", nlohmann::json::object());
    for (const auto& [id, ts] : test_sets.items()) {
      c.test_sets[id] = {resolve(base_dir, ts.at("images").get<std::string>()),
                         resolve(base_dir, ts.at("ground_truth").get<std::string>())};
    }

    for (const auto& w : j.value("workers", nlohmann::json::array())) {
      c.workers.push_back({w.at("host").get<std::string>(),
                           port_value(w, "port", 0)});
    }

    const auto worker = j.value("worker", nlohmann::json::object());
    c.worker.host = worker.value("host", c.worker.host);
    c.worker.port = port_value(worker, "port", c.worker.port);
    if (worker.contains("scratch_dir"))
      c.worker.scratch_dir = resolve(base_dir, worker.at("scratch_dir").get<std::string>());
    if (worker.contains("isolation"))
      c.worker.isolation = isolation_from_string(worker.at("isolation").get<std::string>());
    c.worker.keep_scratch = worker.value("keep_scratch", c.worker.keep_scratch);

    nlohmann::json referee = j.value("referee", nlohmann::json::object());
    if (referee.contains("ground_truth_dir")) {
      referee["ground_truth_dir"] =
          resolve(base_dir, referee["ground_truth_dir"].get<std::string>()).string();
    } else {
      const std::string ref = referee.value("test_set_ref", std::string("default"));
      const auto it = c.test_sets.find(ref);
      if (it == c.test_sets.end()) {
        throw Error(ErrorCode::kConfig, "test set '" + ref + "' is not configured");
      }
      referee["ground_truth_dir"] = it->second.ground_truth.string();
    }
    c.referee = referee_config_from_json(referee);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  return c;
}

Config load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

fs::path resolve_config_path(const std::optional<fs::path>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return *explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return env;
  throw Error(ErrorCode::kConfig, std::string("no config given: pass --config "
                                              "or set ") + kConfigEnvVar);
}

}  // namespace lpref
