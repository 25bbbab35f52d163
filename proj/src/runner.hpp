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

// Device-side execution of one submission: unpack, run against the test
// images, read back the self-reported inference time and the prediction
// maps.
//
// Invocation contract for a solution:
//
//   <entry_command...> <input_dir> <output_dir>
//
// with one `<base name>.png` written to output_dir per input image, and a
// stdout line `LPCV_TOTAL_INFERENCE_TIME_MS: <decimal>` carrying the summed
// model inference time. The last such line wins.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "labelmap.hpp"
#include "metrics.hpp"

namespace lpref {

namespace fs = std::filesystem;

inline constexpr std::string_view kSentinelPrefix =
    "LPCV_TOTAL_INFERENCE_TIME_MS:";
inline constexpr std::string_view kManifestName = "manifest.json";

struct SolutionManifest {
  std::vector<std::string> entry_command;
  std::string name;
  std::string declared_runtime;
  // Directory the archive was unpacked into. Also the solution's scratch
  // and working directory.
  fs::path root;
};

// Parses manifest.json content and checks the entry executable against
// `root`. Throws kManifestInvalid or kPathEscape.
SolutionManifest parse_manifest(std::string_view json_text,
                                const fs::path& root);

struct RunLimits {
  std::chrono::milliseconds wall_clock_timeout{129720};
  std::uint64_t max_output_bytes = std::uint64_t(1) << 30;
  std::uint64_t max_stdout_bytes = std::uint64_t(1) << 20;

  // Throws kInvalidArgument unless all fields are positive.
  void validate() const;
};

nlohmann::json to_json(const RunLimits& limits);
RunLimits run_limits_from_json(const nlohmann::json& j);

struct RunResult {
  int exit_status = 0;
  bool timed_out = false;
  Milliseconds wall_clock{0};
  std::optional<Milliseconds> reported_total_inference;
  // Set when the sentinel line was present but unusable.
  std::optional<std::string> sentinel_error;
  std::string stdout_tail;
  std::string stderr_tail;
  std::vector<std::string> produced_files;
  bool output_limit_exceeded = false;

  bool succeeded() const { return exit_status == 0 && !timed_out; }
};

nlohmann::json to_json(const RunResult& r);
RunResult run_result_from_json(const nlohmann::json& j);

enum class Isolation {
  kNone,
  // Landlock: writes confined to the output directory and the scratch
  // directory (plus /dev/null).
  kLandlock,
};

Isolation isolation_from_string(std::string_view s);
bool landlock_supported();

// Extracts `archive` under `dest` (created if missing) and parses its
// manifest. Throws kCorruptArchive, kMissingManifest, kPathEscape or
// kManifestInvalid; nothing is written when an entry would escape.
SolutionManifest unpack_archive(
    ByteView archive, const fs::path& dest,
    std::uint64_t max_unpacked_bytes = std::uint64_t(4) << 30);

// Runs the solution to completion or until the wall-clock limit. Throws
// Error(kSpawnFailure) only when the process could not be started; a
// timeout or crash is reported through the result.
RunResult execute_solution(const SolutionManifest& manifest,
                           const fs::path& input_dir,
                           const fs::path& output_dir, const RunLimits& limits,
                           Isolation isolation = Isolation::kLandlock);

// Returns the value of the last sentinel line, or nullopt when there is
// none. Throws Error(kMalformedSentinel) when the last line carrying the
// prefix has an unparsable or negative value.
std::optional<Milliseconds> parse_reported_time(std::string_view stdout_text);

struct FileFailure {
  std::string name;
  std::string detail;
};

struct CollectReport {
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::vector<FileFailure> failures;

  bool wrong_count() const { return !missing.empty() || !extra.empty(); }
  bool ok() const { return !wrong_count() && failures.empty(); }
  // One-line summary, used as disqualification detail.
  std::string describe() const;
};

nlohmann::json to_json(const CollectReport& r);
CollectReport collect_report_from_json(const nlohmann::json& j);

struct CollectedOutputs {
  CollectReport report;
  // In expected_names order; empty unless report.ok().
  std::vector<LabelMap> maps;
};

CollectedOutputs collect_outputs(const fs::path& output_dir,
                                 const std::vector<std::string>& expected_names,
                                 Dimensions expected);

// Same checks as collect_outputs, but hands each decoded map to `visit`
// instead of retaining it. `visit` runs in expected_names order and only
// for files that decoded with the right dimensions.
CollectReport check_outputs(
    const fs::path& output_dir, const std::vector<std::string>& expected_names,
    Dimensions expected,
    const std::function<void(std::size_t, const std::string&, LabelMap&&)>&
        visit = {});

// Output names expected for the images in `input_dir`: each regular file's
// stem plus ".png", sorted.
std::vector<std::string> expected_output_names(const fs::path& input_dir);

}  // namespace lpref
