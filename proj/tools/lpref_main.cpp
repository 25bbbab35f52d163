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


// lpref command-line front end. Links only the public C API.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <pthread.h>

#include <CLI11.hpp>

#include "lpref/lpref.h"

namespace {

int report(lpref_status status) {
  std::cerr << "lpref: " << lpref_status_name(status) << ": "
            << lpref_last_error() << "\n";
  return status == LPREF_OK ? 0 : (status == LPREF_E_INTERNAL ? 2 : 1);
}

// Blocks SIGINT/SIGTERM in every thread so the caller can sigwait for them.
sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

lpref_config* load(const std::string& path, lpref_status* status) {
  lpref_config* config = nullptr;
  *status = lpref_config_load(path.empty() ? nullptr : path.c_str(), &config);
  return config;
}

int run_serve(const std::string& config_path) {
  const sigset_t set = block_stop_signals();
  lpref_status st;
  lpref_config* config = load(config_path, &st);
  if (st != LPREF_OK) return report(st);
  lpref_service* service = nullptr;
  st = lpref_service_start(config, &service);
  lpref_config_free(config);
  if (st != LPREF_OK) return report(st);
  std::cout << "lpref: serving on port " << lpref_service_port(service) << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  lpref_service_stop(service);
  lpref_service_free(service);
  return 0;
}

int run_worker(const std::string& config_path) {
  const sigset_t set = block_stop_signals();
  lpref_status st;
  lpref_config* config = load(config_path, &st);
  if (st != LPREF_OK) return report(st);
  lpref_worker* worker = nullptr;
  st = lpref_worker_start(config, &worker);
  lpref_config_free(config);
  if (st != LPREF_OK) return report(st);
  std::cout << "lpref: worker listening on port " << lpref_worker_port(worker)
            << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  lpref_worker_stop(worker);
  lpref_worker_free(worker);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpref: referee for accuracy-versus-latency segmentation contests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lpref_version()));

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config_path,
                    "Config file (default: $LPREF_CONFIG)");
  auto* worker = app.add_subcommand("worker", "Run an evaluation worker");
  worker->add_option("--config", config_path,
                     "Config file (default: $LPREF_CONFIG)");

  std::string pred_dir, gt_dir, out_path;
  double total_ms = 0;
  auto* score = app.add_subcommand("score", "Score a prediction directory offline");
  score->add_option("--config", config_path, "Accepted for symmetry; unused");
  score->add_option("--pred", pred_dir, "Prediction PNG directory")
      ->required()->check(CLI::ExistingDirectory);
  score->add_option("--gt", gt_dir, "Ground-truth PNG directory")
      ->required()->check(CLI::ExistingDirectory);
  score->add_option("--total-time-ms", total_ms,
                    "Cumulative inference time reported by the solution")
      ->required();
  score->add_option("--out", out_path, "Write the JSON scoring report here");

  std::uint64_t seed = 1;
  std::size_t count = 600;
  std::uint32_t width = 512, height = 512;
  std::string fixtures_out;
  auto* gen = app.add_subcommand("gen-fixtures", "Generate a synthetic test set");
  gen->add_option("--config", config_path, "Accepted for symmetry; unused");
  gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
  gen->add_option("--count", count, "Number of images")->capture_default_str();
  gen->add_option("--width", width, "Image width")->capture_default_str();
  gen->add_option("--height", height, "Image height")->capture_default_str();
  gen->add_option("--out", fixtures_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (serve->parsed()) return run_serve(config_path);
  if (worker->parsed()) return run_worker(config_path);

  if (score->parsed()) {
    lpref_dataset_score result{};
    const lpref_status st = lpref_score_directories(
        pred_dir.c_str(), gt_dir.c_str(), total_ms,
        out_path.empty() ? nullptr : out_path.c_str(), &result);
    if (st != LPREF_OK) return report(st);
    std::printf("accuracy %.6f\nmean_time_ms %.6f\nscore %.6f\n", result.accuracy,
                result.mean_time_ms, result.score);
    return 0;
  }

  if (gen->parsed()) {
    const lpref_status st =
        lpref_generate_fixtures(seed, count, width, height, fixtures_out.c_str());
    if (st != LPREF_OK) return report(st);
    std::printf("wrote %zu fixtures to %s\n", count, fixtures_out.c_str());
    return 0;
  }
  return 0;
}
