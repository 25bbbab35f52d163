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


#include "lpref/lpref.h"

#include <condition_variable>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "config.hpp"
#include "fixtures.hpp"
#include "fsutil.hpp"
#include "leaderboard.hpp"
#include "metrics.hpp"
#include "record_store.hpp"
#include "referee.hpp"
#include "runner.hpp"
#include "service.hpp"

struct lpref_buffer {
  lpref::Bytes bytes;
};

struct lpref_label_map {
  lpref::LabelMap map;
};

struct lpref_config {
  lpref::Config config;
};

struct lpref_service {
  std::unique_ptr<lpref::Service> service;
};

struct lpref_worker {
  std::unique_ptr<lpref::Worker> worker;
  std::unique_ptr<lpref::WorkerServer> server;
  std::mutex mu;
  std::condition_variable cv;
  bool stopped = false;
};

struct lpref_store {
  std::unique_ptr<lpref::RecordStore> store;
};

namespace {

thread_local std::string g_last_error;

lpref_status fail(lpref_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
lpref_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return LPREF_OK;
  } catch (const lpref::Error& e) {
    return fail(static_cast<lpref_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LPREF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LPREF_E_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw lpref::Error(lpref::ErrorCode::kInvalidArgument, what);
}

lpref_buffer* make_buffer(std::string_view text) {
  auto* b = new lpref_buffer;
  b->bytes.assign(text.begin(), text.end());
  return b;
}

}  // namespace

extern "C" {

const char* lpref_version(void) { return "0.1.0"; }

const char* lpref_last_error(void) { return g_last_error.c_str(); }

const char* lpref_status_name(lpref_status status) {
  if (status == LPREF_OK) return "Ok";
  const auto name = lpref::error_code_name(static_cast<lpref::ErrorCode>(status));
  return name.data();  // string literals, NUL-terminated
}

const char* lpref_qualification_name(lpref_qualification q) {
  if (q < LPREF_QUALIFIED || q > LPREF_DQ_MALFORMED_OUTPUT) return "Unknown";
  return lpref::to_string(static_cast<lpref::Qualification>(q)).data();
}

const uint8_t* lpref_buffer_data(const lpref_buffer* b) {
  return b ? b->bytes.data() : nullptr;
}
size_t lpref_buffer_size(const lpref_buffer* b) { return b ? b->bytes.size() : 0; }
void lpref_buffer_free(lpref_buffer* b) { delete b; }

lpref_status lpref_label_map_create(uint32_t width, uint32_t height,
                                    const uint8_t* pixels, lpref_label_map** out) {
  return guarded([&] {
    require(out && pixels, "null argument");
    std::vector<std::uint8_t> px(pixels, pixels + std::size_t(width) * height);
    *out = new lpref_label_map{lpref::LabelMap(width, height, std::move(px))};
  });
}

lpref_status lpref_label_map_decode(const uint8_t* png, size_t size,
                                    lpref_label_map** out) {
  return guarded([&] {
    require(out && (png || size == 0), "null argument");
    *out = new lpref_label_map{lpref::decode_label_map(lpref::ByteView(png, size))};
  });
}

lpref_status lpref_label_map_encode(const lpref_label_map* map, lpref_buffer** out) {
  return guarded([&] {
    require(map && out, "null argument");
    *out = new lpref_buffer{lpref::encode_label_map(map->map)};
  });
}

uint32_t lpref_label_map_width(const lpref_label_map* m) { return m ? m->map.width() : 0; }
uint32_t lpref_label_map_height(const lpref_label_map* m) { return m ? m->map.height() : 0; }
const uint8_t* lpref_label_map_pixels(const lpref_label_map* m) {
  return m ? m->map.pixels().data() : nullptr;
}
uint16_t lpref_label_map_classes(const lpref_label_map* m) {
  return m ? lpref::class_set(m->map).mask() : 0;
}
void lpref_label_map_free(lpref_label_map* m) { delete m; }

lpref_status lpref_image_mdsc(const lpref_label_map* pred, const lpref_label_map* gt,
                              lpref_image_score* out) {
  return guarded([&] {
    require(pred && gt && out, "null argument");
    const lpref::ImageScore s = lpref::image_mdsc(pred->map, gt->map);
    out->class_union = s.class_union.mask();
    for (int c = 0; c < LPREF_NUM_CLASSES; ++c) out->per_class_dice[c] = s.per_class_dice[c];
    out->mdsc = s.mdsc;
  });
}

lpref_status lpref_dataset_accuracy(const double* mdsc, size_t count, double* out) {
  return guarded([&] {
    require(out && (mdsc || count == 0), "null argument");
    *out = lpref::dataset_accuracy(std::span<const double>(mdsc, count));
  });
}

lpref_status lpref_mean_inference_time(double total_ms, size_t image_count,
                                       double* out_ms) {
  return guarded([&] {
    require(out_ms, "null argument");
    *out_ms = lpref::mean_inference_time(lpref::Milliseconds(total_ms), image_count).count();
  });
}

lpref_status lpref_score(double accuracy, double mean_time_ms, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = lpref::score(accuracy, lpref::Milliseconds(mean_time_ms));
  });
}

lpref_status lpref_qualify(double accuracy, double mean_time_ms,
                           double reference_accuracy, double reference_mean_time_ms,
                           lpref_qualification* out) {
  return guarded([&] {
    require(out, "null argument");
    lpref::RefereeConfig c;
    c.reference_accuracy = reference_accuracy;
    c.reference_mean_time = lpref::Milliseconds(reference_mean_time_ms);
    c.validate();
    *out = static_cast<lpref_qualification>(
        lpref::qualify(accuracy, lpref::Milliseconds(mean_time_ms), c));
  });
}

lpref_status lpref_parse_reported_time(const char* text, int* found, double* out_ms) {
  return guarded([&] {
    require(text && found && out_ms, "null argument");
    const auto t = lpref::parse_reported_time(text);
    *found = t ? 1 : 0;
    *out_ms = t ? t->count() : 0.0;
  });
}

lpref_status lpref_score_directories(const char* pred_dir, const char* gt_dir,
                                     double total_time_ms, const char* report_path,
                                     lpref_dataset_score* out) {
  return guarded([&] {
    require(pred_dir && gt_dir && out, "null argument");
    const auto result = lpref::score_directories(pred_dir, gt_dir,
                                                 lpref::Milliseconds(total_time_ms));
    if (report_path) {
      lpref::write_text_file(
          report_path,
          lpref::scoring_report(result.dataset, result.per_image).dump(2) + "\n");
    }
    out->accuracy = result.dataset.accuracy;
    out->mean_time_ms = result.dataset.mean_inference_time.count();
    out->score = result.dataset.score;
    out->image_count = result.dataset.image_count;
  });
}

lpref_status lpref_generate_fixtures(uint64_t seed, size_t count, uint32_t width,
                                     uint32_t height, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "null argument");
    lpref::FixtureSpec spec{seed, count, width, height};
    lpref::generate_fixtures(spec, out_dir);
  });
}

lpref_status lpref_config_load(const char* path, lpref_config** out) {
  return guarded([&] {
    require(out, "null argument");
    std::optional<std::filesystem::path> p;
    if (path) p = path;
    *out = new lpref_config{lpref::load_config(lpref::resolve_config_path(p))};
  });
}

lpref_status lpref_config_from_json(const char* json, const char* base_dir,
                                    lpref_config** out) {
  return guarded([&] {
    require(json && out, "null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw lpref::Error(lpref::ErrorCode::kConfig, e.what());
    }
    *out = new lpref_config{lpref::config_from_json(
        j, base_dir ? std::filesystem::path(base_dir)
                    : std::filesystem::current_path())};
  });
}

void lpref_config_free(lpref_config* c) { delete c; }

lpref_status lpref_service_start(const lpref_config* config, lpref_service** out) {
  return guarded([&] {
    require(config && out, "null argument");
    auto svc = std::make_unique<lpref::Service>(config->config);
    svc->start();
    *out = new lpref_service{std::move(svc)};
  });
}

uint16_t lpref_service_port(const lpref_service* s) { return s ? s->service->port() : 0; }
void lpref_service_wait(lpref_service* s) {
  if (s) s->service->wait();
}
void lpref_service_stop(lpref_service* s) {
  if (s) s->service->stop();
}
void lpref_service_free(lpref_service* s) { delete s; }

lpref_status lpref_worker_start(const lpref_config* config, lpref_worker** out) {
  return guarded([&] {
    require(config && out, "null argument");
    auto w = std::make_unique<lpref_worker>();
    w->worker = std::make_unique<lpref::Worker>(config->config.worker_config());
    w->server = std::make_unique<lpref::WorkerServer>(
        *w->worker, config->config.worker.host, config->config.worker.port);
    w->server->start();
    *out = w.release();
  });
}

uint16_t lpref_worker_port(const lpref_worker* w) { return w ? w->server->port() : 0; }

void lpref_worker_wait(lpref_worker* w) {
  if (!w) return;
  std::unique_lock lock(w->mu);
  w->cv.wait(lock, [&] { return w->stopped; });
}

void lpref_worker_stop(lpref_worker* w) {
  if (!w) return;
  w->server->stop();
  {
    std::lock_guard lock(w->mu);
    w->stopped = true;
  }
  w->cv.notify_all();
}

void lpref_worker_free(lpref_worker* w) {
  if (w) lpref_worker_stop(w);
  delete w;
}

lpref_status lpref_store_open(const char* dir, lpref_store** out) {
  return guarded([&] {
    require(dir && out, "null argument");
    *out = new lpref_store{std::make_unique<lpref::RecordStore>(dir)};
  });
}

lpref_status lpref_store_leaderboard(const lpref_store* store, const char* track,
                                     lpref_buffer** out) {
  return guarded([&] {
    require(store && out, "null argument");
    std::optional<lpref::Track> only;
    if (track) only = lpref::track_from_string(track);
    const auto records = store->store->load_records();
    *out = make_buffer(
        lpref::leaderboard_snapshot(records, lpref::now_utc(), only).dump());
  });
}

lpref_status lpref_store_timeline(const lpref_store* store, const char* from,
                                  const char* to, lpref_buffer** out) {
  return guarded([&] {
    require(store && from && to && out, "null argument");
    const auto records = store->store->load_records();
    const auto series = lpref::daily_series(records, lpref::parse_day(from),
                                            lpref::parse_day(to));
    *out = make_buffer(lpref::daily_series_csv(series));
  });
}

void lpref_store_free(lpref_store* s) { delete s; }

}  // extern "C"
