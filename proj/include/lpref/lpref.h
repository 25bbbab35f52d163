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


/* lpref: referee for accuracy-versus-latency segmentation contests.
 *
 * Conventions: functions return lpref_status; LPREF_OK is 0. On failure
 * lpref_last_error() describes the problem for the calling thread until
 * its next lpref call. Objects are opaque handles released by their
 * matching _free function, which accepts NULL. Times are milliseconds.
 */
#ifndef LPREF_LPREF_H_
#define LPREF_LPREF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LPREF_API __declspec(dllexport)
#else
#define LPREF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lpref_status {
  LPREF_OK = 0,
  LPREF_E_INVALID_ARGUMENT = 1,
  LPREF_E_MALFORMED_IMAGE = 2,
  LPREF_E_INVALID_CLASS_ID = 3,
  LPREF_E_DIMENSION_MISMATCH = 4,
  LPREF_E_CLASS_NOT_IN_UNION = 5,
  LPREF_E_EMPTY_DATASET = 6,
  LPREF_E_ZERO_IMAGES = 7,
  LPREF_E_NON_POSITIVE_TIME = 8,
  LPREF_E_CORRUPT_ARCHIVE = 9,
  LPREF_E_MISSING_MANIFEST = 10,
  LPREF_E_PATH_ESCAPE = 11,
  LPREF_E_MANIFEST_INVALID = 12,
  LPREF_E_SPAWN_FAILURE = 13,
  LPREF_E_MALFORMED_SENTINEL = 14,
  LPREF_E_WRONG_OUTPUT_COUNT = 15,
  LPREF_E_OUTPUT_INVALID = 16,
  LPREF_E_DUPLICATE_SUBMISSION_ID = 17,
  LPREF_E_UNKNOWN_SUBMISSION = 18,
  LPREF_E_STORAGE_FAILURE = 19,
  LPREF_E_WORKER_UNREACHABLE = 20,
  LPREF_E_INVALID_RANGE = 21,
  LPREF_E_UNKNOWN_TRACK = 22,
  LPREF_E_IO = 23,
  LPREF_E_CONFIG = 24,
  LPREF_E_PROTOCOL = 25,
  LPREF_E_EMPTY_QUEUE = 26,
  LPREF_E_INTERNAL = 99
} lpref_status;

typedef enum lpref_qualification {
  LPREF_QUALIFIED = 0,
  LPREF_DQ_BELOW_REFERENCE_ACCURACY = 1,
  LPREF_DQ_ABOVE_REFERENCE_TIME = 2,
  LPREF_DQ_WRONG_OUTPUT_COUNT = 3,
  LPREF_DQ_RUN_FAILURE = 4,
  LPREF_DQ_MALFORMED_OUTPUT = 5
} lpref_qualification;

#define LPREF_NUM_CLASSES 14

LPREF_API const char* lpref_version(void);
LPREF_API const char* lpref_last_error(void);
/* "InvalidArgument", "MalformedImage", ...; "Unknown" for other values. */
LPREF_API const char* lpref_status_name(lpref_status status);
LPREF_API const char* lpref_qualification_name(lpref_qualification q);

/* ---- byte buffers returned by the library ---- */
typedef struct lpref_buffer lpref_buffer;
LPREF_API const uint8_t* lpref_buffer_data(const lpref_buffer* b);
LPREF_API size_t lpref_buffer_size(const lpref_buffer* b);
LPREF_API void lpref_buffer_free(lpref_buffer* b);

/* ---- label maps ---- */
typedef struct lpref_label_map lpref_label_map;
/* Copies width*height class ids (0..13), row-major. */
LPREF_API lpref_status lpref_label_map_create(uint32_t width, uint32_t height,
                                              const uint8_t* pixels,
                                              lpref_label_map** out);
/* 8-bit single-channel PNG only. */
LPREF_API lpref_status lpref_label_map_decode(const uint8_t* png, size_t size,
                                              lpref_label_map** out);
LPREF_API lpref_status lpref_label_map_encode(const lpref_label_map* map,
                                              lpref_buffer** out);
LPREF_API uint32_t lpref_label_map_width(const lpref_label_map* map);
LPREF_API uint32_t lpref_label_map_height(const lpref_label_map* map);
LPREF_API const uint8_t* lpref_label_map_pixels(const lpref_label_map* map);
/* Bit c set when class c occurs. */
LPREF_API uint16_t lpref_label_map_classes(const lpref_label_map* map);
LPREF_API void lpref_label_map_free(lpref_label_map* map);

/* ---- metrics ---- */
typedef struct lpref_image_score {
  uint16_t class_union; /* bit mask */
  double per_class_dice[LPREF_NUM_CLASSES]; /* 0 outside the union */
  double mdsc;
} lpref_image_score;

LPREF_API lpref_status lpref_image_mdsc(const lpref_label_map* pred,
                                        const lpref_label_map* gt,
                                        lpref_image_score* out);
LPREF_API lpref_status lpref_dataset_accuracy(const double* mdsc, size_t count,
                                              double* out);
LPREF_API lpref_status lpref_mean_inference_time(double total_ms,
                                                 size_t image_count,
                                                 double* out_ms);
LPREF_API lpref_status lpref_score(double accuracy, double mean_time_ms,
                                   double* out);
LPREF_API lpref_status lpref_qualify(double accuracy, double mean_time_ms,
                                     double reference_accuracy,
                                     double reference_mean_time_ms,
                                     lpref_qualification* out);
/* Scans solution stdout for the total-time line. *found is 0 when there is
 * none; a malformed value is LPREF_E_MALFORMED_SENTINEL. */
LPREF_API lpref_status lpref_parse_reported_time(const char* text, int* found,
                                                 double* out_ms);

typedef struct lpref_dataset_score {
  double accuracy;
  double mean_time_ms;
  double score;
  size_t image_count;
} lpref_dataset_score;

/* Scores every ground-truth PNG against the same name in pred_dir. Writes
 * the JSON scoring report to report_path unless it is NULL. */
LPREF_API lpref_status lpref_score_directories(const char* pred_dir,
                                               const char* gt_dir,
                                               double total_time_ms,
                                               const char* report_path,
                                               lpref_dataset_score* out);

/* Writes ground_truth/, images/ and fixtures.json under out_dir. */
LPREF_API lpref_status lpref_generate_fixtures(uint64_t seed, size_t count,
                                               uint32_t width, uint32_t height,
                                               const char* out_dir);

/* ---- configuration ---- */
typedef struct lpref_config lpref_config;
/* path may be NULL to use $LPREF_CONFIG. */
LPREF_API lpref_status lpref_config_load(const char* path, lpref_config** out);
LPREF_API lpref_status lpref_config_from_json(const char* json,
                                              const char* base_dir,
                                              lpref_config** out);
LPREF_API void lpref_config_free(lpref_config* config);

/* ---- HTTP service ---- */
typedef struct lpref_service lpref_service;
/* Opens the store, binds the port and starts serving. */
LPREF_API lpref_status lpref_service_start(const lpref_config* config,
                                           lpref_service** out);
LPREF_API uint16_t lpref_service_port(const lpref_service* service);
/* Blocks until lpref_service_stop is called from another thread. */
LPREF_API void lpref_service_wait(lpref_service* service);
LPREF_API void lpref_service_stop(lpref_service* service);
LPREF_API void lpref_service_free(lpref_service* service);

/* ---- worker daemon ---- */
typedef struct lpref_worker lpref_worker;
LPREF_API lpref_status lpref_worker_start(const lpref_config* config,
                                          lpref_worker** out);
LPREF_API uint16_t lpref_worker_port(const lpref_worker* worker);
LPREF_API void lpref_worker_wait(lpref_worker* worker);
LPREF_API void lpref_worker_stop(lpref_worker* worker);
LPREF_API void lpref_worker_free(lpref_worker* worker);

/* ---- record store (read side) ---- */
typedef struct lpref_store lpref_store;
LPREF_API lpref_status lpref_store_open(const char* dir, lpref_store** out);
/* Leaderboard snapshot JSON; track is "score", "accuracy", "speed" or NULL
 * for all three. */
LPREF_API lpref_status lpref_store_leaderboard(const lpref_store* store,
                                               const char* track,
                                               lpref_buffer** out);
/* Daily series CSV for the inclusive day range "YYYY-MM-DD". */
LPREF_API lpref_status lpref_store_timeline(const lpref_store* store,
                                            const char* from, const char* to,
                                            lpref_buffer** out);
LPREF_API void lpref_store_free(lpref_store* store);

#ifdef __cplusplus
}
#endif

#endif /* LPREF_LPREF_H_ */
