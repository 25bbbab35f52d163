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


// Exercises the shared library through its public header only.

#include <lpref/lpref.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "lpref-capi-XXXXXX").string();
    path = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

lpref_label_map* make_map(uint32_t w, uint32_t h, const std::vector<uint8_t>& px) {
  lpref_label_map* m = nullptr;
  EXPECT_EQ(lpref_label_map_create(w, h, px.data(), &m), LPREF_OK);
  return m;
}

TEST(CApi, VersionAndNames) {
  EXPECT_STREQ(lpref_version(), "0.1.0");
  EXPECT_STREQ(lpref_status_name(LPREF_E_INVALID_CLASS_ID), "InvalidClassId");
  EXPECT_STREQ(lpref_status_name(LPREF_OK), "Ok");
  EXPECT_STREQ(lpref_status_name(static_cast<lpref_status>(77)), "Unknown");
  EXPECT_STREQ(lpref_qualification_name(LPREF_QUALIFIED), "Qualified");
  EXPECT_STREQ(lpref_qualification_name(LPREF_DQ_RUN_FAILURE),
               "DisqualifiedRunFailure");
}

TEST(CApi, LabelMapRoundTrip) {
  const std::vector<uint8_t> px{0, 1, 2, 13, 12, 11};
  lpref_label_map* m = make_map(3, 2, px);
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(lpref_label_map_width(m), 3u);
  EXPECT_EQ(lpref_label_map_height(m), 2u);
  EXPECT_EQ(lpref_label_map_classes(m), (1u << 0) | (1u << 1) | (1u << 2) |
                                            (1u << 11) | (1u << 12) | (1u << 13));
  lpref_buffer* png = nullptr;
  ASSERT_EQ(lpref_label_map_encode(m, &png), LPREF_OK);
  lpref_label_map* back = nullptr;
  ASSERT_EQ(lpref_label_map_decode(lpref_buffer_data(png), lpref_buffer_size(png),
                                   &back),
            LPREF_OK);
  EXPECT_EQ(std::vector<uint8_t>(lpref_label_map_pixels(back),
                                 lpref_label_map_pixels(back) + 6),
            px);
  lpref_buffer_free(png);
  lpref_label_map_free(back);
  lpref_label_map_free(m);
}

TEST(CApi, ErrorsSetLastError) {
  lpref_label_map* m = nullptr;
  const std::vector<uint8_t> bad{0, 14};
  EXPECT_EQ(lpref_label_map_create(2, 1, bad.data(), &m), LPREF_E_INVALID_CLASS_ID);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(lpref_last_error()).find("14"), std::string::npos);

  const uint8_t junk[4] = {1, 2, 3, 4};
  EXPECT_EQ(lpref_label_map_decode(junk, sizeof(junk), &m), LPREF_E_MALFORMED_IMAGE);
  EXPECT_EQ(lpref_label_map_create(2, 1, nullptr, &m), LPREF_E_INVALID_ARGUMENT);
  EXPECT_EQ(lpref_label_map_create(2, 1, bad.data(), nullptr),
            LPREF_E_INVALID_ARGUMENT);

  double out = 0;
  EXPECT_EQ(lpref_score(0.5, 0.0, &out), LPREF_E_NON_POSITIVE_TIME);
  EXPECT_EQ(lpref_dataset_accuracy(nullptr, 0, &out), LPREF_E_EMPTY_DATASET);
  EXPECT_EQ(lpref_mean_inference_time(10.0, 0, &out), LPREF_E_ZERO_IMAGES);
  lpref_label_map_free(nullptr);
  lpref_buffer_free(nullptr);
}

TEST(CApi, Metrics) {
  // 4x4: top half class 0, bottom half class 1 with two pixels predicted as 2.
  std::vector<uint8_t> gt(16, 0);
  for (int i = 8; i < 16; ++i) gt[i] = 1;
  std::vector<uint8_t> pred = gt;
  pred[14] = pred[15] = 2;
  lpref_label_map* p = make_map(4, 4, pred);
  lpref_label_map* g = make_map(4, 4, gt);
  lpref_image_score s;
  ASSERT_EQ(lpref_image_mdsc(p, g, &s), LPREF_OK);
  EXPECT_EQ(s.class_union, 0b111);
  EXPECT_DOUBLE_EQ(s.per_class_dice[0], 1.0);
  EXPECT_DOUBLE_EQ(s.per_class_dice[1], 12.0 / 14.0);
  EXPECT_DOUBLE_EQ(s.per_class_dice[2], 0.0);
  EXPECT_NEAR(s.mdsc, 13.0 / 21.0, 1e-15);

  lpref_label_map* small = make_map(2, 2, {0, 0, 0, 0});
  EXPECT_EQ(lpref_image_mdsc(small, g, &s), LPREF_E_DIMENSION_MISMATCH);
  lpref_label_map_free(small);
  lpref_label_map_free(p);
  lpref_label_map_free(g);

  const double values[] = {1.0, 0.5, 0.0};
  double acc = 0, mean = 0, sc = 0;
  ASSERT_EQ(lpref_dataset_accuracy(values, 3, &acc), LPREF_OK);
  EXPECT_DOUBLE_EQ(acc, 0.5);
  ASSERT_EQ(lpref_mean_inference_time(64860.0, 600, &mean), LPREF_OK);
  EXPECT_DOUBLE_EQ(mean, 108.1);
  ASSERT_EQ(lpref_score(0.5, 108.1, &sc), LPREF_OK);
  EXPECT_NEAR(sc, 4.63, 0.01);

  lpref_qualification q;
  ASSERT_EQ(lpref_qualify(0.5, 108.1, 0.5, 108.1, &q), LPREF_OK);
  EXPECT_EQ(q, LPREF_QUALIFIED);
  ASSERT_EQ(lpref_qualify(0.49, 50, 0.5, 108.1, &q), LPREF_OK);
  EXPECT_EQ(q, LPREF_DQ_BELOW_REFERENCE_ACCURACY);
  ASSERT_EQ(lpref_qualify(0.9, 108.2, 0.5, 108.1, &q), LPREF_OK);
  EXPECT_EQ(q, LPREF_DQ_ABOVE_REFERENCE_TIME);
}

TEST(CApi, ParseReportedTime) {
  int found = -1;
  double ms = 0;
  ASSERT_EQ(lpref_parse_reported_time("noise\nLPCV_TOTAL_INFERENCE_TIME_MS: 64860\n",
                                      &found, &ms),
            LPREF_OK);
  EXPECT_EQ(found, 1);
  EXPECT_DOUBLE_EQ(ms, 64860.0);
  ASSERT_EQ(lpref_parse_reported_time("nothing here", &found, &ms), LPREF_OK);
  EXPECT_EQ(found, 0);
  EXPECT_EQ(lpref_parse_reported_time("LPCV_TOTAL_INFERENCE_TIME_MS: fast", &found, &ms),
            LPREF_E_MALFORMED_SENTINEL);
}

TEST(CApi, FixturesAndDirectoryScoring) {
  TempDir dir;
  ASSERT_EQ(lpref_generate_fixtures(1, 3, 16, 8, dir.path.c_str()), LPREF_OK);
  const fs::path gt = dir.path / "ground_truth";
  const fs::path report = dir.path / "report.json";
  lpref_dataset_score s;
  ASSERT_EQ(lpref_score_directories(gt.c_str(), gt.c_str(), 300.0,
                                    report.c_str(), &s),
            LPREF_OK);
  EXPECT_EQ(s.image_count, 3u);
  EXPECT_DOUBLE_EQ(s.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(s.mean_time_ms, 100.0);
  EXPECT_DOUBLE_EQ(s.score, 10.0);
  EXPECT_TRUE(fs::file_size(report) > 0);

  fs::create_directories(dir.path / "pred");
  EXPECT_EQ(lpref_score_directories((dir.path / "pred").c_str(), gt.c_str(), 300.0,
                                    nullptr, &s),
            LPREF_E_WRONG_OUTPUT_COUNT);
  EXPECT_NE(std::string(lpref_last_error()).find("0000.png"), std::string::npos);
  EXPECT_EQ(lpref_generate_fixtures(1, 0, 16, 8, dir.path.c_str()),
            LPREF_E_INVALID_ARGUMENT);
}

TEST(CApi, ConfigServiceAndStore) {
  TempDir dir;
  ASSERT_EQ(lpref_generate_fixtures(2, 2, 8, 8, (dir.path / "set").c_str()), LPREF_OK);
  const std::string json = R"({
    "store_dir": "store",
    "http": {"port": 0},
    "teams": {"tok": "alpha"},
    "test_sets": {"default": {"images": "set/images", "ground_truth": "set/ground_truth"}},
    "worker": {"port": 0, "isolation": "none"},
    "referee": {"expected_image_count": 2, "image_width": 8, "image_height": 8}
  })";
  lpref_config* cfg = nullptr;
  ASSERT_EQ(lpref_config_from_json(json.c_str(), dir.path.c_str(), &cfg), LPREF_OK)
      << lpref_last_error();

  lpref_service* svc = nullptr;
  ASSERT_EQ(lpref_service_start(cfg, &svc), LPREF_OK) << lpref_last_error();
  EXPECT_GT(lpref_service_port(svc), 0);
  std::thread waiter([svc] { lpref_service_wait(svc); });
  lpref_service_stop(svc);
  waiter.join();
  lpref_service_free(svc);

  lpref_worker* worker = nullptr;
  ASSERT_EQ(lpref_worker_start(cfg, &worker), LPREF_OK) << lpref_last_error();
  EXPECT_GT(lpref_worker_port(worker), 0);
  lpref_worker_stop(worker);
  lpref_worker_free(worker);
  lpref_config_free(cfg);

  lpref_store* store = nullptr;
  ASSERT_EQ(lpref_store_open((dir.path / "store").c_str(), &store), LPREF_OK);
  lpref_buffer* buf = nullptr;
  ASSERT_EQ(lpref_store_leaderboard(store, "score", &buf), LPREF_OK);
  const std::string board(reinterpret_cast<const char*>(lpref_buffer_data(buf)),
                          lpref_buffer_size(buf));
  EXPECT_NE(board.find("\"score\":[]"), std::string::npos) << board;
  lpref_buffer_free(buf);
  EXPECT_EQ(lpref_store_leaderboard(store, "fast", &buf), LPREF_E_UNKNOWN_TRACK);
  ASSERT_EQ(lpref_store_timeline(store, "2023-06-01", "2023-06-02", &buf), LPREF_OK);
  const std::string csv(reinterpret_cast<const char*>(lpref_buffer_data(buf)),
                        lpref_buffer_size(buf));
  EXPECT_EQ(csv, "day,best_score,best_accuracy,lowest_time_ms\n"
                 "2023-06-01,,,\n2023-06-02,,,\n");
  lpref_buffer_free(buf);
  EXPECT_EQ(lpref_store_timeline(store, "2023-06-02", "2023-06-01", &buf),
            LPREF_E_INVALID_RANGE);
  lpref_store_free(store);

  EXPECT_EQ(lpref_config_from_json("{", dir.path.c_str(), &cfg), LPREF_E_CONFIG);
  ::unsetenv("LPREF_CONFIG");
  EXPECT_EQ(lpref_config_load(nullptr, &cfg), LPREF_E_CONFIG);
}

}  // namespace
