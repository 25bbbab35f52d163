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


#include <cmath>
#include <deque>
#include <functional>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "fsutil.hpp"
#include "referee.hpp"
#include "test_support.hpp"
#include "zip_archive.hpp"

namespace lpref {
namespace {

namespace fs = std::filesystem;
using testing::mock_archive;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

// Replays scripted outcomes; each call pops one.
class ScriptedWorker : public WorkerClient {
 public:
  std::deque<std::function<WorkerResponse()>> script;
  int calls = 0;

  WorkerResponse evaluate(ByteView, const std::string&, const RunLimits&) override {
    ++calls;
    if (script.empty()) throw Error(ErrorCode::kWorkerUnreachable, "no script");
    auto next = std::move(script.front());
    script.pop_front();
    return next();
  }
};

class RefereeTest : public ::testing::Test {
 protected:
  static constexpr FixtureSpec kSpec{7, 4, 8, 6};

  void SetUp() override {
    names_ = generate_fixtures(kSpec, dir_.path() / "set");
    config_.reference_accuracy = 0.50;
    config_.reference_mean_time = Milliseconds(108.1);
    config_.expected_image_count = kSpec.count;
    config_.image_dims = {kSpec.width, kSpec.height};
    config_.ground_truth_dir = dir_.path() / "set" / "ground_truth";
    config_.max_retries = 2;
    store_ = std::make_unique<RecordStore>(dir_.path() / "store");
  }

  Referee& referee() {
    if (!referee_) referee_ = std::make_unique<Referee>(config_, *store_, worker_);
    return *referee_;
  }

  // Predictions produced by `f(gt)` for every image.
  WorkerResponse response(double total_ms, double wall_ms,
                          const std::function<LabelMap(const LabelMap&)>& f =
                              [](const LabelMap& m) { return m; }) {
    WorkerResponse r;
    r.run.wall_clock = Milliseconds(wall_ms);
    r.run.reported_total_inference = Milliseconds(total_ms);
    ZipWriter zip;
    for (std::size_t i = 0; i < names_.size(); ++i)
      zip.add(names_[i], encode_label_map(f(fixture_map(kSpec, i))), false);
    r.outputs_zip = zip.finish();
    return r;
  }

  EvaluationRecord run_one(WorkerResponse r) {
    worker_.script.push_back([r] { return r; });
    referee().submit("team", Bytes{1});
    return referee().evaluate_next();
  }

  TempDir dir_{"lpref-referee-test"};
  std::vector<std::string> names_;
  RefereeConfig config_;
  std::unique_ptr<RecordStore> store_;
  ScriptedWorker worker_;
  std::unique_ptr<Referee> referee_;
};

TEST_F(RefereeTest, ScoresPerfectPredictions) {
  const EvaluationRecord r = run_one(response(200, 300));
  EXPECT_EQ(r.qualification, Qualification::kQualified);
  EXPECT_DOUBLE_EQ(*r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_time->count(), 50.0);
  EXPECT_DOUBLE_EQ(*r.score, 20.0);
  EXPECT_FALSE(r.suspect_timing);
  EXPECT_FALSE(r.infrastructure_failure);
  EXPECT_EQ(store_->submission(r.submission_id)->status, SubmissionStatus::kScored);
  EXPECT_EQ(store_->load_record(r.submission_id), r);

  const Bytes report = store_->get_blob(r.per_image_report_ref);
  const auto j = nlohmann::json::parse(report.begin(), report.end());
  EXPECT_EQ(j.dump().find("0003.png") != std::string::npos, true);
}

TEST_F(RefereeTest, FlagsReportedTimeAboveWallClock) {
  const EvaluationRecord r = run_one(response(200, 100));
  EXPECT_EQ(r.qualification, Qualification::kQualified);
  EXPECT_TRUE(r.suspect_timing);
  EXPECT_NE(r.detail.find("exceeds measured wall clock"), std::string::npos);
  EXPECT_FALSE(run_one(response(200, 200 / 1.1)).suspect_timing);
}

TEST_F(RefereeTest, ThresholdDisqualifications) {
  const EvaluationRecord wrong = run_one(response(200, 300, [](const LabelMap& m) {
    std::vector<std::uint8_t> px(m.pixels().begin(), m.pixels().end());
    for (auto& p : px) p = std::uint8_t((p + 1) % kNumClasses);
    return LabelMap(m.width(), m.height(), px);
  }));
  EXPECT_EQ(wrong.qualification, Qualification::kDisqualifiedBelowReferenceAccuracy);
  EXPECT_DOUBLE_EQ(*wrong.accuracy, 0.0);
  EXPECT_EQ(store_->submission(wrong.submission_id)->status,
            SubmissionStatus::kDisqualified);

  const EvaluationRecord slow = run_one(response(4 * 108.2, 1000));
  EXPECT_EQ(slow.qualification, Qualification::kDisqualifiedAboveReferenceTime);
  EXPECT_TRUE(slow.score.has_value());

  const EvaluationRecord zero = run_one(response(0, 1000));
  EXPECT_EQ(zero.qualification, Qualification::kDisqualifiedMalformedOutput);
  EXPECT_FALSE(zero.score.has_value());
}

TEST_F(RefereeTest, DisqualificationPrecedence) {
  struct Case {
    const char* name;
    std::function<void(WorkerResponse&)> mutate;
    Qualification expected;
    const char* detail;
  };
  const std::vector<Case> cases = {
      {"setup error beats everything",
       [](WorkerResponse& r) {
         r.setup_error = ErrorCode::kMissingManifest;
         r.setup_detail = "no manifest.json";
         r.run.timed_out = true;
       },
       Qualification::kDisqualifiedRunFailure, "MissingManifest"},
      {"timeout beats output count",
       [](WorkerResponse& r) {
         r.run.timed_out = true;
         r.run.exit_status = -9;
         r.collection.missing = {"0000.png"};
       },
       Qualification::kDisqualifiedRunFailure, "timed out"},
      {"crash keeps last stderr line",
       [](WorkerResponse& r) {
         r.run.exit_status = 3;
         r.run.stderr_tail = "first\nboom\n";
         r.collection.extra = {"x.png"};
       },
       Qualification::kDisqualifiedRunFailure, "boom"},
      {"count beats per-file failures",
       [](WorkerResponse& r) {
         r.collection.missing = {"0001.png"};
         r.collection.failures = {{"0000.png", "bad"}};
         r.run.sentinel_error = "bad sentinel";
       },
       Qualification::kDisqualifiedWrongOutputCount, "0001.png"},
      {"per-file failure",
       [](WorkerResponse& r) { r.collection.failures = {{"0002.png", "16-bit"}}; },
       Qualification::kDisqualifiedMalformedOutput, "0002.png"},
      {"output limit",
       [](WorkerResponse& r) { r.run.output_limit_exceeded = true; },
       Qualification::kDisqualifiedMalformedOutput, "output directory exceeds"},
      {"sentinel unusable",
       [](WorkerResponse& r) {
         r.run.reported_total_inference.reset();
         r.run.sentinel_error = "not a number";
       },
       Qualification::kDisqualifiedMalformedOutput, "not a number"},
      {"sentinel missing",
       [](WorkerResponse& r) { r.run.reported_total_inference.reset(); },
       Qualification::kDisqualifiedMalformedOutput, "line on stdout"},
      {"shipped zip unreadable",
       [](WorkerResponse& r) { r.outputs_zip = {1, 2, 3}; },
       Qualification::kDisqualifiedMalformedOutput, ""},
  };
  for (const auto& c : cases) {
    WorkerResponse r = response(200, 300);
    c.mutate(r);
    const EvaluationRecord rec = run_one(r);
    EXPECT_EQ(rec.qualification, c.expected) << c.name;
    EXPECT_NE(rec.detail.find(c.detail), std::string::npos)
        << c.name << ": " << rec.detail;
    EXPECT_FALSE(rec.accuracy.has_value()) << c.name;
    EXPECT_EQ(store_->submission(rec.submission_id)->status,
              SubmissionStatus::kDisqualified);
  }
}

TEST_F(RefereeTest, RechecksShippedNamesAndDimensions) {
  WorkerResponse missing = response(200, 300);
  {
    ZipWriter zip;
    for (std::size_t i = 1; i < names_.size(); ++i)
      zip.add(names_[i], encode_label_map(fixture_map(kSpec, i)), false);
    zip.add("stray.png", encode_label_map(fixture_map(kSpec, 0)), false);
    missing.outputs_zip = zip.finish();
  }
  const EvaluationRecord r1 = run_one(missing);
  EXPECT_EQ(r1.qualification, Qualification::kDisqualifiedWrongOutputCount);
  EXPECT_NE(r1.detail.find("0000.png"), std::string::npos);

  const EvaluationRecord r2 = run_one(response(200, 300, [](const LabelMap&) {
    return LabelMap(3, 3, ClassId(0));
  }));
  EXPECT_EQ(r2.qualification, Qualification::kDisqualifiedMalformedOutput);
  EXPECT_NE(r2.detail.find("0000.png"), std::string::npos);
}

TEST_F(RefereeTest, QualifyTiesAndPrecedence) {
  const RefereeConfig c = RefereeConfig::standings_preset();
  const Milliseconds ref = c.reference_mean_time;
  EXPECT_EQ(qualify(0.50, ref, c), Qualification::kQualified);
  EXPECT_EQ(qualify(std::nextafter(0.50, 0.0), ref, c),
            Qualification::kDisqualifiedBelowReferenceAccuracy);
  EXPECT_EQ(qualify(0.9, Milliseconds(std::nextafter(ref.count(), 1e9)), c),
            Qualification::kDisqualifiedAboveReferenceTime);
  EXPECT_EQ(qualify(0.1, Milliseconds(1e6), c),
            Qualification::kDisqualifiedBelowReferenceAccuracy);
}

TEST_F(RefereeTest, RetriesThenFailsAsInfrastructure) {
  const auto [a, pos_a] = referee().submit("alpha", Bytes{1});
  const auto [b, pos_b] = referee().submit("beta", Bytes{2});
  EXPECT_EQ(pos_a, 0u);
  EXPECT_EQ(pos_b, 1u);
  for (int attempt = 1; attempt <= config_.max_retries; ++attempt) {
    EXPECT_EQ(code_of([&] { referee().evaluate_next(); }),
              ErrorCode::kWorkerUnreachable);
    // The failed submission keeps its place at the head.
    EXPECT_EQ(referee().queue_position(a), 0u);
    EXPECT_EQ(store_->submission(a)->status, SubmissionStatus::kQueued);
  }
  const EvaluationRecord r = referee().evaluate_next();
  EXPECT_EQ(r.submission_id, a);
  EXPECT_TRUE(r.infrastructure_failure);
  EXPECT_EQ(r.qualification, Qualification::kDisqualifiedRunFailure);
  EXPECT_EQ(store_->submission(a)->status, SubmissionStatus::kFailed);
  EXPECT_EQ(worker_.calls, config_.max_retries + 1);

  worker_.script.push_back([this] { return response(200, 300); });
  EXPECT_EQ(referee().evaluate_next().submission_id, b);
  EXPECT_EQ(code_of([&] { referee().evaluate_next(); }), ErrorCode::kEmptyQueue);
}

TEST_F(RefereeTest, TransientFailureThenSuccess) {
  const auto id = referee().submit("alpha", Bytes{1}).first;
  worker_.script.push_back([]() -> WorkerResponse {
    throw Error(ErrorCode::kProtocol, "garbled");
  });
  worker_.script.push_back([this] { return response(200, 300); });
  EXPECT_EQ(code_of([&] { referee().evaluate_next(); }),
            ErrorCode::kWorkerUnreachable);
  const EvaluationRecord r = referee().evaluate_next();
  EXPECT_EQ(r.submission_id, id);
  EXPECT_EQ(r.qualification, Qualification::kQualified);
}

TEST_F(RefereeTest, RefereeSideErrorKeepsSubmissionQueued) {
  const auto id = referee().submit("alpha", Bytes{1}).first;
  worker_.script.push_back([this] { return response(200, 300); });
  fs::remove(config_.ground_truth_dir / "0002.png");
  EXPECT_THROW(referee().evaluate_next(), Error);
  EXPECT_EQ(referee().queue_position(id), 0u);
  EXPECT_EQ(store_->submission(id)->status, SubmissionStatus::kQueued);
  EXPECT_FALSE(store_->has_record(id));
}

TEST_F(RefereeTest, RecoversQueueAfterRestart) {
  std::string running, queued, done;
  {
    Referee first(config_, *store_, worker_);
    done = first.submit("a", Bytes{1}).first;
    running = first.submit("b", Bytes{2}).first;
    queued = first.submit("c", Bytes{3}).first;
    worker_.script.push_back([this] { return response(200, 300); });
    first.evaluate_next();
    store_->set_status(running, SubmissionStatus::kRunning);
  }
  store_ = std::make_unique<RecordStore>(dir_.path() / "store");
  Referee second(config_, *store_, worker_);
  EXPECT_EQ(second.queue_size(), 2u);
  EXPECT_EQ(second.queue_position(running), 0u);
  EXPECT_EQ(second.queue_position(queued), 1u);
  EXPECT_FALSE(second.queue_position(done).has_value());
  EXPECT_EQ(store_->submission(running)->status, SubmissionStatus::kQueued);

  const auto v = second.view(done);
  ASSERT_TRUE(v && v->record);
  EXPECT_EQ(v->submission.status, SubmissionStatus::kScored);
  EXPECT_EQ(second.view(queued)->queue_position, 1u);
  EXPECT_FALSE(second.view("nope").has_value());
}

TEST_F(RefereeTest, RepairsStatusOfRecordedSubmission) {
  std::string id;
  {
    Referee first(config_, *store_, worker_);
    id = first.submit("a", Bytes{1}).first;
    worker_.script.push_back([this] { return response(200, 300); });
    first.evaluate_next();
    // Crash between persisting the record and the status update.
    store_->set_status(id, SubmissionStatus::kRunning);
  }
  Referee second(config_, *store_, worker_);
  EXPECT_EQ(second.queue_size(), 0u);
  EXPECT_EQ(store_->submission(id)->status, SubmissionStatus::kScored);
}

TEST_F(RefereeTest, EnqueueValidation) {
  Submission s;
  s.id = "x";
  s.team = "t";
  s.archive_ref = "sha256:" + std::string(64, 'c');
  EXPECT_EQ(code_of([&] { referee().enqueue(s); }), ErrorCode::kStorageFailure);
  referee().submit("t", Bytes{1}, std::string("fixed"));
  EXPECT_EQ(code_of([&] { referee().submit("t", Bytes{1}, std::string("fixed")); }),
            ErrorCode::kDuplicateSubmissionId);
  EXPECT_EQ(referee().queue_size(), 1u);
}

TEST_F(RefereeTest, FifoUnderConcurrentEnqueue) {
  constexpr int kThreads = 4, kPerThread = 25;
  std::vector<std::vector<std::string>> mine(kThreads);
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i)
        mine[t].push_back(referee().submit("team" + std::to_string(t),
                                           Bytes{std::uint8_t(t)})
                              .first);
    });
  }
  for (auto& th : threads) th.join();

  std::vector<std::string> log_order;
  for (const auto& s : store_->submissions()) log_order.push_back(s.id);
  ASSERT_EQ(log_order.size(), std::size_t(kThreads * kPerThread));

  std::vector<std::string> evaluated;
  while (referee().queue_size() > 0) {
    worker_.script.push_back([this] { return response(200, 300); });
    evaluated.push_back(referee().evaluate_next().submission_id);
  }
  EXPECT_EQ(evaluated, log_order);
  for (const auto& ids : mine) {
    std::vector<std::size_t> at;
    for (const auto& id : ids)
      at.push_back(std::find(evaluated.begin(), evaluated.end(), id) -
                   evaluated.begin());
    EXPECT_TRUE(std::is_sorted(at.begin(), at.end()));
  }
}

TEST_F(RefereeTest, WaitForWorkWakesOnEnqueue) {
  EXPECT_FALSE(referee().wait_for_work(std::chrono::milliseconds(10)));
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    referee().submit("t", Bytes{1});
  });
  EXPECT_TRUE(referee().wait_for_work(std::chrono::seconds(10)));
  t.join();
}

TEST_F(RefereeTest, GroundTruthCountMustMatch) {
  config_.expected_image_count = 5;
  EXPECT_EQ(code_of([&] { referee(); }), ErrorCode::kConfig);
  config_.expected_image_count = 4;
  config_.ground_truth_dir.clear();
  EXPECT_EQ(code_of([&] { referee(); }), ErrorCode::kConfig);
}

TEST_F(RefereeTest, EndToEndWithMockSolutions) {
  WorkerConfig wc;
  wc.scratch_dir = dir_.path();
  wc.isolation = testing::test_isolation();
  wc.image_dims = config_.image_dims;
  wc.test_sets["default"] = dir_.path() / "set" / "images";
  Worker worker(wc);
  LocalWorkerClient client(worker);
  config_.run_limits.wall_clock_timeout = std::chrono::seconds(20);
  Referee ref(config_, *store_, client);

  struct Case {
    std::vector<std::string> args;
    Qualification expected;
  };
  const std::vector<Case> cases = {
      {{"copy", "--report-ms", "200"}, Qualification::kQualified},
      {{"drop", "--report-ms", "200"}, Qualification::kDisqualifiedWrongOutputCount},
      {{"crash"}, Qualification::kDisqualifiedRunFailure},
      {{"exit3"}, Qualification::kDisqualifiedRunFailure},
      {{"zero", "--report-ms", "200"},
       Qualification::kDisqualifiedBelowReferenceAccuracy},
      {{"copy"}, Qualification::kDisqualifiedAboveReferenceTime},
      {{"garbage", "--report-ms", "200"}, Qualification::kDisqualifiedMalformedOutput},
      {{"extra", "--report-ms", "200"}, Qualification::kDisqualifiedWrongOutputCount},
      {{"no-sentinel"}, Qualification::kDisqualifiedMalformedOutput},
      {{"bad-sentinel"}, Qualification::kDisqualifiedMalformedOutput},
  };
  for (const auto& c : cases) ref.submit("t", mock_archive(c.args));
  for (const auto& c : cases) {
    const EvaluationRecord r = ref.evaluate_next();
    EXPECT_EQ(r.qualification, c.expected) << c.args[0] << ": " << r.detail;
  }
  const auto records = store_->load_records();
  ASSERT_EQ(records.size(), cases.size());
  EXPECT_DOUBLE_EQ(*records[0].accuracy, 1.0);
  EXPECT_DOUBLE_EQ(records[0].mean_time->count(), 50.0);
}

TEST(RefereeConfigTest, PresetsAndDefaults) {
  const RefereeConfig standings = RefereeConfig::standings_preset();
  EXPECT_DOUBLE_EQ(standings.reference_accuracy, 0.50);
  EXPECT_DOUBLE_EQ(standings.reference_mean_time.count(), 108.1);
  EXPECT_EQ(standings.run_limits.wall_clock_timeout.count(), 129720);
  const RefereeConfig writeup = RefereeConfig::preset("writeup");
  EXPECT_DOUBLE_EQ(writeup.reference_accuracy, 0.5011);
  EXPECT_DOUBLE_EQ(writeup.reference_mean_time.count(), 200.0);
  EXPECT_EQ(writeup.run_limits.wall_clock_timeout.count(), 240000);
  EXPECT_EQ(code_of([] { RefereeConfig::preset("other"); }), ErrorCode::kConfig);
}

TEST(RefereeConfigTest, JsonRoundTripAndOverrides) {
  RefereeConfig c = RefereeConfig::writeup_preset();
  c.ground_truth_dir = "/data/gt";
  c.max_retries = 5;
  const RefereeConfig back = referee_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));

  const RefereeConfig p = referee_config_from_json(
      {{"preset", "standings"}, {"expected_image_count", 10}});
  EXPECT_DOUBLE_EQ(p.reference_mean_time.count(), 108.1);
  EXPECT_EQ(p.run_limits.wall_clock_timeout.count(), 2162);  // ceil(2*108.1*10)

  const RefereeConfig explicit_timeout = referee_config_from_json(
      {{"run_limits", {{"wall_clock_timeout_ms", 5000}}}});
  EXPECT_EQ(explicit_timeout.run_limits.wall_clock_timeout.count(), 5000);

  for (const nlohmann::json& bad :
       {nlohmann::json{{"reference_accuracy", 0.0}},
        nlohmann::json{{"reference_accuracy", 1.5}},
        nlohmann::json{{"reference_mean_time_ms", -1}},
        nlohmann::json{{"expected_image_count", 0}},
        nlohmann::json{{"max_retries", -1}},
        nlohmann::json{{"reference_accuracy", "high"}},
        nlohmann::json{{"run_limits", {{"wall_clock_timeout_ms", 0}}}}}) {
    EXPECT_EQ(code_of([&] { referee_config_from_json(bad); }), ErrorCode::kConfig)
        << bad.dump();
  }
}

TEST(ScoreDirectories, ScoresAndNamesProblems) {
  TempDir dir("lpref-scoredir-test");
  const FixtureSpec spec{9, 3, 5, 4};
  generate_fixtures(spec, dir.path());
  const fs::path gt = dir.path() / "ground_truth";
  const DirectoryScore s = score_directories(gt, gt, Milliseconds(300));
  EXPECT_DOUBLE_EQ(s.dataset.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(s.dataset.mean_inference_time.count(), 100.0);
  EXPECT_DOUBLE_EQ(s.dataset.score, 10.0);
  ASSERT_EQ(s.per_image.size(), 3u);
  EXPECT_EQ(s.per_image[2].name, "0002.png");

  const fs::path pred = dir.path() / "pred";
  fs::copy(gt, pred);
  fs::remove(pred / "0001.png");
  try {
    score_directories(pred, gt, Milliseconds(300));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongOutputCount);
    EXPECT_NE(std::string(e.what()).find("0001.png"), std::string::npos);
  }
  fs::copy_file(gt / "0001.png", pred / "0001.png");
  fs::copy_file(gt / "0001.png", pred / "bonus.png");
  EXPECT_EQ(code_of([&] { score_directories(pred, gt, Milliseconds(300)); }),
            ErrorCode::kWrongOutputCount);
  fs::remove(pred / "bonus.png");
  EXPECT_EQ(code_of([&] { score_directories(pred, gt, Milliseconds(0)); }),
            ErrorCode::kNonPositiveTime);
  EXPECT_EQ(code_of([&] { score_directories(pred, dir.path() / "images" / "..x",
                                            Milliseconds(1)); }),
            ErrorCode::kIo);
}

}  // namespace
}  // namespace lpref
