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


#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "digest.hpp"
#include "fixtures.hpp"
#include "fsutil.hpp"
#include "test_support.hpp"
#include "wire.hpp"
#include "worker.hpp"
#include "zip_archive.hpp"

namespace lpref {
namespace {

using testing::mock_archive;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(Wire, FrameRoundTrip) {
  Frame f;
  f.header = {{"op", "EvaluateArchive"}, {"n", 3}};
  f.payload = {1, 2, 3, 0, 255};
  const Bytes wire = encode_frame(f);
  // Big-endian header length up front.
  const std::uint32_t n = (std::uint32_t(wire[0]) << 24) | (wire[1] << 16) |
                          (wire[2] << 8) | wire[3];
  EXPECT_EQ(wire.size(), 4 + n + f.payload.size());
  const Frame back = decode_frame(wire);
  EXPECT_EQ(back.header["op"], "EvaluateArchive");
  EXPECT_EQ(back.header["payload_bytes"], 5);
  EXPECT_EQ(back.payload, f.payload);
}

TEST(Wire, RejectsMalformedFrames) {
  Frame f;
  f.payload = {9, 9};
  const Bytes wire = encode_frame(f);
  Bytes truncated(wire.begin(), wire.end() - 1);
  EXPECT_EQ(code_of([&] { decode_frame(truncated); }), ErrorCode::kProtocol);
  Bytes trailing = wire;
  trailing.push_back(0);
  EXPECT_EQ(code_of([&] { decode_frame(trailing); }), ErrorCode::kProtocol);
  EXPECT_EQ(code_of([&] { decode_frame(Bytes{0, 0}); }), ErrorCode::kProtocol);

  const std::string hdr = R"({"op":"x"})";  // no payload_bytes
  Bytes no_len{0, 0, 0, std::uint8_t(hdr.size())};
  no_len.insert(no_len.end(), hdr.begin(), hdr.end());
  EXPECT_EQ(code_of([&] { decode_frame(no_len); }), ErrorCode::kProtocol);

  FrameLimits tight;
  tight.max_payload_bytes = 1;
  EXPECT_EQ(code_of([&] { decode_frame(wire, tight); }), ErrorCode::kProtocol);
  tight = {};
  tight.max_header_bytes = 4;
  EXPECT_EQ(code_of([&] { decode_frame(wire, tight); }), ErrorCode::kProtocol);
}

TEST(Wire, SocketIo) {
  int sv[2];
  ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, sv), 0);
  Socket a(sv[0]), b(sv[1]);
  Frame f;
  f.header = {{"k", "v"}};
  f.payload = Bytes(100000, 7);
  std::thread writer([&] { write_frame(a.fd(), f); });
  const Frame got = read_frame(b.fd());
  writer.join();
  EXPECT_EQ(got.payload, f.payload);
  a.close();
  EXPECT_EQ(code_of([&] { read_frame(b.fd()); }), ErrorCode::kWorkerUnreachable);
}

TEST(Wire, ConnectFailureIsUnreachable) {
  Socket l = listen_tcp("127.0.0.1", 0);
  const std::uint16_t port = local_port(l);
  l.close();
  EXPECT_EQ(code_of([&] {
              connect_tcp("127.0.0.1", port, std::chrono::milliseconds(500));
            }),
            ErrorCode::kWorkerUnreachable);
}

class WorkerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    names_ = generate_fixtures({11, 3, 8, 6}, dir_.path() / "set");
    WorkerConfig c;
    c.scratch_dir = dir_.path();
    c.isolation = testing::test_isolation();
    c.image_dims = {8, 6};
    c.test_sets["default"] = dir_.path() / "set" / "images";
    worker_ = std::make_unique<Worker>(c);
  }

  TempDir dir_{"lpref-worker-test"};
  std::vector<std::string> names_;
  std::unique_ptr<Worker> worker_;
};

TEST_F(WorkerTest, ShipsOutputsWithDigest) {
  const WorkerResponse r = worker_->evaluate(mock_archive({"copy"}), "default", {});
  ASSERT_FALSE(r.setup_error) << r.setup_detail;
  EXPECT_TRUE(r.run.succeeded());
  EXPECT_TRUE(r.collection.ok());
  EXPECT_EQ(r.outputs_digest, content_ref(r.outputs_zip));
  ZipReader zip(r.outputs_zip);
  ASSERT_EQ(zip.entries().size(), names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    EXPECT_EQ(zip.entries()[i].name, names_[i]);
    EXPECT_EQ(decode_label_map(zip.extract(i)),
              decode_label_map(read_file(dir_.path() / "set/ground_truth" / names_[i])));
  }
  // Job directories are cleaned up.
  std::size_t leftovers = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir_.path()))
    if (e.path().filename().string().rfind("lpref-job", 0) == 0) ++leftovers;
  EXPECT_EQ(leftovers, 0u);
}

TEST_F(WorkerTest, ReportsSetupErrorsAndOutputProblems) {
  const WorkerResponse corrupt = worker_->evaluate(Bytes{1, 2, 3}, "default", {});
  ASSERT_TRUE(corrupt.setup_error);
  EXPECT_EQ(*corrupt.setup_error, ErrorCode::kCorruptArchive);

  const WorkerResponse drop = worker_->evaluate(mock_archive({"drop"}), "default", {});
  EXPECT_FALSE(drop.setup_error);
  EXPECT_TRUE(drop.collection.wrong_count());
  EXPECT_TRUE(drop.outputs_zip.empty());

  EXPECT_EQ(code_of([&] { worker_->evaluate(mock_archive({"copy"}), "other", {}); }),
            ErrorCode::kInvalidArgument);
}

TEST_F(WorkerTest, RemoteClientMatchesLocal) {
  auto server = std::make_unique<WorkerServer>(*worker_, "127.0.0.1", 0);
  server->start();
  RemoteWorkerClient client("127.0.0.1", server->port());

  const WorkerResponse r = client.evaluate(mock_archive({"copy"}), "default", {});
  ASSERT_FALSE(r.setup_error) << r.setup_detail;
  EXPECT_EQ(r.run.reported_total_inference->count(), 64860.0);
  EXPECT_EQ(ZipReader(r.outputs_zip).entries().size(), names_.size());

  const WorkerResponse bad = client.evaluate(Bytes{0}, "default", {});
  ASSERT_TRUE(bad.setup_error);
  EXPECT_EQ(*bad.setup_error, ErrorCode::kCorruptArchive);

  const WorkerResponse crash = client.evaluate(mock_archive({"crash"}), "default", {});
  EXPECT_FALSE(crash.run.succeeded());

  EXPECT_EQ(code_of([&] { client.evaluate(mock_archive({"copy"}), "nope", {}); }),
            ErrorCode::kProtocol);
  server.reset();
  EXPECT_EQ(code_of([&] { client.evaluate(mock_archive({"copy"}), "default", {}); }),
            ErrorCode::kWorkerUnreachable);
}

TEST(WorkerResponseCodec, DigestMismatchIsProtocolError) {
  WorkerResponse r;
  r.outputs_zip = {1, 2, 3};
  r.outputs_digest = content_ref(r.outputs_zip);
  Frame f = encode_worker_response(r);
  EXPECT_EQ(decode_worker_response(f).outputs_zip, r.outputs_zip);
  f.payload[0] ^= 1;
  EXPECT_EQ(code_of([&] { decode_worker_response(f); }), ErrorCode::kProtocol);
}

}  // namespace
}  // namespace lpref
