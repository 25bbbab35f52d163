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

// Framing for the orchestrator <-> worker protocol.
//
//   +----------------------+------------------------+-------------------+
//   | u32 big-endian N     | N bytes of JSON header | payload_bytes raw |
//   +----------------------+------------------------+-------------------+
//
// N counts only the header. The header object must carry an unsigned
// "payload_bytes" giving the length of the binary payload that follows.

#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "labelmap.hpp"

namespace lpref {

struct Frame {
  nlohmann::json header = nlohmann::json::object();
  Bytes payload;
};

struct FrameLimits {
  std::uint32_t max_header_bytes = 1u << 20;
  std::uint64_t max_payload_bytes = std::uint64_t(1) << 30;
};

// Sets header["payload_bytes"] from the payload.
Bytes encode_frame(const Frame& frame);

// Throws Error(kProtocol) on malformed or oversized frames, including
// trailing bytes.
Frame decode_frame(ByteView bytes, const FrameLimits& limits = {});

// Blocking socket I/O. Errors surface as Error(kProtocol) with the cause;
// a peer that closes before any byte of the frame arrives yields
// Error(kWorkerUnreachable).
void write_frame(int fd, const Frame& frame);
Frame read_frame(int fd, const FrameLimits& limits = {});

// Owned TCP socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& o) noexcept;
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  void set_receive_timeout(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
};

// Throws Error(kWorkerUnreachable) when no connection can be made.
Socket connect_tcp(const std::string& host, std::uint16_t port,
                   std::chrono::milliseconds timeout);

// Listening socket; port 0 picks a free port.
Socket listen_tcp(const std::string& host, std::uint16_t port);
std::uint16_t local_port(const Socket& s);

}  // namespace lpref
