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

#include "wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

namespace lpref {

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorCode::kProtocol, "wire protocol: " + what);
}

std::uint64_t payload_length(const nlohmann::json& header,
                             const FrameLimits& limits) {
  if (!header.is_object()) protocol_error("header is not a JSON object");
  const auto it = header.find("payload_bytes");
  if (it == header.end() || !it->is_number_unsigned()) {
    protocol_error("header lacks unsigned payload_bytes");
  }
  const auto n = it->get<std::uint64_t>();
  if (n > limits.max_payload_bytes) protocol_error("payload too large");
  return n;
}

nlohmann::json parse_header(const char* data, std::size_t n) {
  try {
    return nlohmann::json::parse(data, data + n);
  } catch (const nlohmann::json::exception& e) {
    protocol_error(std::string("bad header JSON: ") + e.what());
  }
}

// Returns false on orderly EOF before any byte was read.
bool read_exact(int fd, void* buf, std::size_t n, bool eof_ok) {
  auto* p = static_cast<char*>(buf);
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, p + got, n - got, 0);
    if (r > 0) {
      got += std::size_t(r);
      continue;
    }
    if (r == 0) {
      if (eof_ok && got == 0) return false;
      protocol_error("connection closed mid-frame");
    }
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) protocol_error("read timed out");
    protocol_error(std::string("recv: ") + std::strerror(errno));
  }
  return true;
}

void write_all(int fd, const void* buf, std::size_t n) {
  const auto* p = static_cast<const char*>(buf);
  std::size_t sent = 0;
  while (sent < n) {
    const ssize_t w = ::send(fd, p + sent, n - sent, MSG_NOSIGNAL);
    if (w > 0) {
      sent += std::size_t(w);
      continue;
    }
    if (w < 0 && errno == EINTR) continue;
    protocol_error(std::string("send: ") + std::strerror(errno));
  }
}

std::string header_bytes(const Frame& frame) {
  nlohmann::json header = frame.header;
  header["payload_bytes"] = std::uint64_t(frame.payload.size());
  return header.dump();
}

}  // namespace

Bytes encode_frame(const Frame& frame) {
  const std::string header = header_bytes(frame);
  const auto n = std::uint32_t(header.size());
  Bytes out;
  out.reserve(4 + header.size() + frame.payload.size());
  out.push_back(std::uint8_t(n >> 24));
  out.push_back(std::uint8_t(n >> 16));
  out.push_back(std::uint8_t(n >> 8));
  out.push_back(std::uint8_t(n));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame decode_frame(ByteView bytes, const FrameLimits& limits) {
  if (bytes.size() < 4) protocol_error("truncated length prefix");
  const std::uint32_t n = (std::uint32_t(bytes[0]) << 24) |
                          (std::uint32_t(bytes[1]) << 16) |
                          (std::uint32_t(bytes[2]) << 8) | bytes[3];
  if (n > limits.max_header_bytes) protocol_error("header too large");
  if (bytes.size() - 4 < n) protocol_error("truncated header");
  Frame frame;
  frame.header =
      parse_header(reinterpret_cast<const char*>(bytes.data() + 4), n);
  const std::uint64_t len = payload_length(frame.header, limits);
  if (bytes.size() - 4 - n != len) protocol_error("payload length mismatch");
  frame.payload.assign(bytes.begin() + 4 + n, bytes.end());
  return frame;
}

void write_frame(int fd, const Frame& frame) {
  const std::string header = header_bytes(frame);
  const auto n = std::uint32_t(header.size());
  const std::uint8_t prefix[4] = {std::uint8_t(n >> 24), std::uint8_t(n >> 16),
                                  std::uint8_t(n >> 8), std::uint8_t(n)};
  write_all(fd, prefix, 4);
  write_all(fd, header.data(), header.size());
  write_all(fd, frame.payload.data(), frame.payload.size());
}

Frame read_frame(int fd, const FrameLimits& limits) {
  std::uint8_t prefix[4];
  if (!read_exact(fd, prefix, 4, /*eof_ok=*/true)) {
    throw Error(ErrorCode::kWorkerUnreachable, "peer closed the connection");
  }
  const std::uint32_t n = (std::uint32_t(prefix[0]) << 24) |
                          (std::uint32_t(prefix[1]) << 16) |
                          (std::uint32_t(prefix[2]) << 8) | prefix[3];
  if (n > limits.max_header_bytes) protocol_error("header too large");
  std::string header(n, '\0');
  read_exact(fd, header.data(), n, false);
  Frame frame;
  frame.header = parse_header(header.data(), header.size());
  const std::uint64_t len = payload_length(frame.header, limits);
  frame.payload.resize(len);
  read_exact(fd, frame.payload.data(), len, false);
  return frame;
}

Socket::~Socket() { close(); }

Socket::Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = std::exchange(o.fd_, -1);
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::set_receive_timeout(std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = timeout.count() / 1000;
  tv.tv_usec = (timeout.count() % 1000) * 1000;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

Socket connect_tcp(const std::string& host, std::uint16_t port,
                   std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  const int gai = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res);
  if (gai != 0) {
    throw Error(ErrorCode::kWorkerUnreachable,
                "cannot resolve " + host + ": " + ::gai_strerror(gai));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC,
                      ai->ai_protocol));
    if (!s.valid()) continue;
    const int flags = ::fcntl(s.fd(), F_GETFL);
    ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{s.fd(), POLLOUT, 0};
      rc = ::poll(&pfd, 1, int(timeout.count()));
      if (rc == 1) {
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
        errno = err;
      } else {
        if (rc == 0) errno = ETIMEDOUT;
        rc = -1;
      }
    }
    if (rc == 0) {
      ::fcntl(s.fd(), F_SETFL, flags);
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      ::freeaddrinfo(res);
      return s;
    }
    last_error = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  throw Error(ErrorCode::kWorkerUnreachable, "cannot connect to " + host +
                                                 ":" + port_str + ": " +
                                                 last_error);
}

Socket listen_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  const int gai = ::getaddrinfo(host.empty() ? nullptr : host.c_str(),
                                port_str.c_str(), &hints, &res);
  if (gai != 0) {
    throw Error(ErrorCode::kIo, "cannot resolve " + host + ": " +
                                    ::gai_strerror(gai));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC,
                      ai->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 &&
        ::listen(s.fd(), 16) == 0) {
      ::freeaddrinfo(res);
      return s;
    }
    last_error = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + port_str +
                                  ": " + last_error);
}

std::uint16_t local_port(const Socket& s) {
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0)
    return 0;
  if (addr.ss_family == AF_INET)
    return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  if (addr.ss_family == AF_INET6)
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  return 0;
}

}  // namespace lpref
