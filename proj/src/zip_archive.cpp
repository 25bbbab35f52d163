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

#include "zip_archive.hpp"

#include <zlib.h>

#include <algorithm>

namespace lpref {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kEndRecordSize = 22;
constexpr std::size_t kCentralHeaderSize = 46;
constexpr std::size_t kLocalHeaderSize = 30;

[[noreturn]] void corrupt(const std::string& why) {
  throw Error(ErrorCode::kCorruptArchive, "corrupt archive: " + why);
}

std::uint16_t get16(ByteView d, std::size_t off) {
  if (off + 2 > d.size()) corrupt("truncated");
  return std::uint16_t(d[off] | (d[off + 1] << 8));
}

std::uint32_t get32(ByteView d, std::size_t off) {
  if (off + 4 > d.size()) corrupt("truncated");
  return std::uint32_t(d[off]) | (std::uint32_t(d[off + 1]) << 8) |
         (std::uint32_t(d[off + 2]) << 16) | (std::uint32_t(d[off + 3]) << 24);
}

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}

void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t crc_of(ByteView d) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < d.size()) {
    const auto chunk = uInt(std::min<std::size_t>(d.size() - off, 1u << 30));
    crc = crc32(crc, d.data() + off, chunk);
    off += chunk;
  }
  return std::uint32_t(crc);
}

Bytes raw_deflate(ByteView in) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) !=
      Z_OK) {
    throw Error(ErrorCode::kInternal, "deflateInit2 failed");
  }
  Bytes out(deflateBound(&zs, uLong(in.size())));
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = uInt(in.size());
  zs.next_out = out.data();
  zs.avail_out = uInt(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::kInternal, "deflate failed");
  out.resize(zs.total_out);
  return out;
}

Bytes raw_inflate(ByteView in, std::uint64_t expected) {
  Bytes out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
    throw Error(ErrorCode::kInternal, "inflateInit2 failed");
  }
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = uInt(in.size());
  zs.next_out = out.data();
  zs.avail_out = uInt(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) corrupt("bad deflate data");
  return out;
}

}  // namespace

ZipReader::ZipReader(ByteView archive) : data_(archive) {
  if (archive.size() < kEndRecordSize) corrupt("too small");
  // The end record sits in the last 22 + 65535 bytes (comment length).
  const std::size_t lowest =
      archive.size() > kEndRecordSize + 0xFFFF
          ? archive.size() - kEndRecordSize - 0xFFFF
          : 0;
  std::optional<std::size_t> eocd;
  for (std::size_t pos = archive.size() - kEndRecordSize + 1; pos-- > lowest;) {
    if (get32(archive, pos) == kEndSig) {
      eocd = pos;
      break;
    }
  }
  if (!eocd) corrupt("end of central directory not found");
  const std::size_t count = get16(archive, *eocd + 10);
  const std::uint32_t cd_size = get32(archive, *eocd + 12);
  const std::uint32_t cd_offset = get32(archive, *eocd + 16);
  if (count == 0xFFFF || cd_offset == 0xFFFFFFFFu) corrupt("zip64 unsupported");
  if (std::uint64_t(cd_offset) + cd_size > *eocd) {
    corrupt("central directory out of range");
  }

  std::size_t pos = cd_offset;
  entries_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (get32(archive, pos) != kCentralSig) corrupt("bad central header");
    ZipEntry e;
    const std::uint16_t made_by = get16(archive, pos + 4);
    const std::uint16_t flags = get16(archive, pos + 8);
    e.method = get16(archive, pos + 10);
    e.crc32 = get32(archive, pos + 16);
    e.compressed_size = get32(archive, pos + 20);
    e.uncompressed_size = get32(archive, pos + 24);
    const std::uint16_t name_len = get16(archive, pos + 28);
    const std::uint16_t extra_len = get16(archive, pos + 30);
    const std::uint16_t comment_len = get16(archive, pos + 32);
    const std::uint32_t external = get32(archive, pos + 38);
    e.local_header_offset = get32(archive, pos + 42);
    const std::size_t name_at = pos + kCentralHeaderSize;
    if (name_at + name_len > archive.size()) corrupt("truncated name");
    e.name.assign(reinterpret_cast<const char*>(archive.data() + name_at),
                  name_len);
    if (flags & 0x1) corrupt("encrypted entries unsupported");
    if (e.method != 0 && e.method != 8) {
      corrupt("unsupported compression method " + std::to_string(e.method));
    }
    if ((made_by >> 8) == 3) e.unix_mode = external >> 16;  // 3 = unix
    if (e.local_header_offset + kLocalHeaderSize > cd_offset) {
      corrupt("local header out of range");
    }
    entries_.push_back(std::move(e));
    pos = name_at + name_len + extra_len + comment_len;
  }
}

std::optional<std::size_t> ZipReader::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  return std::nullopt;
}

Bytes ZipReader::extract(std::size_t index, std::uint64_t max_size) const {
  const ZipEntry& e = entries_.at(index);
  if (e.uncompressed_size > max_size) {
    throw Error(ErrorCode::kCorruptArchive,
                "entry " + e.name + " exceeds size limit");
  }
  const std::size_t off = e.local_header_offset;
  if (get32(data_, off) != kLocalSig) corrupt("bad local header");
  const std::size_t start =
      off + kLocalHeaderSize + get16(data_, off + 26) + get16(data_, off + 28);
  if (start + e.compressed_size > data_.size()) corrupt("entry out of range");
  const ByteView body = data_.subspan(start, e.compressed_size);
  Bytes out;
  if (e.method == 0) {
    if (e.compressed_size != e.uncompressed_size) corrupt("size mismatch");
    out.assign(body.begin(), body.end());
  } else {
    out = raw_inflate(body, e.uncompressed_size);
  }
  if (crc_of(out) != e.crc32) corrupt("CRC mismatch in " + e.name);
  return out;
}

void ZipWriter::add(const std::string& name, ByteView content, bool deflate,
                    std::uint32_t unix_mode) {
  if (finished_) throw Error(ErrorCode::kInternal, "zip already finished");
  if (content.size() >= 0xFFFFFFFFu || name.size() > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "entry too large for zip32");
  }
  ZipEntry e;
  e.name = name;
  e.crc32 = crc_of(content);
  e.uncompressed_size = content.size();
  e.unix_mode = unix_mode;
  e.local_header_offset = out_.size();

  Bytes packed;
  ByteView body = content;
  if (deflate && !content.empty()) {
    packed = raw_deflate(content);
    if (packed.size() < content.size()) {
      e.method = 8;
      body = packed;
    }
  }
  e.compressed_size = body.size();
  if (out_.size() + body.size() + name.size() + kLocalHeaderSize >=
      0xFFFFFFFFu) {
    throw Error(ErrorCode::kInvalidArgument, "archive too large for zip32");
  }

  put32(out_, kLocalSig);
  put16(out_, 20);  // version needed
  put16(out_, 0);   // flags
  put16(out_, e.method);
  put16(out_, 0);       // mod time
  put16(out_, 0x21);    // mod date: 1980-01-01
  put32(out_, e.crc32);
  put32(out_, std::uint32_t(e.compressed_size));
  put32(out_, std::uint32_t(e.uncompressed_size));
  put16(out_, std::uint16_t(name.size()));
  put16(out_, 0);
  out_.insert(out_.end(), name.begin(), name.end());
  out_.insert(out_.end(), body.begin(), body.end());
  central_.push_back(std::move(e));
}

Bytes ZipWriter::finish() {
  if (finished_) throw Error(ErrorCode::kInternal, "zip already finished");
  finished_ = true;
  if (central_.size() >= 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "too many entries for zip32");
  }
  const std::size_t cd_start = out_.size();
  for (const ZipEntry& e : central_) {
    put32(out_, kCentralSig);
    put16(out_, (3 << 8) | 20);  // made by unix, spec 2.0
    put16(out_, 20);
    put16(out_, 0);
    put16(out_, e.method);
    put16(out_, 0);
    put16(out_, 0x21);
    put32(out_, e.crc32);
    put32(out_, std::uint32_t(e.compressed_size));
    put32(out_, std::uint32_t(e.uncompressed_size));
    put16(out_, std::uint16_t(e.name.size()));
    put16(out_, 0);  // extra
    put16(out_, 0);  // comment
    put16(out_, 0);  // disk
    put16(out_, 0);  // internal attrs
    put32(out_, e.unix_mode << 16);
    put32(out_, std::uint32_t(e.local_header_offset));
    out_.insert(out_.end(), e.name.begin(), e.name.end());
  }
  const std::size_t cd_size = out_.size() - cd_start;
  put32(out_, kEndSig);
  put16(out_, 0);
  put16(out_, 0);
  put16(out_, std::uint16_t(central_.size()));
  put16(out_, std::uint16_t(central_.size()));
  put32(out_, std::uint32_t(cd_size));
  put32(out_, std::uint32_t(cd_start));
  put16(out_, 0);
  return std::move(out_);
}

}  // namespace lpref
