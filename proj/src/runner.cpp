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

#include "runner.hpp"

#include <fcntl.h>
#include <linux/landlock.h>
#include <poll.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <regex>
#include <set>

#include "fsutil.hpp"
#include "zip_archive.hpp"

extern char** environ;

namespace lpref {

namespace {

using Clock = std::chrono::steady_clock;

// Newer access rights, missing from older kernel headers.
#ifndef LANDLOCK_ACCESS_FS_REFER
#define LANDLOCK_ACCESS_FS_REFER (1ULL << 13)
#endif
#ifndef LANDLOCK_ACCESS_FS_TRUNCATE
#define LANDLOCK_ACCESS_FS_TRUNCATE (1ULL << 14)
#endif

// ---------------------------------------------------------------------------
// Landlock

int landlock_abi() {
#ifdef SYS_landlock_create_ruleset
  const long abi = syscall(SYS_landlock_create_ruleset, nullptr, 0,
                           LANDLOCK_CREATE_RULESET_VERSION);
  return abi < 0 ? 0 : int(abi);
#else
  return 0;
#endif
}

// Ruleset built in the parent; the child only has to call restrict().
class WriteSandbox {
 public:
  WriteSandbox(const std::vector<fs::path>& writable_dirs) {
    const int abi = landlock_abi();
    if (abi < 1) {
      throw Error(ErrorCode::kSpawnFailure,
                  "landlock isolation requested but not supported by kernel");
    }
    std::uint64_t dir_rights =
        LANDLOCK_ACCESS_FS_WRITE_FILE | LANDLOCK_ACCESS_FS_REMOVE_DIR |
        LANDLOCK_ACCESS_FS_REMOVE_FILE | LANDLOCK_ACCESS_FS_MAKE_CHAR |
        LANDLOCK_ACCESS_FS_MAKE_DIR | LANDLOCK_ACCESS_FS_MAKE_REG |
        LANDLOCK_ACCESS_FS_MAKE_SOCK | LANDLOCK_ACCESS_FS_MAKE_FIFO |
        LANDLOCK_ACCESS_FS_MAKE_BLOCK | LANDLOCK_ACCESS_FS_MAKE_SYM;
    std::uint64_t file_rights = LANDLOCK_ACCESS_FS_WRITE_FILE;
    if (abi >= 2) dir_rights |= LANDLOCK_ACCESS_FS_REFER;
    if (abi >= 3) {
      dir_rights |= LANDLOCK_ACCESS_FS_TRUNCATE;
      file_rights |= LANDLOCK_ACCESS_FS_TRUNCATE;
    }

    landlock_ruleset_attr attr{};
    attr.handled_access_fs = dir_rights;
    ruleset_fd_ = int(syscall(SYS_landlock_create_ruleset, &attr,
                              sizeof(attr), 0));
    if (ruleset_fd_ < 0) fail("landlock_create_ruleset");

    for (const auto& dir : writable_dirs) add(dir, dir_rights);
    add("/dev/null", file_rights);
  }

  ~WriteSandbox() {
    if (ruleset_fd_ >= 0) ::close(ruleset_fd_);
  }
  WriteSandbox(const WriteSandbox&) = delete;
  WriteSandbox& operator=(const WriteSandbox&) = delete;

  // Async-signal-safe; called between fork and exec.
  bool restrict_self() const {
    if (prctl(PR_SET_NO_NEW_PRIVS, 1, 0, 0, 0) != 0) return false;
    return syscall(SYS_landlock_restrict_self, ruleset_fd_, 0) == 0;
  }

 private:
  void add(const fs::path& path, std::uint64_t rights) {
    const int fd = ::open(path.c_str(), O_PATH | O_CLOEXEC);
    if (fd < 0) fail("open " + path.string());
    landlock_path_beneath_attr rule{};
    rule.allowed_access = rights;
    rule.parent_fd = fd;
    const long rc = syscall(SYS_landlock_add_rule, ruleset_fd_,
                            LANDLOCK_RULE_PATH_BENEATH, &rule, 0);
    ::close(fd);
    if (rc != 0) fail("landlock_add_rule " + path.string());
  }

  [[noreturn]] void fail(const std::string& what) {
    const std::string msg = what + ": " + std::strerror(errno);
    if (ruleset_fd_ >= 0) ::close(ruleset_fd_);
    ruleset_fd_ = -1;
    throw Error(ErrorCode::kSpawnFailure, msg);
  }

  int ruleset_fd_ = -1;
};

// ---------------------------------------------------------------------------
// Process plumbing

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kSpawnFailure,
                std::string("pipe2: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

// Keeps at most `limit` trailing bytes.
class TailBuffer {
 public:
  explicit TailBuffer(std::size_t limit) : limit_(limit) {}
  void append(const char* data, std::size_t n) {
    buf_.append(data, n);
    if (buf_.size() > 2 * limit_) buf_.erase(0, buf_.size() - limit_);
  }
  std::string take() {
    if (buf_.size() > limit_) buf_.erase(0, buf_.size() - limit_);
    return std::move(buf_);
  }

 private:
  std::size_t limit_;
  std::string buf_;
};

constexpr std::size_t kStderrTail = 16 * 1024;

std::uint64_t directory_bytes(const fs::path& dir) {
  std::uint64_t total = 0;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(dir, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    std::error_code size_ec;
    if (it->is_regular_file(size_ec)) total += it->file_size(size_ec);
  }
  return total;
}

bool path_within(const fs::path& root, const fs::path& candidate) {
  const auto rel = candidate.lexically_normal().lexically_relative(
      root.lexically_normal());
  if (rel.empty()) return false;
  auto first = rel.begin();
  return *first != ".." && !rel.is_absolute();
}

bool unsafe_entry_name(const std::string& name) {
  if (name.empty() || name.front() == '/' ||
      name.find('\\') != std::string::npos ||
      name.find('\0') != std::string::npos) {
    return true;
  }
  for (const auto& part : fs::path(name))
    if (part == "..") return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------

void RunLimits::validate() const {
  if (wall_clock_timeout.count() <= 0 || max_output_bytes == 0 ||
      max_stdout_bytes == 0) {
    throw Error(ErrorCode::kInvalidArgument, "run limits must be positive");
  }
}

nlohmann::json to_json(const RunLimits& limits) {
  return {{"wall_clock_timeout_ms", limits.wall_clock_timeout.count()},
          {"max_output_bytes", limits.max_output_bytes},
          {"max_stdout_bytes", limits.max_stdout_bytes}};
}

RunLimits run_limits_from_json(const nlohmann::json& j) {
  RunLimits limits;
  if (j.contains("wall_clock_timeout_ms")) {
    limits.wall_clock_timeout =
        std::chrono::milliseconds(j.at("wall_clock_timeout_ms").get<long>());
  }
  if (j.contains("max_output_bytes"))
    limits.max_output_bytes = j.at("max_output_bytes").get<std::uint64_t>();
  if (j.contains("max_stdout_bytes"))
    limits.max_stdout_bytes = j.at("max_stdout_bytes").get<std::uint64_t>();
  limits.validate();
  return limits;
}

nlohmann::json to_json(const RunResult& r) {
  nlohmann::json j{{"exit_status", r.exit_status},
                   {"timed_out", r.timed_out},
                   {"wall_clock_ms", r.wall_clock.count()},
                   {"reported_total_inference_ms", nullptr},
                   {"stdout_tail", r.stdout_tail},
                   {"stderr_tail", r.stderr_tail},
                   {"produced_files", r.produced_files},
                   {"output_limit_exceeded", r.output_limit_exceeded}};
  if (r.reported_total_inference)
    j["reported_total_inference_ms"] = r.reported_total_inference->count();
  if (r.sentinel_error) j["sentinel_error"] = *r.sentinel_error;
  return j;
}

RunResult run_result_from_json(const nlohmann::json& j) {
  RunResult r;
  r.exit_status = j.at("exit_status").get<int>();
  r.timed_out = j.value("timed_out", false);
  r.wall_clock = Milliseconds(j.at("wall_clock_ms").get<double>());
  const auto& rep = j.at("reported_total_inference_ms");
  if (!rep.is_null()) r.reported_total_inference = Milliseconds(rep.get<double>());
  if (j.contains("sentinel_error"))
    r.sentinel_error = j.at("sentinel_error").get<std::string>();
  r.stdout_tail = j.value("stdout_tail", "");
  r.stderr_tail = j.value("stderr_tail", "");
  r.produced_files =
      j.value("produced_files", std::vector<std::string>{});
  r.output_limit_exceeded = j.value("output_limit_exceeded", false);
  if (r.wall_clock.count() < 0 ||
      (r.reported_total_inference && r.reported_total_inference->count() < 0)) {
    throw Error(ErrorCode::kProtocol, "negative time in run result");
  }
  return r;
}

Isolation isolation_from_string(std::string_view s) {
  if (s == "none") return Isolation::kNone;
  if (s == "landlock") return Isolation::kLandlock;
  throw Error(ErrorCode::kConfig,
              "unknown isolation mode '" + std::string(s) + "'");
}

bool landlock_supported() { return landlock_abi() >= 1; }

SolutionManifest parse_manifest(std::string_view json_text,
                                const fs::path& root) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kManifestInvalid,
                std::string("manifest.json is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kManifestInvalid, "manifest.json must be an object");
  }
  SolutionManifest m;
  m.root = root;
  const auto cmd = j.find("entry_command");
  if (cmd == j.end() || !cmd->is_array() || cmd->empty()) {
    throw Error(ErrorCode::kManifestInvalid,
                "entry_command must be a non-empty array of strings");
  }
  for (const auto& arg : *cmd) {
    if (!arg.is_string()) {
      throw Error(ErrorCode::kManifestInvalid,
                  "entry_command must contain only strings");
    }
    m.entry_command.push_back(arg.get<std::string>());
  }
  for (auto [key, field] : {std::pair{"name", &m.name},
                            std::pair{"declared_runtime", &m.declared_runtime}}) {
    const auto it = j.find(key);
    if (it == j.end()) continue;
    if (!it->is_string()) {
      throw Error(ErrorCode::kManifestInvalid,
                  std::string(key) + " must be a string");
    }
    *field = it->get<std::string>();
  }

  const std::string& exe = m.entry_command.front();
  if (exe.empty() || exe.front() == '/' || unsafe_entry_name(exe)) {
    throw Error(ErrorCode::kPathEscape,
                "entry executable '" + exe + "' is outside the archive root");
  }
  std::error_code ec;
  const fs::path canon_root = fs::weakly_canonical(root, ec);
  const fs::path resolved = fs::weakly_canonical(root / exe, ec);
  if (ec || !path_within(canon_root, resolved)) {
    throw Error(ErrorCode::kPathEscape,
                "entry executable '" + exe + "' is outside the archive root");
  }
  if (!fs::is_regular_file(resolved, ec)) {
    throw Error(ErrorCode::kManifestInvalid,
                "entry executable '" + exe + "' not found in archive");
  }
  return m;
}

SolutionManifest unpack_archive(ByteView archive, const fs::path& dest,
                                std::uint64_t max_unpacked_bytes) {
  ZipReader zip(archive);
  std::uint64_t total = 0;
  for (const auto& e : zip.entries()) {
    if (unsafe_entry_name(e.name)) {
      throw Error(ErrorCode::kPathEscape,
                  "archive entry '" + e.name + "' escapes the destination");
    }
    total += e.uncompressed_size;
  }
  if (total > max_unpacked_bytes) {
    throw Error(ErrorCode::kCorruptArchive,
                "archive expands beyond " + std::to_string(max_unpacked_bytes) +
                    " bytes");
  }
  if (!zip.find(std::string(kManifestName))) {
    throw Error(ErrorCode::kMissingManifest,
                "archive has no manifest.json at its root");
  }

  fs::create_directories(dest);
  const fs::path root = fs::canonical(dest);
  for (std::size_t i = 0; i < zip.entries().size(); ++i) {
    const ZipEntry& e = zip.entries()[i];
    const fs::path target = root / e.name;
    if (!path_within(root, target)) {
      throw Error(ErrorCode::kPathEscape,
                  "archive entry '" + e.name + "' escapes the destination");
    }
    if (e.is_directory()) {
      fs::create_directories(target);
      continue;
    }
    fs::create_directories(target.parent_path());
    const Bytes content = zip.extract(i, max_unpacked_bytes);
    write_file(target, content);
    if (e.unix_mode != 0 && S_ISREG(e.unix_mode)) {
      ::chmod(target.c_str(), e.unix_mode & 0755);
    }
  }

  SolutionManifest m =
      parse_manifest(read_text_file(root / kManifestName), root);
  // Archives built on systems without unix modes lose the exec bit.
  const fs::path exe = root / m.entry_command.front();
  fs::permissions(exe,
                  fs::perms::owner_exec | fs::perms::group_exec |
                      fs::perms::others_exec,
                  fs::perm_options::add);
  return m;
}

RunResult execute_solution(const SolutionManifest& manifest,
                           const fs::path& input_dir,
                           const fs::path& output_dir, const RunLimits& limits,
                           Isolation isolation) {
  limits.validate();
  if (manifest.entry_command.empty()) {
    throw Error(ErrorCode::kManifestInvalid, "empty entry_command");
  }
  const fs::path root = fs::canonical(manifest.root);
  const fs::path in_abs = fs::canonical(input_dir);
  const fs::path out_abs = fs::canonical(output_dir);
  const fs::path tmp_dir = root / ".tmp";
  fs::create_directories(tmp_dir);

  // Everything the child needs is prepared here: after fork only
  // async-signal-safe calls are allowed.
  const std::string exe = (root / manifest.entry_command.front()).string();
  std::vector<std::string> args = manifest.entry_command;
  args.push_back(in_abs.string());
  args.push_back(out_abs.string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  std::vector<std::string> env_storage;
  for (char** e = environ; e && *e; ++e) {
    if (std::strncmp(*e, "TMPDIR=", 7) != 0) env_storage.emplace_back(*e);
  }
  env_storage.push_back("TMPDIR=" + tmp_dir.string());
  std::vector<char*> envp;
  for (auto& e : env_storage) envp.push_back(e.data());
  envp.push_back(nullptr);

  std::optional<WriteSandbox> sandbox;
  if (isolation == Isolation::kLandlock) sandbox.emplace(std::vector{out_abs, root});

  const int devnull = ::open("/dev/null", O_RDONLY | O_CLOEXEC);
  if (devnull < 0) {
    throw Error(ErrorCode::kSpawnFailure, "cannot open /dev/null");
  }
  Fd devnull_fd(devnull);
  auto [out_r, out_w] = make_pipe();
  auto [err_r, err_w] = make_pipe();
  auto [exec_r, exec_w] = make_pipe();

  rlimit fsize{};
  fsize.rlim_cur = fsize.rlim_max = rlim_t(limits.max_output_bytes);
  rlimit no_core{};

  const auto start = Clock::now();
  const pid_t pid = fork();
  if (pid < 0) {
    throw Error(ErrorCode::kSpawnFailure,
                std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(devnull_fd.get(), STDIN_FILENO);
    dup2(out_w.get(), STDOUT_FILENO);
    dup2(err_w.get(), STDERR_FILENO);
    setrlimit(RLIMIT_FSIZE, &fsize);
    setrlimit(RLIMIT_CORE, &no_core);
    signal(SIGPIPE, SIG_DFL);
    int err = 0;
    if (chdir(root.c_str()) != 0) err = errno;
    if (!err && sandbox && !sandbox->restrict_self()) err = errno ? errno : EPERM;
    if (!err) {
      execve(exe.c_str(), argv.data(), envp.data());
      err = errno;
    }
    [[maybe_unused]] auto n = ::write(exec_w.get(), &err, sizeof(err));
    _exit(127);
  }
  setpgid(pid, pid);
  out_w.reset();
  err_w.reset();
  exec_w.reset();

  int child_errno = 0;
  const ssize_t got = ::read(exec_r.get(), &child_errno, sizeof(child_errno));
  if (got == sizeof(child_errno)) {
    int status = 0;
    waitpid(pid, &status, 0);
    throw Error(ErrorCode::kSpawnFailure, "cannot start '" + exe +
                                              "': " + std::strerror(child_errno));
  }

  TailBuffer out_tail(limits.max_stdout_bytes);
  TailBuffer err_tail(kStderrTail);
  const auto deadline = start + limits.wall_clock_timeout;
  bool exited = false;
  bool timed_out = false;
  int status = 0;
  Clock::time_point end{};
  pollfd fds[2] = {{out_r.get(), POLLIN, 0}, {err_r.get(), POLLIN, 0}};
  bool open_streams[2] = {true, true};
  char buf[65536];

  auto drain = [&](int idx, TailBuffer& tail) {
    const ssize_t n = ::read(fds[idx].fd, buf, sizeof(buf));
    if (n > 0) {
      tail.append(buf, std::size_t(n));
    } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
      open_streams[idx] = false;
      fds[idx].fd = -1;
    }
  };

  while (!exited || open_streams[0] || open_streams[1]) {
    if (!exited) {
      const pid_t w = waitpid(pid, &status, WNOHANG);
      if (w == pid) {
        exited = true;
        end = Clock::now();
        // Stragglers in the process group would otherwise hold the pipes.
        kill(-pid, SIGKILL);
      } else if (Clock::now() >= deadline) {
        timed_out = true;
        kill(-pid, SIGKILL);
        waitpid(pid, &status, 0);
        exited = true;
        end = Clock::now();
      }
    }
    if (!open_streams[0] && !open_streams[1]) {
      // Streams closed but the child is still running.
      poll(nullptr, 0, 10);
      continue;
    }
    const int rc = poll(fds, 2, exited ? 50 : 20);
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) {
      if (exited && rc == 0) {
        // Group killed above; anything still open is a leaked descriptor.
        open_streams[0] = open_streams[1] = false;
      }
      continue;
    }
    if (fds[0].fd >= 0 && (fds[0].revents & (POLLIN | POLLHUP | POLLERR)))
      drain(0, out_tail);
    if (fds[1].fd >= 0 && (fds[1].revents & (POLLIN | POLLHUP | POLLERR)))
      drain(1, err_tail);
  }

  RunResult result;
  result.timed_out = timed_out;
  if (timed_out) {
    result.exit_status = 128 + SIGKILL;
  } else if (WIFEXITED(status)) {
    result.exit_status = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_status = 128 + WTERMSIG(status);
  } else {
    result.exit_status = -1;
  }
  result.wall_clock =
      std::chrono::duration_cast<Milliseconds>(end - start);
  result.stdout_tail = out_tail.take();
  result.stderr_tail = err_tail.take();
  try {
    result.reported_total_inference = parse_reported_time(result.stdout_tail);
  } catch (const Error& e) {
    result.sentinel_error = e.what();
  }

  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(out_abs, ec)) {
    result.produced_files.push_back(entry.path().filename().string());
  }
  std::sort(result.produced_files.begin(), result.produced_files.end());
  result.output_limit_exceeded =
      directory_bytes(out_abs) > limits.max_output_bytes;
  return result;
}

std::optional<Milliseconds> parse_reported_time(std::string_view text) {
  std::optional<std::string_view> last;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.substr(0, kSentinelPrefix.size()) == kSentinelPrefix) last = line;
    pos = eol + 1;
  }
  if (!last) return std::nullopt;

  std::string_view value = last->substr(kSentinelPrefix.size());
  while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
    value.remove_prefix(1);
  while (!value.empty() && (value.back() == ' ' || value.back() == '\t'))
    value.remove_suffix(1);

  static const std::regex kDecimal(R"(^([0-9]+(\.[0-9]*)?|\.[0-9]+)$)");
  if (!std::regex_match(value.begin(), value.end(), kDecimal)) {
    throw Error(ErrorCode::kMalformedSentinel,
                "malformed inference time line: '" + std::string(*last) + "'");
  }
  double ms = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), ms);
  if (ec != std::errc() || ptr != value.data() + value.size() ||
      !std::isfinite(ms)) {
    throw Error(ErrorCode::kMalformedSentinel,
                "malformed inference time line: '" + std::string(*last) + "'");
  }
  return Milliseconds(ms);
}

std::string CollectReport::describe() const {
  std::string out;
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    const std::size_t shown = std::min<std::size_t>(v.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) s += (i ? ", " : "") + v[i];
    if (v.size() > shown) s += ", ... (" + std::to_string(v.size()) + " total)";
    return s;
  };
  if (!missing.empty()) out += "missing: " + list(missing);
  if (!extra.empty()) out += (out.empty() ? "" : "; ") + std::string("extra: ") + list(extra);
  for (std::size_t i = 0; i < failures.size() && i < 5; ++i) {
    out += (out.empty() ? "" : "; ") + failures[i].name + ": " +
           failures[i].detail;
  }
  if (failures.size() > 5)
    out += "; ... (" + std::to_string(failures.size()) + " invalid files)";
  return out.empty() ? "ok" : out;
}

nlohmann::json to_json(const CollectReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"name", f.name}, {"detail", f.detail}});
  return {{"missing", r.missing}, {"extra", r.extra}, {"failures", failures}};
}

CollectReport collect_report_from_json(const nlohmann::json& j) {
  CollectReport r;
  r.missing = j.at("missing").get<std::vector<std::string>>();
  r.extra = j.at("extra").get<std::vector<std::string>>();
  for (const auto& f : j.at("failures"))
    r.failures.push_back({f.at("name").get<std::string>(),
                          f.at("detail").get<std::string>()});
  return r;
}

CollectReport check_outputs(
    const fs::path& output_dir, const std::vector<std::string>& expected_names,
    Dimensions expected,
    const std::function<void(std::size_t, const std::string&, LabelMap&&)>&
        visit) {
  CollectReport report;
  std::set<std::string> present;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(output_dir, ec))
    present.insert(entry.path().filename().string());
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot list " + output_dir.string() + ": " +
                                    ec.message());
  }
  const std::set<std::string> wanted(expected_names.begin(),
                                     expected_names.end());
  for (const auto& name : expected_names)
    if (!present.count(name)) report.missing.push_back(name);
  for (const auto& name : present)
    if (!wanted.count(name)) report.extra.push_back(name);

  for (std::size_t i = 0; i < expected_names.size(); ++i) {
    const std::string& name = expected_names[i];
    if (!present.count(name)) continue;
    const fs::path file = output_dir / name;
    if (!fs::is_regular_file(file, ec)) {
      report.failures.push_back({name, "not a regular file"});
      continue;
    }
    try {
      LabelMap map = decode_label_map(read_file(file));
      const DimensionCheck check = validate_dimensions(map, expected);
      if (!check.ok()) {
        report.failures.push_back(
            {name, "dimension mismatch: got " + to_string(check.actual) +
                       ", expected " + to_string(check.expected)});
        continue;
      }
      if (visit) visit(i, name, std::move(map));
    } catch (const Error& e) {
      report.failures.push_back({name, e.what()});
    }
  }
  return report;
}

CollectedOutputs collect_outputs(const fs::path& output_dir,
                                 const std::vector<std::string>& expected_names,
                                 Dimensions expected) {
  CollectedOutputs out;
  std::vector<std::optional<LabelMap>> slots(expected_names.size());
  out.report = check_outputs(
      output_dir, expected_names, expected,
      [&](std::size_t i, const std::string&, LabelMap&& map) {
        slots[i].emplace(std::move(map));
      });
  if (out.report.ok()) {
    out.maps.reserve(slots.size());
    for (auto& s : slots) out.maps.push_back(std::move(*s));
  }
  return out;
}

std::vector<std::string> expected_output_names(const fs::path& input_dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(input_dir, ec)) {
    if (!entry.is_regular_file()) continue;
    names.push_back(entry.path().stem().string() + ".png");
  }
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot list " + input_dir.string() + ": " + ec.message());
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

}  // namespace lpref
