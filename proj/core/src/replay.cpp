// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/replay.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <sys/stat.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "retrace/error.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif

namespace retrace {
namespace {

constexpr uint64_t kSectorBytes = 512;
constexpr size_t kBufferAlign = 4096;

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit_open(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// One gaussian sample fully determined by (seed, index).
double hashed_gaussian(uint64_t seed, uint64_t index) {
  uint64_t s = splitmix64(seed ^ splitmix64(index));
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(a);
  double u1 = unit_open(a);
  double u2 = unit_open(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double parse_double_value(std::string_view text) {
  char buf[64];
  size_t n = std::min(text.size(), sizeof(buf) - 1);
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
  char* end = nullptr;
  double v = std::strtod(buf, &end);
  if (end == buf) fail(Errc::IoError, "bad numeric value in device params: " + std::string(text));
  return v;
}

void append_double(std::string& out, const char* key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out += key;
  out += '=';
  out += buf;
  out += '\n';
}

struct StopClock {
  std::chrono::steady_clock::time_point base;
  uint64_t now_ns() const {
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                     std::chrono::steady_clock::now() - base)
                                     .count());
  }
};

void precise_wait(const StopClock& clock, uint64_t deadline_ns, uint64_t spin_window_ns) {
  for (;;) {
    uint64_t now = clock.now_ns();
    if (now >= deadline_ns) return;
    uint64_t remaining = deadline_ns - now;
    if (remaining > spin_window_ns) {
      std::this_thread::sleep_for(std::chrono::nanoseconds(remaining - spin_window_ns));
    } else {
      break;
    }
  }
  while (clock.now_ns() < deadline_ns) {
#if defined(__x86_64__) || defined(_M_X64)
    _mm_pause();
#endif
  }
}

}  // namespace

SimulatedParams sim_params_from_text(std::string_view text) {
  SimulatedParams params;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(Errc::IoError, "bad device params line: " + std::string(line));
    std::string_view key = line.substr(0, eq);
    std::string_view value = line.substr(eq + 1);
    if (key == "read_ns_per_sector") {
      params.read_ns_per_sector = parse_double_value(value);
    } else if (key == "write_ns_per_sector") {
      params.write_ns_per_sector = parse_double_value(value);
    } else if (key == "fixed_read_ns") {
      params.fixed_read_ns = parse_double_value(value);
    } else if (key == "fixed_write_ns") {
      params.fixed_write_ns = parse_double_value(value);
    } else if (key == "fixed_ns") {
      params.fixed_read_ns = parse_double_value(value);
      params.fixed_write_ns = params.fixed_read_ns;
    } else if (key == "movd_ns") {
      params.movd_ns = parse_double_value(value);
    } else if (key == "jitter_sigma_ns") {
      params.jitter_sigma_ns = parse_double_value(value);
    } else if (key == "seed") {
      params.seed = static_cast<uint64_t>(parse_double_value(value));
    } else {
      fail(Errc::IoError, "unknown device param: " + std::string(key));
    }
  }
  return params;
}

std::string sim_params_to_text(const SimulatedParams& params) {
  std::string out;
  append_double(out, "read_ns_per_sector", params.read_ns_per_sector);
  append_double(out, "write_ns_per_sector", params.write_ns_per_sector);
  append_double(out, "fixed_read_ns", params.fixed_read_ns);
  append_double(out, "fixed_write_ns", params.fixed_write_ns);
  append_double(out, "movd_ns", params.movd_ns);
  append_double(out, "jitter_sigma_ns", params.jitter_sigma_ns);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(params.seed));
  out += "seed=";
  out += buf;
  out += '\n';
  return out;
}

SimulatedParams read_sim_params(const std::filesystem::path& path) {
  std::string text;
  {
    FILE* f = std::fopen(path.string().c_str(), "rb");
    if (!f) fail(Errc::IoError, "cannot open device params: " + path.string());
    char chunk[4096];
    size_t n;
    while ((n = std::fread(chunk, 1, sizeof(chunk), f)) > 0) text.append(chunk, n);
    std::fclose(f);
  }
  return sim_params_from_text(text);
}

double SimulatedBackend::model_service(OpType op, uint32_t size_sectors,
                                       Sequentiality seq) const {
  double slope = op == OpType::Read ? params_.read_ns_per_sector : params_.write_ns_per_sector;
  double fixed = op == OpType::Read ? params_.fixed_read_ns : params_.fixed_write_ns;
  double service = slope * static_cast<double>(size_sectors) + fixed;
  if (seq == Sequentiality::Random) service += params_.movd_ns;
  return service;
}

uint64_t SimulatedBackend::execute(const IoRecord& rec, size_t index, Sequentiality seq) {
  double service = model_service(rec.op, rec.size_sectors, seq);
  if (params_.jitter_sigma_ns > 0) {
    service += params_.jitter_sigma_ns * hashed_gaussian(params_.seed, index);
  }
  if (service < 0) service = 0;
  return static_cast<uint64_t>(std::llround(service));
}

RealFileBackend::RealFileBackend(const std::filesystem::path& path, bool direct_io) {
  int flags = O_RDWR;
#ifdef O_DIRECT
  if (direct_io) flags |= O_DIRECT;
#else
  (void)direct_io;
#endif
  fd_ = ::open(path.string().c_str(), flags);
  if (fd_ < 0) {
    fail(Errc::BackendIoError,
         "cannot open target file " + path.string() + ": " + std::strerror(errno));
  }
  struct stat st{};
  if (::fstat(fd_, &st) != 0) {
    int err = errno;
    ::close(fd_);
    fd_ = -1;
    fail(Errc::BackendIoError, "fstat failed: " + std::string(std::strerror(err)));
  }
  file_bytes_ = static_cast<uint64_t>(st.st_size);
  if (file_bytes_ < kSectorBytes) {
    ::close(fd_);
    fd_ = -1;
    fail(Errc::BackendIoError, "target file smaller than one sector: " + path.string());
  }
}

RealFileBackend::~RealFileBackend() {
  if (buffer_) std::free(buffer_);
  if (fd_ >= 0) ::close(fd_);
}

void RealFileBackend::ensure_buffer(size_t bytes) {
  if (buffer_bytes_ >= bytes) return;
  if (buffer_) std::free(buffer_);
  buffer_ = nullptr;
  if (posix_memalign(&buffer_, kBufferAlign, bytes) != 0) {
    buffer_ = nullptr;
    buffer_bytes_ = 0;
    fail(Errc::BackendIoError, "cannot allocate aligned buffer");
  }
  std::memset(buffer_, 0x5a, bytes);
  buffer_bytes_ = bytes;
}

uint64_t RealFileBackend::execute(const IoRecord& rec, size_t index, Sequentiality seq) {
  (void)index;
  (void)seq;
  uint64_t bytes = static_cast<uint64_t>(rec.size_sectors) * kSectorBytes;
  uint64_t span = (file_bytes_ / kSectorBytes) * kSectorBytes;
  if (bytes == 0 || bytes > span) {
    fail(Errc::BackendIoError, "request does not fit target file");
  }
  uint64_t fold = (span - bytes) / kSectorBytes + 1;
  uint64_t offset = (rec.lba % fold) * kSectorBytes;
  ensure_buffer(static_cast<size_t>(bytes));

  auto start = std::chrono::steady_clock::now();
  ssize_t done;
  if (rec.op == OpType::Read) {
    done = ::pread(fd_, buffer_, static_cast<size_t>(bytes), static_cast<off_t>(offset));
  } else {
    done = ::pwrite(fd_, buffer_, static_cast<size_t>(bytes), static_cast<off_t>(offset));
  }
  auto stop = std::chrono::steady_clock::now();
  if (done != static_cast<ssize_t>(bytes)) {
    fail(Errc::BackendIoError, std::string("request failed: ") +
                                   (done < 0 ? std::strerror(errno) : "short transfer"));
  }
  auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
  return ns > 0 ? static_cast<uint64_t>(ns) : 0;
}

ReplayLog replay(const Trace& trace, const std::vector<Decomposition>& decomp,
                 DeviceBackend& backend, const ReplayOptions& options,
                 ReplayLog* partial_out) {
  if (trace.records.empty()) fail(Errc::EmptyTrace, "nothing to replay");
  if (decomp.size() != trace.records.size()) {
    fail(Errc::Misaligned, "decomposition does not align with trace");
  }
  std::vector<Sequentiality> seq = sequentiality_flags(trace);

  ReplayLog log;
  log.entries.reserve(trace.records.size());
  try {
    if (options.virtual_clock) {
      uint64_t now = 0;
      for (size_t i = 0; i < trace.records.size(); ++i) {
        now += decomp[i].t_idle_ns;
        uint64_t issue = now;
        uint64_t service = backend.execute(trace.records[i], i, seq[i]);
        now = issue + service;
        log.entries.push_back({issue, now, i});
      }
      return log;
    }

    StopClock clock{std::chrono::steady_clock::now()};
    uint64_t complete = 0;
    for (size_t i = 0; i < trace.records.size(); ++i) {
      uint64_t deadline = complete + decomp[i].t_idle_ns;
      precise_wait(clock, deadline, options.spin_window_ns);
      uint64_t issue = clock.now_ns();
      uint64_t service = backend.execute(trace.records[i], i, seq[i]);
      if (backend.blocking()) {
        complete = clock.now_ns();
      } else {
        precise_wait(clock, issue + service, options.spin_window_ns);
        complete = clock.now_ns();
      }
      log.entries.push_back({issue, complete, i});
    }
    return log;
  } catch (...) {
    if (partial_out) *partial_out = std::move(log);
    throw;
  }
}

Trace capture_trace(const ReplayLog& log, const Trace& source) {
  if (log.entries.empty()) fail(Errc::EmptyTrace, "empty replay log");
  Trace out;
  out.source_format = TraceFormat::CanonicalCsv;
  out.epoch_ns = 0;
  out.records.reserve(log.entries.size());
  uint64_t base = log.entries.front().issue_ns;
  for (const ReplayEntry& entry : log.entries) {
    if (entry.source_index >= source.records.size()) {
      fail(Errc::IndexOutOfRange, "replay log refers past the source trace");
    }
    const IoRecord& src = source.records[entry.source_index];
    IoRecord rec;
    rec.arrival_ns = entry.issue_ns - base;
    rec.op = src.op;
    rec.lba = src.lba;
    rec.size_sectors = src.size_sectors;
    rec.response_ns = entry.complete_ns - entry.issue_ns;
    out.records.push_back(rec);
  }
  return out;
}

}  // namespace retrace
