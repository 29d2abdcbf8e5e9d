// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "retrace/grouping.hpp"
#include "retrace/trace.hpp"

namespace retrace {

// A target device. execute() performs (or simulates) one request and returns
// its service time in ns. blocking() says whether execute() itself already
// waited that long (a real device) or returned immediately (a model).
class DeviceBackend {
 public:
  virtual ~DeviceBackend() = default;
  virtual uint64_t execute(const IoRecord& rec, size_t index, Sequentiality seq) = 0;
  virtual bool blocking() const = 0;
  virtual const char* name() const = 0;
};

// Deterministic device model: slope * size + a per-op fixed overhead, plus a
// seek penalty for random access and optional gaussian jitter derived from
// (seed, index).
struct SimulatedParams {
  double read_ns_per_sector = 500;
  double write_ns_per_sector = 1000;
  double fixed_read_ns = 10'000;
  double fixed_write_ns = 10'000;
  double movd_ns = 5'000;
  double jitter_sigma_ns = 0;
  uint64_t seed = 1;
};

SimulatedParams sim_params_from_text(std::string_view text);
std::string sim_params_to_text(const SimulatedParams& params);
SimulatedParams read_sim_params(const std::filesystem::path& path);

class SimulatedBackend : public DeviceBackend {
 public:
  explicit SimulatedBackend(const SimulatedParams& params) : params_(params) {}

  // Expected (jitter-free) service time for a request shape.
  double model_service(OpType op, uint32_t size_sectors, Sequentiality seq) const;

  uint64_t execute(const IoRecord& rec, size_t index, Sequentiality seq) override;
  bool blocking() const override { return false; }
  const char* name() const override { return "sim"; }

  const SimulatedParams& params() const { return params_; }

 private:
  SimulatedParams params_;
};

// Issues requests against a regular file with unbuffered direct I/O. The
// request offset is lba * 512 folded into the 512-aligned span of the file
// that can hold the request.
class RealFileBackend : public DeviceBackend {
 public:
  explicit RealFileBackend(const std::filesystem::path& path, bool direct_io = true);
  ~RealFileBackend() override;

  uint64_t execute(const IoRecord& rec, size_t index, Sequentiality seq) override;
  bool blocking() const override { return true; }
  const char* name() const override { return "file"; }

 private:
  void ensure_buffer(size_t bytes);
  int fd_ = -1;
  uint64_t file_bytes_ = 0;
  void* buffer_ = nullptr;
  size_t buffer_bytes_ = 0;
};

struct ReplayEntry {
  uint64_t issue_ns = 0;     // relative to replay start
  uint64_t complete_ns = 0;  // issue + service
  size_t source_index = 0;
};

struct ReplayLog {
  std::vector<ReplayEntry> entries;
};

struct ReplayOptions {
  // Advance an arithmetic clock instead of waiting on the real one. Gives
  // bit-identical logs for deterministic backends.
  bool virtual_clock = false;
  // Real-clock waits sleep coarsely until this close to the deadline, then
  // spin so the deadline is never undershot.
  uint64_t spin_window_ns = 1'000'000;
};

// Re-issues a trace one request at a time: wait decomp[i].t_idle_ns, issue
// record i, wait for completion, repeat. decomp must align with the trace.
// When a backend error aborts the run, the entries completed so far are
// moved into *partial_out (if given) before the error propagates.
ReplayLog replay(const Trace& trace, const std::vector<Decomposition>& decomp,
                 DeviceBackend& backend, const ReplayOptions& options = {},
                 ReplayLog* partial_out = nullptr);

// Builds a trace from a replay log: arrivals are issue times rebased to 0,
// response_ns is the measured service time, request shapes copy from the
// source trace.
Trace capture_trace(const ReplayLog& log, const Trace& source);

}  // namespace retrace
