// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace retrace {

enum class OpType : uint8_t { Read, Write };

char op_to_char(OpType op);

enum class TraceFormat { CanonicalCsv, MsrCambridge, FiuSrcmap };

// One block I/O request. All times are integer nanoseconds; addresses and
// lengths are in 512-byte sectors.
struct IoRecord {
  uint64_t arrival_ns = 0;  // submission time, relative to the trace epoch
  OpType op = OpType::Read;
  uint64_t lba = 0;
  uint32_t size_sectors = 0;
  std::optional<uint64_t> response_ns;  // device time, when the source recorded it
  bool async_hint = false;  // submitted before the previous request completed

  friend bool operator==(const IoRecord&, const IoRecord&) = default;
};

struct Trace {
  std::vector<IoRecord> records;
  TraceFormat source_format = TraceFormat::CanonicalCsv;
  uint64_t epoch_ns = 0;  // absolute origin of arrival_ns, 0 when unknown
};

// Inter-arrival times: gap i is arrival(i+1) - arrival(i), so a trace of n
// records yields n-1 values. Requires n >= 2.
std::vector<uint64_t> inter_arrival_times(const Trace& trace);

// Per-request timing split. t_slat = t_cdel + t_sdev and
// t_idle = max(0, t_intt - t_slat) hold exactly in integer ns.
struct Decomposition {
  uint64_t t_intt_ns = 0;  // gap to the next record, 0 for the last record
  uint64_t t_cdel_ns = 0;  // host-side channel/software delay
  uint64_t t_sdev_ns = 0;  // device service time
  uint64_t t_slat_ns = 0;
  uint64_t t_idle_ns = 0;
  bool is_async = false;  // t_intt < t_sdev: next request overlapped this one
};

}  // namespace retrace
