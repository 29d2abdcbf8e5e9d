// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "retrace/trace.hpp"

namespace retrace {

// Ground-truth latency shape for generated workloads, ns units.
struct SynthModel {
  double read_ns_per_sector = 10'000;   // beta
  double write_ns_per_sector = 30'000;  // eta
  double t_cdel_read_ns = 20'000;
  double t_cdel_write_ns = 20'000;
  double t_movd_ns = 0;  // extra device time for random-access requests
  double jitter_sigma_ns = 0;  // gaussian jitter on each gap, 0 for exact spikes
};

struct SynthConfig {
  uint64_t seed = 1;
  size_t records = 10'000;
  std::vector<uint32_t> read_sizes{8, 32};
  std::vector<uint32_t> write_sizes{16, 64};
  double write_fraction = 0.4;
  // Fraction of requests issued at a non-contiguous address (run starts).
  // The remaining requests continue sequential runs.
  double random_fraction = 0.3;
  size_t seq_run_length = 16;  // run length when random_fraction is 0
  // Fraction of gaps shortened below the device time to create
  // asynchronous submissions (gap = async_depth * t_sdev).
  double async_fraction = 0;
  double async_depth = 0.5;
  SynthModel model;
};

// Generates an idle-free synchronous trace: every gap equals the issuing
// record's service latency (t_cdel + t_sdev, plus jitter), so decomposing it
// against the ground-truth model recovers zero idle everywhere. Arrival
// timestamps start at 0. Deterministic per seed.
Trace generate_trace(const SynthConfig& config);

// Expected service latency (t_cdel + t_sdev) of one generated record under
// the ground-truth model, before jitter.
double expected_slat(const SynthModel& model, OpType op, uint32_t size_sectors,
                     bool sequential);

}  // namespace retrace
