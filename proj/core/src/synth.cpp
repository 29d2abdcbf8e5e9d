// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/synth.hpp"

#include <cmath>
#include <random>

#include "retrace/error.hpp"

namespace retrace {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller keeps generated traces identical across standard libraries.
double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

double expected_slat(const SynthModel& model, OpType op, uint32_t size_sectors,
                     bool sequential) {
  double cdel = op == OpType::Read ? model.t_cdel_read_ns : model.t_cdel_write_ns;
  double slope = op == OpType::Read ? model.read_ns_per_sector : model.write_ns_per_sector;
  double v = cdel + slope * static_cast<double>(size_sectors);
  if (!sequential) v += model.t_movd_ns;
  return v;
}

Trace generate_trace(const SynthConfig& config) {
  if (config.records == 0) fail(Errc::EmptyTrace, "cannot generate an empty trace");
  if (config.read_sizes.empty() && config.write_sizes.empty())
    fail(Errc::EmptySamples, "no request sizes configured");

  std::mt19937_64 rng(config.seed);
  Trace trace;
  trace.records.reserve(config.records);

  uint64_t arrival = 0;
  OpType op = OpType::Read;
  uint32_t size = 8;
  uint64_t next_lba = 0;
  size_t run_pos = 0;
  bool run_start = true;

  for (size_t i = 0; i < config.records; ++i) {
    if (run_start) {
      bool want_write = !config.write_sizes.empty() &&
                        (config.read_sizes.empty() ||
                         uniform01(rng) < config.write_fraction);
      op = want_write ? OpType::Write : OpType::Read;
      const auto& sizes = want_write ? config.write_sizes : config.read_sizes;
      size = sizes[rng() % sizes.size()];
      // Jump strictly past the previous request's end so the run start can
      // never continue it.
      next_lba += size + 1 + rng() % (1 << 20);
      run_pos = 0;
    }

    IoRecord rec;
    rec.arrival_ns = arrival;
    rec.op = op;
    rec.lba = next_lba;
    rec.size_sectors = size;
    bool sequential = !run_start;

    next_lba += size;
    ++run_pos;
    run_start = config.random_fraction > 0
                    ? uniform01(rng) < config.random_fraction
                    : run_pos >= config.seq_run_length;

    trace.records.push_back(rec);

    // The gap to the next record is this record's own synchronous latency:
    // the next request is submitted as soon as this one completes.
    if (i + 1 < config.records) {
      double slat = expected_slat(config.model, rec.op, rec.size_sectors, sequential);
      double sdev = slat - (rec.op == OpType::Read ? config.model.t_cdel_read_ns
                                                   : config.model.t_cdel_write_ns);
      double gap = slat;
      if (config.model.jitter_sigma_ns > 0)
        gap += config.model.jitter_sigma_ns * gaussian(rng);
      if (config.async_fraction > 0 && uniform01(rng) < config.async_fraction)
        gap = config.async_depth * sdev;
      int64_t gap_ns = std::llround(gap);
      if (gap_ns < 1) gap_ns = 1;
      arrival += static_cast<uint64_t>(gap_ns);
    }
  }
  return trace;
}

}  // namespace retrace
