// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retrace/trace.hpp"

namespace retrace {

// A reproducible set of idle injections: idle_ns[k] is added to the gap
// after record indices[k]. Fully determined by (trace, PlanConfig).
struct InjectionPlan {
  std::vector<size_t> indices;   // ascending, unique
  std::vector<uint64_t> idle_ns; // aligned with indices
  uint64_t seed = 0;

  uint64_t total_injected_ns() const;
  bool contains(size_t index) const;
};

struct PlanConfig {
  double fraction = 0.1;                  // of total records
  uint64_t idle_min_ns = 100'000;         // 100us
  uint64_t idle_max_ns = 100'000'000;     // 100ms
  uint64_t seed = 1;
  // Indices whose existing gap exceeds this are not eligible, so recovered
  // idle is attributable to the injection. 0 disables the filter.
  uint64_t max_existing_gap_ns = 0;
};

// Deterministic plan derivation, reproducible from the seed alone:
//   rng = mt19937_64(seed)
//   eligible = indices [0, N-2] passing the gap filter, ascending
//   count = llround(fraction * N), clamped to eligible.size()
//   partial Fisher-Yates: for k in [0,count): swap(eligible[k],
//     eligible[k + rng() % (eligible.size() - k)])
//   indices = first count entries, sorted ascending
//   for each index ascending: idle = idle_min + rng() % (idle_max - idle_min + 1)
InjectionPlan make_plan(const Trace& trace, const PlanConfig& config);

// Widens the gap after each planned index by its idle; later arrivals shift
// cumulatively. Indices past N-2 cannot widen any gap and are rejected.
Trace inject(const Trace& trace, const InjectionPlan& plan);

struct BucketReport {
  uint64_t lo_ns = 0;  // bucket covers injected idles in [lo, hi)
  uint64_t hi_ns = 0;
  size_t injected = 0;
  size_t tp = 0;
  double detection_tp = 0;
  double len_tp = 0;
};

struct VerificationReport {
  size_t total_records = 0;
  size_t injected_count = 0;
  size_t tp_count = 0;
  size_t fp_count = 0;
  double detection_tp = 0;  // tp_count / injected_count
  double detection_fp = 0;  // fp_count / total_records
  double len_tp = 0;        // mean over TPs of estimated/injected
  double len_fp_ns = 0;     // mean estimated idle over FPs
  std::vector<BucketReport> buckets;  // by decade of injected idle
};

// A record is positive when its recovered t_idle_ns > tp_threshold_ns.
// TP = positive and injected; FP = positive and not injected.
VerificationReport score(const InjectionPlan& plan, const std::vector<Decomposition>& decomp,
                         uint64_t tp_threshold_ns = 0);

// CSV with header bucket,detection_tp,detection_fp,len_tp,len_fp_ns; first
// row "all", then one row per decade bucket (FP columns are overall-only and
// print 0 on bucket rows).
std::string report_to_csv(const VerificationReport& report);

// Baseline reconstructions.
// Divides every gap by factor (rounded to nearest ns).
Trace accelerate(const Trace& trace, double factor);
// Replay schedule with no idle at all: back-to-back issue.
std::vector<Decomposition> zero_idle_decomposition(const Trace& trace);
// Idle = max(0, gap - threshold) per record; no per-request latency model.
std::vector<Decomposition> fixed_threshold_decomposition(const Trace& trace,
                                                         uint64_t threshold_ns);

}  // namespace retrace
