// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "retrace/error.hpp"
#include "retrace/units.hpp"

namespace retrace {
namespace {

void append_double(std::string& out, double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  out += buf;
}

uint64_t decade_floor(uint64_t value) {
  uint64_t lo = 1;
  while (value / 10 >= lo) lo *= 10;
  return lo;
}

}  // namespace

uint64_t InjectionPlan::total_injected_ns() const {
  uint64_t total = 0;
  for (uint64_t v : idle_ns) total += v;
  return total;
}

bool InjectionPlan::contains(size_t index) const {
  return std::binary_search(indices.begin(), indices.end(), index);
}

InjectionPlan make_plan(const Trace& trace, const PlanConfig& config) {
  const size_t n = trace.records.size();
  if (n < 2) fail(Errc::EmptyTrace, "need at least 2 records to plan injections");
  if (config.idle_max_ns < config.idle_min_ns) {
    fail(Errc::BadDuration, "idle range is inverted");
  }
  if (config.fraction < 0 || config.fraction > 1) {
    fail(Errc::IndexOutOfRange, "injection fraction must be in [0,1]");
  }
  std::vector<uint64_t> gaps = inter_arrival_times(trace);

  std::vector<size_t> eligible;
  eligible.reserve(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    if (config.max_existing_gap_ns == 0 || gaps[i] <= config.max_existing_gap_ns) {
      eligible.push_back(i);
    }
  }

  size_t count = static_cast<size_t>(std::llround(config.fraction * static_cast<double>(n)));
  count = std::min(count, eligible.size());

  std::mt19937_64 rng(config.seed);
  for (size_t k = 0; k < count; ++k) {
    size_t j = k + static_cast<size_t>(rng() % (eligible.size() - k));
    std::swap(eligible[k], eligible[j]);
  }

  InjectionPlan plan;
  plan.seed = config.seed;
  plan.indices.assign(eligible.begin(), eligible.begin() + static_cast<long>(count));
  std::sort(plan.indices.begin(), plan.indices.end());

  uint64_t range = config.idle_max_ns - config.idle_min_ns + 1;
  plan.idle_ns.reserve(count);
  for (size_t k = 0; k < count; ++k) {
    plan.idle_ns.push_back(config.idle_min_ns + rng() % range);
  }
  return plan;
}

Trace inject(const Trace& trace, const InjectionPlan& plan) {
  if (trace.records.empty()) fail(Errc::EmptyTrace, "nothing to inject into");
  if (plan.indices.size() != plan.idle_ns.size()) {
    fail(Errc::Misaligned, "plan indices and idle values differ in length");
  }
  const size_t n = trace.records.size();
  for (size_t idx : plan.indices) {
    if (idx + 1 >= n) {
      fail(Errc::IndexOutOfRange,
           "injection index " + std::to_string(idx) + " has no following gap");
    }
  }
  Trace out = trace;
  uint64_t shift = 0;
  size_t next = 0;
  for (size_t i = 0; i < n; ++i) {
    out.records[i].arrival_ns += shift;
    if (next < plan.indices.size() && plan.indices[next] == i) {
      shift += plan.idle_ns[next];
      ++next;
    }
  }
  return out;
}

VerificationReport score(const InjectionPlan& plan, const std::vector<Decomposition>& decomp,
                         uint64_t tp_threshold_ns) {
  if (plan.indices.size() != plan.idle_ns.size()) {
    fail(Errc::Misaligned, "plan indices and idle values differ in length");
  }
  VerificationReport report;
  report.total_records = decomp.size();
  report.injected_count = plan.indices.size();

  struct BucketAccum {
    size_t injected = 0;
    size_t tp = 0;
    double len_sum = 0;
  };
  std::map<uint64_t, BucketAccum> buckets;

  double len_tp_sum = 0;
  double fp_idle_sum = 0;
  size_t next = 0;
  for (size_t i = 0; i < decomp.size(); ++i) {
    bool injected = next < plan.indices.size() && plan.indices[next] == i;
    uint64_t injected_ns = injected ? plan.idle_ns[next] : 0;
    if (injected) ++next;

    bool positive = decomp[i].t_idle_ns > tp_threshold_ns;
    if (injected) {
      BucketAccum& bucket = buckets[decade_floor(injected_ns)];
      ++bucket.injected;
      if (positive) {
        ++report.tp_count;
        ++bucket.tp;
        double ratio =
            static_cast<double>(decomp[i].t_idle_ns) / static_cast<double>(injected_ns);
        len_tp_sum += ratio;
        bucket.len_sum += ratio;
      }
    } else if (positive) {
      ++report.fp_count;
      fp_idle_sum += static_cast<double>(decomp[i].t_idle_ns);
    }
  }

  if (report.injected_count > 0) {
    report.detection_tp =
        static_cast<double>(report.tp_count) / static_cast<double>(report.injected_count);
  }
  if (report.total_records > 0) {
    report.detection_fp =
        static_cast<double>(report.fp_count) / static_cast<double>(report.total_records);
  }
  if (report.tp_count > 0) report.len_tp = len_tp_sum / static_cast<double>(report.tp_count);
  if (report.fp_count > 0) report.len_fp_ns = fp_idle_sum / static_cast<double>(report.fp_count);

  for (const auto& [lo, accum] : buckets) {
    BucketReport bucket;
    bucket.lo_ns = lo;
    bucket.hi_ns = lo * 10;
    bucket.injected = accum.injected;
    bucket.tp = accum.tp;
    bucket.detection_tp =
        accum.injected > 0 ? static_cast<double>(accum.tp) / static_cast<double>(accum.injected)
                           : 0;
    bucket.len_tp = accum.tp > 0 ? accum.len_sum / static_cast<double>(accum.tp) : 0;
    report.buckets.push_back(bucket);
  }
  return report;
}

std::string report_to_csv(const VerificationReport& report) {
  std::string out = "bucket,detection_tp,detection_fp,len_tp,len_fp_ns\n";
  out += "all,";
  append_double(out, report.detection_tp);
  out += ',';
  append_double(out, report.detection_fp);
  out += ',';
  append_double(out, report.len_tp);
  out += ',';
  append_double(out, report.len_fp_ns);
  out += '\n';
  for (const BucketReport& bucket : report.buckets) {
    out += format_duration_ns(bucket.lo_ns);
    out += '-';
    out += format_duration_ns(bucket.hi_ns);
    out += ',';
    append_double(out, bucket.detection_tp);
    out += ",0,";
    append_double(out, bucket.len_tp);
    out += ",0\n";
  }
  return out;
}

Trace accelerate(const Trace& trace, double factor) {
  if (!(factor > 0)) fail(Errc::ZeroFactor, "acceleration factor must be positive");
  if (trace.records.empty()) fail(Errc::EmptyTrace, "nothing to accelerate");
  Trace out = trace;
  uint64_t t = trace.records.front().arrival_ns;
  for (size_t i = 1; i < trace.records.size(); ++i) {
    uint64_t gap = trace.records[i].arrival_ns - trace.records[i - 1].arrival_ns;
    t += static_cast<uint64_t>(std::llround(static_cast<double>(gap) / factor));
    out.records[i].arrival_ns = t;
  }
  return out;
}

std::vector<Decomposition> zero_idle_decomposition(const Trace& trace) {
  std::vector<uint64_t> gaps = inter_arrival_times(trace);
  std::vector<Decomposition> decomp(trace.records.size());
  for (size_t i = 0; i + 1 < trace.records.size(); ++i) {
    decomp[i].t_intt_ns = gaps[i];
    decomp[i].t_slat_ns = gaps[i];
    decomp[i].t_sdev_ns = gaps[i];
  }
  return decomp;
}

std::vector<Decomposition> fixed_threshold_decomposition(const Trace& trace,
                                                         uint64_t threshold_ns) {
  std::vector<uint64_t> gaps = inter_arrival_times(trace);
  std::vector<Decomposition> decomp(trace.records.size());
  for (size_t i = 0; i + 1 < trace.records.size(); ++i) {
    uint64_t gap = gaps[i];
    decomp[i].t_intt_ns = gap;
    decomp[i].t_idle_ns = gap > threshold_ns ? gap - threshold_ns : 0;
    decomp[i].t_slat_ns = gap - decomp[i].t_idle_ns;
    decomp[i].t_sdev_ns = decomp[i].t_slat_ns;
  }
  return decomp;
}

}  // namespace retrace
