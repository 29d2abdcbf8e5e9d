// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "retrace/error.hpp"
#include "retrace/grouping.hpp"
#include "retrace/inference.hpp"

using namespace retrace;

namespace {

LatencyModel truth_model(const SynthModel& m) {
  LatencyModel model;
  model.read.slope_ns_per_sector = m.read_ns_per_sector;
  model.read.t_cdel_ns = m.t_cdel_read_ns;
  model.read.path = FitPath::TwoCdf;
  model.write.slope_ns_per_sector = m.write_ns_per_sector;
  model.write.t_cdel_ns = m.t_cdel_write_ns;
  model.write.path = FitPath::TwoCdf;
  model.movd.t_movd_ns = m.t_movd_ns;
  model.movd.found = true;
  return model;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  SynthConfig config;
  config.records = 2000;
  config.seed = 42;
  Trace a = generate_trace(config);
  Trace b = generate_trace(config);
  CHECK(a.records == b.records);

  config.seed = 43;
  Trace c = generate_trace(config);
  CHECK(a.records != c.records);
}

TEST_CASE("requests use the configured sizes and ops") {
  SynthConfig config;
  config.records = 5000;
  config.read_sizes = {8, 32};
  config.write_sizes = {16, 64};
  Trace t = generate_trace(config);

  REQUIRE(t.records.size() == 5000);
  CHECK(t.records.front().arrival_ns == 0);
  std::set<uint32_t> read_sizes, write_sizes;
  for (const auto& rec : t.records) {
    if (rec.op == OpType::Read)
      read_sizes.insert(rec.size_sectors);
    else
      write_sizes.insert(rec.size_sectors);
    CHECK(!rec.response_ns.has_value());
  }
  CHECK(read_sizes == std::set<uint32_t>{8, 32});
  CHECK(write_sizes == std::set<uint32_t>{16, 64});
}

TEST_CASE("every gap equals the issuing record's expected latency") {
  SynthConfig config;
  config.records = 3000;
  config.random_fraction = 0.3;
  config.model.jitter_sigma_ns = 0;
  Trace t = generate_trace(config);

  auto flags = sequentiality_flags(t);
  auto gaps = inter_arrival_times(t);
  for (size_t i = 0; i + 1 < t.records.size(); ++i) {
    const IoRecord& rec = t.records[i];
    double slat = expected_slat(config.model, rec.op, rec.size_sectors,
                                flags[i] == Sequentiality::Sequential);
    CHECK(gaps[i] == static_cast<uint64_t>(std::llround(slat)));
  }
}

TEST_CASE("a run start never continues the previous request") {
  SynthConfig config;
  config.records = 4000;
  config.random_fraction = 0.4;
  Trace t = generate_trace(config);
  auto flags = sequentiality_flags(t);

  size_t seq = std::count(flags.begin(), flags.end(), Sequentiality::Sequential);
  CHECK(seq > 1000);
  CHECK(seq < 3600);

  for (size_t i = 1; i < t.records.size(); ++i) {
    const IoRecord& p = t.records[i - 1];
    const IoRecord& c = t.records[i];
    if (flags[i] == Sequentiality::Sequential) {
      CHECK(c.lba == p.lba + p.size_sectors);
      CHECK(c.op == p.op);
    } else {
      CHECK(c.lba > p.lba + p.size_sectors);  // strictly past the previous end
    }
  }
}

TEST_CASE("zero random fraction produces fixed-length runs") {
  SynthConfig config;
  config.records = 160;
  config.random_fraction = 0;
  config.seq_run_length = 16;
  Trace t = generate_trace(config);
  auto flags = sequentiality_flags(t);
  for (size_t i = 0; i < flags.size(); ++i) {
    CHECK(flags[i] == (i % 16 == 0 ? Sequentiality::Random : Sequentiality::Sequential));
  }
}

TEST_CASE("decomposing against the ground truth recovers zero idle") {
  SynthConfig config;
  config.records = 5000;
  config.random_fraction = 0.3;
  Trace t = generate_trace(config);
  LatencyModel model = truth_model(config.model);

  auto d = decompose(t, &model);
  for (size_t i = 0; i + 1 < d.size(); ++i) {
    CHECK(d[i].t_idle_ns == 0);
    CHECK(!d[i].is_async);
  }
}

TEST_CASE("async gaps cut the gap to a fraction of the device time") {
  SynthConfig config;
  config.records = 4000;
  config.async_fraction = 0.25;
  config.async_depth = 0.5;
  Trace t = generate_trace(config);
  LatencyModel model = truth_model(config.model);

  auto flags = sequentiality_flags(t);
  auto gaps = inter_arrival_times(t);
  size_t async_count = 0;
  for (size_t i = 0; i + 1 < t.records.size(); ++i) {
    const IoRecord& rec = t.records[i];
    bool seq = flags[i] == Sequentiality::Sequential;
    double slat = expected_slat(config.model, rec.op, rec.size_sectors, seq);
    double sdev = slat - (rec.op == OpType::Read ? config.model.t_cdel_read_ns
                                                 : config.model.t_cdel_write_ns);
    uint64_t sync_gap = static_cast<uint64_t>(std::llround(slat));
    uint64_t async_gap = static_cast<uint64_t>(std::llround(0.5 * sdev));
    CHECK((gaps[i] == sync_gap || gaps[i] == async_gap));
    if (gaps[i] == async_gap && async_gap != sync_gap) ++async_count;
  }
  CHECK(async_count > 500);
  CHECK(async_count < 1500);

  // The ground-truth decomposition flags exactly those records.
  auto d = decompose(t, &model);
  size_t flagged = 0;
  for (size_t i = 0; i + 1 < d.size(); ++i)
    if (d[i].is_async) ++flagged;
  CHECK(flagged == async_count);
}

TEST_CASE("jitter is reproducible and centered") {
  SynthConfig config;
  config.records = 8000;
  config.random_fraction = 0;
  config.model.jitter_sigma_ns = 3000;
  Trace a = generate_trace(config);
  Trace b = generate_trace(config);
  CHECK(a.records == b.records);

  auto flags = sequentiality_flags(a);
  auto gaps = inter_arrival_times(a);
  double sum = 0;
  size_t jittered = 0;
  for (size_t i = 0; i + 1 < a.records.size(); ++i) {
    const IoRecord& rec = a.records[i];
    double slat = expected_slat(config.model, rec.op, rec.size_sectors,
                                flags[i] == Sequentiality::Sequential);
    double delta = static_cast<double>(gaps[i]) - slat;
    sum += delta;
    if (delta != 0) ++jittered;
  }
  CHECK(jittered > 7000);
  double mean = sum / static_cast<double>(jittered);
  CHECK(std::fabs(mean) < 200.0);  // sigma/sqrt(n) is ~34ns, allow slack
}

TEST_CASE("generator validates its configuration") {
  SynthConfig config;
  config.records = 0;
  CHECK_THROWS_AS(generate_trace(config), Error);

  config.records = 10;
  config.read_sizes.clear();
  config.write_sizes.clear();
  CHECK_THROWS_AS(generate_trace(config), Error);
}

TEST_CASE("write-only and read-only configurations stay single-op") {
  SynthConfig config;
  config.records = 500;
  config.read_sizes.clear();
  config.write_sizes = {16};
  Trace t = generate_trace(config);
  for (const auto& rec : t.records) CHECK(rec.op == OpType::Write);

  SynthConfig reads;
  reads.records = 500;
  reads.write_sizes.clear();
  Trace r = generate_trace(reads);
  for (const auto& rec : r.records) CHECK(rec.op == OpType::Read);
}
