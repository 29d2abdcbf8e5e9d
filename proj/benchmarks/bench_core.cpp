// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "retrace/distribution.hpp"
#include "retrace/inference.hpp"
#include "retrace/ingest.hpp"
#include "retrace/synth.hpp"

namespace {

using namespace retrace;

Trace bench_trace(size_t records) {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.records = records;
  cfg.random_fraction = 0.3;
  cfg.model.t_movd_ns = 30'000;
  cfg.model.jitter_sigma_ns = 2'000;
  return generate_trace(cfg);
}

std::vector<uint64_t> jittered_samples(size_t n) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0, 8'000);
  std::vector<uint64_t> samples(n);
  for (auto& s : samples) {
    double v = 200'000 + noise(rng);
    s = v < 1 ? 1 : static_cast<uint64_t>(v);
  }
  return samples;
}

void BM_BuildPdfSteepness(benchmark::State& state) {
  auto samples = jittered_samples(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    EmpiricalPdf pdf = build_pdf(samples);
    benchmark::DoNotOptimize(steepness(pdf));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildPdfSteepness)->Arg(1'000)->Arg(100'000);

void BM_PchipFitMaxDerivative(benchmark::State& state) {
  auto samples = jittered_samples(static_cast<size_t>(state.range(0)));
  EmpiricalCdf cdf = cdf_from_pdf(build_pdf(samples));
  for (auto _ : state) {
    PiecewiseCurve curve = pchip_fit(cdf);
    benchmark::DoNotOptimize(curve.max_derivative());
  }
}
BENCHMARK(BM_PchipFitMaxDerivative)->Arg(10'000)->Arg(1'000'000);

void BM_FitModel(benchmark::State& state) {
  Trace trace = bench_trace(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_model(trace));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitModel)->Arg(10'000)->Arg(100'000);

void BM_Decompose(benchmark::State& state) {
  Trace trace = bench_trace(static_cast<size_t>(state.range(0)));
  LatencyModel model = fit_model(trace);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompose(trace, &model));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Decompose)->Arg(10'000)->Arg(100'000);

void BM_CanonicalWrite(benchmark::State& state) {
  Trace trace = bench_trace(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(to_canonical_csv(trace));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CanonicalWrite)->Arg(100'000);

void BM_CanonicalParse(benchmark::State& state) {
  std::string csv = to_canonical_csv(bench_trace(static_cast<size_t>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_trace_text(csv, TraceFormat::CanonicalCsv));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(csv.size()));
}
BENCHMARK(BM_CanonicalParse)->Arg(100'000);

}  // namespace

BENCHMARK_MAIN();
