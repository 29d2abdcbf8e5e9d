// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "retrace/distribution.hpp"
#include "retrace/grouping.hpp"
#include "retrace/trace.hpp"

namespace retrace {

// How the per-sector coefficient is extracted from the two steepest CDFs.
// LocationGap takes the distance between their maximum-derivative locations.
// The vertical modes interpolate both CDFs on the union support, take the
// pointwise difference curve (signed or absolute), and use the location of
// that curve's maximum derivative.
enum class DiffMode { LocationGap, VerticalSigned, VerticalAbs };

struct FitOptions {
  uint64_t quantum_ns = 1000;
  size_t min_group_samples = 30;
  UtmostRule utmost = UtmostRule::MaxMass;
  DiffMode diff_mode = DiffMode::LocationGap;
};

enum class FitPath { TwoCdf, SingleCdf, SingleCdfRandom, None };

const char* fit_path_name(FitPath path);

// Per-operation latency coefficients plus a record of how they were fitted.
struct CoefficientFit {
  double slope_ns_per_sector = 0;  // beta (reads) or eta (writes)
  double t_cdel_ns = 0;

  FitPath path = FitPath::None;
  uint32_t size_r1 = 0;
  uint32_t size_r2 = 0;  // 0 on single-CDF paths
  double steepness1 = 0;
  double steepness2 = 0;
  uint64_t t_prime_ns = 0;  // representative T_intt of the steepest group
  int64_t delta_t_ns = 0;   // signed location gap, or the diff-curve location
  bool clamped_slope = false;
  bool clamped_cdel = false;
  std::vector<std::string> notes;
};

struct MovdFit {
  double t_movd_ns = 0;
  bool found = false;  // false: no usable random group, value is 0
  GroupKey source_key{};
  uint64_t t_rand_ns = 0;
  bool clamped = false;
  std::vector<std::string> notes;
};

struct LatencyModel {
  CoefficientFit read;
  CoefficientFit write;
  MovdFit movd;
  uint64_t quantum_ns = 1000;

  const CoefficientFit& coeff(OpType op) const {
    return op == OpType::Read ? read : write;
  }
};

// Representative inter-arrival time of a distribution: the location of the
// maximum derivative of the interpolated CDF, snapped to the nearest
// observed support value.
uint64_t representative_intt(const EmpiricalCdf& cdf);

// Fits the per-sector coefficient and channel delay for one operation type
// from its sequential groups: ranks groups by spike steepness, takes the two
// steepest, and derives slope and intercept from their representative
// inter-arrival times and sizes. Falls back to a single-CDF proportional
// model when fewer than two usable groups exist, and to random-access groups
// when the op has no sequential ones.
CoefficientFit fit_coefficients(const std::vector<RequestGroup>& groups, OpType op,
                                const FitOptions& options = {});

// Representative seek/forwarding overhead: the steepest random-access group's
// representative inter-arrival time minus the fitted linear part for its op
// and size, clamped at 0. Shared across ops.
MovdFit fit_movd(const std::vector<RequestGroup>& groups, const CoefficientFit& read,
                 const CoefficientFit& write, const FitOptions& options = {});

LatencyModel fit_model(const std::vector<RequestGroup>& groups,
                       const FitOptions& options = {});
LatencyModel fit_model(const Trace& trace, const FitOptions& options = {});

// Expected device time (ns) for a request shape; excludes the channel delay.
double t_sdev(const LatencyModel& model, OpType op, uint32_t size_sectors,
              Sequentiality seq);

// Splits every record's forward gap into channel delay, device time, and
// idle time. Uses response_ns when a record carries it, the model otherwise
// (ModelMissing when neither is available). The last record has no forward
// gap: t_intt and t_idle are 0 and it is never flagged async.
std::vector<Decomposition> decompose(const Trace& trace,
                                     const LatencyModel* model = nullptr);

// Key-value text serialization (documented in the README; ns units).
std::string model_to_text(const LatencyModel& model);
LatencyModel model_from_text(std::string_view text);
void write_model(const LatencyModel& model, const std::filesystem::path& path);
LatencyModel read_model(const std::filesystem::path& path);

}  // namespace retrace
