// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace retrace {

// Probability mass over quantized inter-arrival values. Samples are floored
// to multiples of quantum_ns; support is sorted and distinct; mass sums to 1.
struct EmpiricalPdf {
  std::vector<uint64_t> support;
  std::vector<double> mass;
  uint64_t quantum_ns = 1000;
};

EmpiricalPdf build_pdf(std::span<const uint64_t> samples, uint64_t quantum_ns = 1000);

struct EmpiricalCdf {
  std::vector<uint64_t> support;
  std::vector<double> cumulative;  // prefix sums of mass, back() == 1
  uint64_t quantum_ns = 1000;
};

EmpiricalCdf cdf_from_pdf(const EmpiricalPdf& pdf);

// How the utmost outlier is chosen when several points clear the margin:
// the point with the largest mass, or the one farthest above the line.
enum class UtmostRule { MaxMass, MaxDistance };

struct SteepnessReport {
  double steepness = 0;  // mass(t_utmost) - line(t_utmost), always > margin
  uint64_t t_utmost_ns = 0;
  double slope = 0;  // line: mass ~ slope * t + intercept
  double intercept = 0;
  double margin = 0;  // population variance of mass values / 2
  std::vector<std::pair<uint64_t, double>> outliers;  // (t, mass) above margin
};

// Spike detection on a mass distribution. Fits the line with
// slope = std(mass) / std(t) and intercept = mean(mass) - slope * mean(t)
// (population moments), flags points whose vertical distance above the line
// exceeds var(mass) / 2, and reports the utmost one. Returns nullopt when no
// point clears the margin. Ties go to the smaller t. Requires >= 2 support
// points (DegeneratePdf otherwise).
std::optional<SteepnessReport> steepness(const EmpiricalPdf& pdf,
                                         UtmostRule rule = UtmostRule::MaxMass);

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
// slopes). Monotone data yields a monotone curve; evaluation clamps to the
// boundary values outside the knot range.
class PiecewiseCurve {
 public:
  // x strictly increasing, x.size() == y.size() >= 2.
  PiecewiseCurve(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;  // 0 outside the knot range

  struct Extremum {
    double x = 0;
    double slope = 0;
  };
  // Global maximum of the derivative, found analytically per piece (the
  // derivative of a cubic is quadratic). Ties resolve toward smaller x.
  Extremum max_derivative() const;

  const std::vector<double>& knots_x() const { return x_; }
  const std::vector<double>& knots_y() const { return y_; }
  const std::vector<double>& knot_slopes() const { return m_; }

 private:
  size_t piece_for(double x) const;
  std::vector<double> x_, y_, m_;
};

PiecewiseCurve pchip_fit(std::vector<double> x, std::vector<double> y);

// Interpolates a CDF. With anchor_zero the curve gets a leading knot
// (support[0] - quantum, 0) so the rise into the first support value is part
// of the fitted curve; otherwise a single-point CDF is widened to the flat
// pair (t, t + quantum) and multi-point CDFs start at (support[0],
// cumulative[0]).
PiecewiseCurve pchip_fit(const EmpiricalCdf& cdf, bool anchor_zero = true);

// Nearest support value to x (ties toward the smaller value). Used to snap
// interpolated maximum-derivative locations back onto observed samples.
uint64_t snap_to_support(const std::vector<uint64_t>& support, double x);

}  // namespace retrace
