// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "retrace/error.hpp"

namespace retrace {

EmpiricalPdf build_pdf(std::span<const uint64_t> samples, uint64_t quantum_ns) {
  if (samples.empty()) fail(Errc::EmptySamples, "cannot build pdf from no samples");
  if (quantum_ns == 0) quantum_ns = 1;

  std::vector<uint64_t> quantized(samples.begin(), samples.end());
  for (uint64_t& v : quantized) v = v / quantum_ns * quantum_ns;
  std::sort(quantized.begin(), quantized.end());

  EmpiricalPdf pdf;
  pdf.quantum_ns = quantum_ns;
  const double n = static_cast<double>(quantized.size());
  size_t i = 0;
  while (i < quantized.size()) {
    size_t j = i;
    while (j < quantized.size() && quantized[j] == quantized[i]) ++j;
    pdf.support.push_back(quantized[i]);
    pdf.mass.push_back(static_cast<double>(j - i) / n);
    i = j;
  }
  return pdf;
}

EmpiricalCdf cdf_from_pdf(const EmpiricalPdf& pdf) {
  EmpiricalCdf cdf;
  cdf.support = pdf.support;
  cdf.quantum_ns = pdf.quantum_ns;
  cdf.cumulative.reserve(pdf.mass.size());
  double acc = 0;
  for (double m : pdf.mass) {
    acc += m;
    cdf.cumulative.push_back(acc);
  }
  if (!cdf.cumulative.empty()) cdf.cumulative.back() = 1.0;
  return cdf;
}

std::optional<SteepnessReport> steepness(const EmpiricalPdf& pdf, UtmostRule rule) {
  const size_t n = pdf.support.size();
  if (n < 2) fail(Errc::DegeneratePdf, "pdf needs >= 2 support points");

  double mean_t = 0, mean_m = 0;
  for (size_t i = 0; i < n; ++i) {
    mean_t += static_cast<double>(pdf.support[i]);
    mean_m += pdf.mass[i];
  }
  mean_t /= static_cast<double>(n);
  mean_m /= static_cast<double>(n);

  double var_t = 0, var_m = 0;
  for (size_t i = 0; i < n; ++i) {
    double dt = static_cast<double>(pdf.support[i]) - mean_t;
    double dm = pdf.mass[i] - mean_m;
    var_t += dt * dt;
    var_m += dm * dm;
  }
  var_t /= static_cast<double>(n);
  var_m /= static_cast<double>(n);

  SteepnessReport report;
  report.slope = std::sqrt(var_m) / std::sqrt(var_t);
  report.intercept = mean_m - report.slope * mean_t;
  report.margin = var_m / 2.0;

  bool found = false;
  double best_key = 0;
  for (size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(pdf.support[i]);
    double distance = pdf.mass[i] - (report.slope * t + report.intercept);
    if (distance > report.margin) {
      report.outliers.emplace_back(pdf.support[i], pdf.mass[i]);
      double key = rule == UtmostRule::MaxMass ? pdf.mass[i] : distance;
      if (!found || key > best_key) {  // ties keep the smaller t
        found = true;
        best_key = key;
        report.t_utmost_ns = pdf.support[i];
        report.steepness = distance;
      }
    }
  }
  if (!found) return std::nullopt;
  return report;
}

PiecewiseCurve::PiecewiseCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    fail(Errc::DegenerateCdf, "curve needs >= 2 knots");
  for (size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i] < x_[i + 1]))
      fail(Errc::DegenerateCdf, "knot x values must be strictly increasing");

  std::vector<double> h(n - 1), d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = d[0];
    return;
  }

  // Interior slopes: weighted harmonic mean of adjacent secants, zero across
  // a local extremum (Fritsch-Carlson).
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
      m_[i] = 0.0;
    } else {
      double w1 = 2 * h[i] + h[i - 1];
      double w2 = h[i] + 2 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }

  // One-sided three-point estimate at the ends, clamped to preserve shape.
  auto edge = [](double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0)
      m = 0.0;
    else if ((d0 > 0) != (d1 > 0) && std::fabs(m) > 3 * std::fabs(d0))
      m = 3 * d0;
    return m;
  };
  m_[0] = edge(h[0], h[1], d[0], d[1]);
  m_[n - 1] = edge(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

size_t PiecewiseCurve::piece_for(double x) const {
  // Largest i with x_[i] <= x, clamped to a valid piece index.
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return 0;
  size_t i = static_cast<size_t>(it - x_.begin()) - 1;
  if (i >= x_.size() - 1) i = x_.size() - 2;
  return i;
}

double PiecewiseCurve::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  size_t i = piece_for(x);
  double hi = x_[i + 1] - x_[i];
  double di = (y_[i + 1] - y_[i]) / hi;
  double c2 = (3 * di - 2 * m_[i] - m_[i + 1]) / hi;
  double c3 = (m_[i] + m_[i + 1] - 2 * di) / (hi * hi);
  double s = x - x_[i];
  return y_[i] + s * (m_[i] + s * (c2 + s * c3));
}

double PiecewiseCurve::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  size_t i = piece_for(x);
  double hi = x_[i + 1] - x_[i];
  double di = (y_[i + 1] - y_[i]) / hi;
  double c2 = (3 * di - 2 * m_[i] - m_[i + 1]) / hi;
  double c3 = (m_[i] + m_[i + 1] - 2 * di) / (hi * hi);
  double s = x - x_[i];
  return m_[i] + s * (2 * c2 + 3 * c3 * s);
}

PiecewiseCurve::Extremum PiecewiseCurve::max_derivative() const {
  Extremum best{x_.front(), 0.0};
  bool found = false;
  for (size_t i = 0; i + 1 < x_.size(); ++i) {
    double hi = x_[i + 1] - x_[i];
    double di = (y_[i + 1] - y_[i]) / hi;
    double c2 = (3 * di - 2 * m_[i] - m_[i + 1]) / hi;
    double c3 = (m_[i] + m_[i + 1] - 2 * di) / (hi * hi);

    // H'(s) = m_i + 2 c2 s + 3 c3 s^2 on [0, h]: check both ends and the
    // interior critical point. Strict comparisons keep the smallest x on ties.
    double candidates[3];
    size_t count = 0;
    candidates[count++] = 0.0;
    if (c3 != 0.0) {
      double s_star = -c2 / (3 * c3);
      if (s_star > 0.0 && s_star < hi) candidates[count++] = s_star;
    }
    candidates[count++] = hi;

    std::sort(candidates, candidates + count);
    for (size_t k = 0; k < count; ++k) {
      double s = candidates[k];
      double slope = m_[i] + s * (2 * c2 + 3 * c3 * s);
      if (!found || slope > best.slope) {
        found = true;
        best.x = x_[i] + s;
        best.slope = slope;
      }
    }
  }
  return best;
}

PiecewiseCurve pchip_fit(std::vector<double> x, std::vector<double> y) {
  return PiecewiseCurve(std::move(x), std::move(y));
}

PiecewiseCurve pchip_fit(const EmpiricalCdf& cdf, bool anchor_zero) {
  if (cdf.support.empty()) fail(Errc::DegenerateCdf, "empty cdf");
  std::vector<double> x, y;
  x.reserve(cdf.support.size() + 1);
  y.reserve(cdf.support.size() + 1);
  uint64_t quantum = cdf.quantum_ns == 0 ? 1 : cdf.quantum_ns;

  if (anchor_zero) {
    x.push_back(static_cast<double>(cdf.support.front()) - static_cast<double>(quantum));
    y.push_back(0.0);
  }
  for (size_t i = 0; i < cdf.support.size(); ++i) {
    x.push_back(static_cast<double>(cdf.support[i]));
    y.push_back(cdf.cumulative[i]);
  }
  if (!anchor_zero && cdf.support.size() == 1) {
    x.push_back(static_cast<double>(cdf.support.front() + quantum));
    y.push_back(cdf.cumulative.front());
  }
  return PiecewiseCurve(std::move(x), std::move(y));
}

uint64_t snap_to_support(const std::vector<uint64_t>& support, double x) {
  if (support.empty()) fail(Errc::DegenerateCdf, "empty support");
  auto it = std::lower_bound(support.begin(), support.end(),
                             static_cast<uint64_t>(std::max(0.0, std::ceil(x))));
  if (it == support.end()) return support.back();
  if (it == support.begin()) return support.front();
  uint64_t hi = *it;
  uint64_t lo = *(it - 1);
  double dlo = x - static_cast<double>(lo);
  double dhi = static_cast<double>(hi) - x;
  return dlo <= dhi ? lo : hi;  // ties toward the smaller value
}

}  // namespace retrace
