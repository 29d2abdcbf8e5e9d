// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0

#include "retrace/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "retrace/error.hpp"

namespace retrace {

namespace {

struct Candidate {
  const RequestGroup* group = nullptr;
  EmpiricalPdf pdf;
  EmpiricalCdf cdf;
  bool has_report = false;
  double steepness = 0;
};

// A single-bin distribution is a perfect step: rank it above anything the
// outlier examination can produce.
Candidate make_candidate(const RequestGroup& group, const FitOptions& options) {
  Candidate cand;
  cand.group = &group;
  cand.pdf = build_pdf(group.intt_samples, options.quantum_ns);
  cand.cdf = cdf_from_pdf(cand.pdf);
  if (cand.pdf.support.size() == 1) {
    cand.has_report = true;
    cand.steepness = std::numeric_limits<double>::infinity();
    return cand;
  }
  if (auto report = steepness(cand.pdf, options.utmost)) {
    cand.has_report = true;
    cand.steepness = report->steepness;
  }
  return cand;
}

// Steeper first; count and then smaller size break ties deterministically.
bool steeper(const Candidate& a, const Candidate& b) {
  if (a.has_report != b.has_report) return a.has_report;
  if (a.steepness != b.steepness) return a.steepness > b.steepness;
  if (a.group->intt_samples.size() != b.group->intt_samples.size())
    return a.group->intt_samples.size() > b.group->intt_samples.size();
  return a.group->key.size_sectors < b.group->key.size_sectors;
}

std::vector<Candidate> collect(const std::vector<RequestGroup>& groups,
                               Sequentiality seq, std::optional<OpType> op,
                               const FitOptions& options, size_t min_samples) {
  std::vector<Candidate> cands;
  for (const RequestGroup& g : groups) {
    if (g.key.seq != seq) continue;
    if (op && g.key.op != *op) continue;
    if (g.intt_samples.size() < std::max<size_t>(min_samples, 2)) continue;
    cands.push_back(make_candidate(g, options));
  }
  std::sort(cands.begin(), cands.end(), steeper);
  return cands;
}

// Groups with a detected spike outrank the rest; when none have one, fall
// back to the largest interpolated-CDF slope.
void rerank_by_curve_slope(std::vector<Candidate>& cands) {
  if (cands.empty() || cands.front().has_report) return;
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return pchip_fit(a.cdf).max_derivative().slope >
           pchip_fit(b.cdf).max_derivative().slope;
  });
}

int64_t vertical_diff_location(const Candidate& c1, const Candidate& c2, bool absolute) {
  PiecewiseCurve f1 = pchip_fit(c1.cdf);
  PiecewiseCurve f2 = pchip_fit(c2.cdf);
  std::vector<double> xs;
  xs.reserve(f1.knots_x().size() + f2.knots_x().size());
  xs.insert(xs.end(), f1.knots_x().begin(), f1.knots_x().end());
  xs.insert(xs.end(), f2.knots_x().begin(), f2.knots_x().end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys;
  ys.reserve(xs.size());
  for (double x : xs) {
    double d = f1(x) - f2(x);
    ys.push_back(absolute ? std::fabs(d) : d);
  }
  PiecewiseCurve diff = pchip_fit(std::move(xs), std::move(ys));
  return static_cast<int64_t>(std::llround(diff.max_derivative().x));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_notes(const std::vector<std::string>& notes) {
  std::string out;
  for (size_t i = 0; i < notes.size(); ++i) {
    if (i) out += "; ";
    out += notes[i];
  }
  return out;
}

}  // namespace

const char* fit_path_name(FitPath path) {
  switch (path) {
    case FitPath::TwoCdf: return "two-cdf";
    case FitPath::SingleCdf: return "single-cdf";
    case FitPath::SingleCdfRandom: return "single-cdf-random";
    case FitPath::None: return "none";
  }
  return "none";
}

uint64_t representative_intt(const EmpiricalCdf& cdf) {
  PiecewiseCurve curve = pchip_fit(cdf);
  return snap_to_support(cdf.support, curve.max_derivative().x);
}

CoefficientFit fit_coefficients(const std::vector<RequestGroup>& groups, OpType op,
                                const FitOptions& options) {
  CoefficientFit fit;

  std::vector<Candidate> cands =
      collect(groups, Sequentiality::Sequential, op, options, options.min_group_samples);
  if (cands.empty()) {
    cands = collect(groups, Sequentiality::Sequential, op, options, 2);
    if (!cands.empty())
      fit.notes.push_back("all sequential groups below sample threshold");
  }
  bool from_random = false;
  if (cands.empty()) {
    cands = collect(groups, Sequentiality::Random, op, options, options.min_group_samples);
    if (cands.empty()) cands = collect(groups, Sequentiality::Random, op, options, 2);
    if (cands.empty()) {
      fit.notes.push_back("no groups for this op");
      return fit;  // path stays None, coefficients 0
    }
    from_random = true;
    fit.notes.push_back("no sequential groups; fitted from random-access groups");
  }
  rerank_by_curve_slope(cands);

  const Candidate& c1 = cands.front();
  fit.size_r1 = c1.group->key.size_sectors;
  fit.steepness1 = c1.steepness;
  fit.t_prime_ns = representative_intt(c1.cdf);

  bool two_cdf = !from_random && cands.size() >= 2 && cands[0].has_report &&
                 cands[1].has_report;
  if (!two_cdf) {
    // Single-CDF fallback: the whole representative gap is attributed to the
    // device, proportional in size.
    fit.path = from_random ? FitPath::SingleCdfRandom : FitPath::SingleCdf;
    fit.slope_ns_per_sector =
        static_cast<double>(fit.t_prime_ns) / static_cast<double>(fit.size_r1);
    fit.t_cdel_ns = 0;
    if (!from_random) fit.notes.push_back("single-cdf fallback: fewer than two usable groups");
    return fit;
  }

  const Candidate& c2 = cands[1];
  fit.path = FitPath::TwoCdf;
  fit.size_r2 = c2.group->key.size_sectors;
  fit.steepness2 = c2.steepness;
  uint64_t t2 = representative_intt(c2.cdf);

  double slope_raw = 0;
  switch (options.diff_mode) {
    case DiffMode::LocationGap: {
      int64_t delta = static_cast<int64_t>(fit.t_prime_ns) - static_cast<int64_t>(t2);
      int64_t dsize = static_cast<int64_t>(fit.size_r1) - static_cast<int64_t>(fit.size_r2);
      fit.delta_t_ns = delta;
      slope_raw = static_cast<double>(delta) / static_cast<double>(dsize);
      break;
    }
    case DiffMode::VerticalSigned:
    case DiffMode::VerticalAbs: {
      int64_t loc = vertical_diff_location(c1, c2, options.diff_mode == DiffMode::VerticalAbs);
      fit.delta_t_ns = loc;
      uint32_t lo = std::min(fit.size_r1, fit.size_r2);
      uint32_t hi = std::max(fit.size_r1, fit.size_r2);
      slope_raw = static_cast<double>(loc) / static_cast<double>(hi - lo);
      break;
    }
  }

  if (slope_raw < 0) {
    fit.clamped_slope = true;
    fit.notes.push_back("negative per-sector slope clamped to 0 (gap direction opposes size direction)");
    slope_raw = 0;
  }
  fit.slope_ns_per_sector = slope_raw;

  double cdel = static_cast<double>(fit.t_prime_ns) - slope_raw * fit.size_r1;
  if (cdel < 0) {
    fit.clamped_cdel = true;
    fit.notes.push_back("negative channel delay clamped to 0");
    cdel = 0;
  }
  fit.t_cdel_ns = cdel;
  return fit;
}

MovdFit fit_movd(const std::vector<RequestGroup>& groups, const CoefficientFit& read,
                 const CoefficientFit& write, const FitOptions& options) {
  MovdFit fit;
  std::vector<Candidate> cands =
      collect(groups, Sequentiality::Random, std::nullopt, options, options.min_group_samples);
  if (cands.empty()) {
    cands = collect(groups, Sequentiality::Random, std::nullopt, options, 2);
    if (!cands.empty()) fit.notes.push_back("all random groups below sample threshold");
  }
  if (cands.empty()) {
    fit.notes.push_back("no random-access groups; t_movd set to 0");
    return fit;
  }
  rerank_by_curve_slope(cands);

  const Candidate& c = cands.front();
  fit.source_key = c.group->key;
  fit.t_rand_ns = representative_intt(c.cdf);

  const CoefficientFit& cf = c.group->key.op == OpType::Read ? read : write;
  if (cf.path == FitPath::None) {
    fit.notes.push_back("no coefficient fit for the steepest random group's op; t_movd set to 0");
    return fit;
  }
  double linear = cf.t_cdel_ns + cf.slope_ns_per_sector * c.group->key.size_sectors;
  double movd = static_cast<double>(fit.t_rand_ns) - linear;
  if (movd < 0) {
    fit.clamped = true;
    fit.notes.push_back("negative t_movd clamped to 0");
    movd = 0;
  }
  fit.t_movd_ns = movd;
  fit.found = true;
  return fit;
}

LatencyModel fit_model(const std::vector<RequestGroup>& groups, const FitOptions& options) {
  LatencyModel model;
  model.quantum_ns = options.quantum_ns;
  model.read = fit_coefficients(groups, OpType::Read, options);
  model.write = fit_coefficients(groups, OpType::Write, options);
  model.movd = fit_movd(groups, model.read, model.write, options);
  return model;
}

LatencyModel fit_model(const Trace& trace, const FitOptions& options) {
  return fit_model(classify(trace), options);
}

double t_sdev(const LatencyModel& model, OpType op, uint32_t size_sectors,
              Sequentiality seq) {
  double v = model.coeff(op).slope_ns_per_sector * static_cast<double>(size_sectors);
  if (seq == Sequentiality::Random) v += model.movd.t_movd_ns;
  return v;
}

std::vector<Decomposition> decompose(const Trace& trace, const LatencyModel* model) {
  const size_t n = trace.records.size();
  if (n == 0) fail(Errc::EmptyTrace, "cannot decompose an empty trace");

  std::vector<Sequentiality> flags = sequentiality_flags(trace);
  std::vector<Decomposition> out(n);
  for (size_t i = 0; i < n; ++i) {
    const IoRecord& rec = trace.records[i];
    Decomposition& d = out[i];

    uint64_t sdev = 0;
    uint64_t cdel = 0;
    if (model) cdel = static_cast<uint64_t>(std::llround(model->coeff(rec.op).t_cdel_ns));
    if (rec.response_ns) {
      sdev = *rec.response_ns;
    } else {
      if (!model)
        fail(Errc::ModelMissing,
             "record " + std::to_string(i) + " has no response_ns and no model was given");
      sdev = static_cast<uint64_t>(
          std::llround(t_sdev(*model, rec.op, rec.size_sectors, flags[i])));
    }
    d.t_cdel_ns = cdel;
    d.t_sdev_ns = sdev;
    d.t_slat_ns = cdel + sdev;

    if (i + 1 < n) {
      uint64_t a = rec.arrival_ns;
      uint64_t b = trace.records[i + 1].arrival_ns;
      if (b < a) fail(Errc::Misaligned, "arrival timestamps not sorted");
      d.t_intt_ns = b - a;
      d.t_idle_ns = d.t_intt_ns > d.t_slat_ns ? d.t_intt_ns - d.t_slat_ns : 0;
      d.is_async = d.t_intt_ns < d.t_sdev_ns;
    }
  }
  return out;
}

std::string model_to_text(const LatencyModel& model) {
  std::string out;
  out += "# retrace latency model; all times in ns\n";
  out += "format_version=1\n";
  out += "quantum_ns=" + std::to_string(model.quantum_ns) + "\n";
  auto emit_coeff = [&out](const char* prefix, const CoefficientFit& cf) {
    std::string p(prefix);
    out += p + ".slope_ns_per_sector=" + fmt_double(cf.slope_ns_per_sector) + "\n";
    out += p + ".t_cdel_ns=" + fmt_double(cf.t_cdel_ns) + "\n";
    out += p + ".path=" + fit_path_name(cf.path) + "\n";
    out += p + ".size_r1=" + std::to_string(cf.size_r1) + "\n";
    out += p + ".size_r2=" + std::to_string(cf.size_r2) + "\n";
    out += p + ".steepness1=" + fmt_double(cf.steepness1) + "\n";
    out += p + ".steepness2=" + fmt_double(cf.steepness2) + "\n";
    out += p + ".t_prime_ns=" + std::to_string(cf.t_prime_ns) + "\n";
    out += p + ".delta_t_ns=" + std::to_string(cf.delta_t_ns) + "\n";
    out += p + ".clamped_slope=" + std::string(cf.clamped_slope ? "1" : "0") + "\n";
    out += p + ".clamped_cdel=" + std::string(cf.clamped_cdel ? "1" : "0") + "\n";
    if (!cf.notes.empty()) out += p + ".notes=" + join_notes(cf.notes) + "\n";
  };
  emit_coeff("read", model.read);
  emit_coeff("write", model.write);
  out += "movd.t_movd_ns=" + fmt_double(model.movd.t_movd_ns) + "\n";
  out += "movd.found=" + std::string(model.movd.found ? "1" : "0") + "\n";
  out += "movd.source=" + group_key_name(model.movd.source_key) + "\n";
  out += "movd.t_rand_ns=" + std::to_string(model.movd.t_rand_ns) + "\n";
  out += "movd.clamped=" + std::string(model.movd.clamped ? "1" : "0") + "\n";
  if (!model.movd.notes.empty()) out += "movd.notes=" + join_notes(model.movd.notes) + "\n";
  return out;
}

namespace {

FitPath fit_path_from_name(std::string_view name) {
  if (name == "two-cdf") return FitPath::TwoCdf;
  if (name == "single-cdf") return FitPath::SingleCdf;
  if (name == "single-cdf-random") return FitPath::SingleCdfRandom;
  return FitPath::None;
}

GroupKey group_key_from_name(std::string_view name) {
  GroupKey key;
  size_t c1 = name.find(':');
  size_t c2 = name.rfind(':');
  if (c1 == std::string_view::npos || c2 == c1) return key;
  key.seq = name.substr(0, c1) == "seq" ? Sequentiality::Sequential : Sequentiality::Random;
  key.op = name.substr(c1 + 1, c2 - c1 - 1) == "W" ? OpType::Write : OpType::Read;
  key.size_sectors = static_cast<uint32_t>(std::strtoul(std::string(name.substr(c2 + 1)).c_str(), nullptr, 10));
  return key;
}

}  // namespace

LatencyModel model_from_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }

  auto get = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) fail(Errc::ModelMissing, "model file missing key " + key);
    return it->second;
  };
  auto get_or = [&kv](const std::string& key, const std::string& dflt) {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
  };

  if (get("format_version") != "1")
    fail(Errc::ModelMissing, "unsupported model format_version");

  LatencyModel model;
  model.quantum_ns = std::strtoull(get("quantum_ns").c_str(), nullptr, 10);
  auto read_coeff = [&](const std::string& p, CoefficientFit& cf) {
    cf.slope_ns_per_sector = std::strtod(get(p + ".slope_ns_per_sector").c_str(), nullptr);
    cf.t_cdel_ns = std::strtod(get(p + ".t_cdel_ns").c_str(), nullptr);
    cf.path = fit_path_from_name(get_or(p + ".path", "none"));
    cf.size_r1 = static_cast<uint32_t>(std::strtoul(get_or(p + ".size_r1", "0").c_str(), nullptr, 10));
    cf.size_r2 = static_cast<uint32_t>(std::strtoul(get_or(p + ".size_r2", "0").c_str(), nullptr, 10));
    cf.steepness1 = std::strtod(get_or(p + ".steepness1", "0").c_str(), nullptr);
    cf.steepness2 = std::strtod(get_or(p + ".steepness2", "0").c_str(), nullptr);
    cf.t_prime_ns = std::strtoull(get_or(p + ".t_prime_ns", "0").c_str(), nullptr, 10);
    cf.delta_t_ns = std::strtoll(get_or(p + ".delta_t_ns", "0").c_str(), nullptr, 10);
    cf.clamped_slope = get_or(p + ".clamped_slope", "0") == "1";
    cf.clamped_cdel = get_or(p + ".clamped_cdel", "0") == "1";
    std::string notes = get_or(p + ".notes", "");
    if (!notes.empty()) cf.notes.push_back(notes);
  };
  read_coeff("read", model.read);
  read_coeff("write", model.write);
  model.movd.t_movd_ns = std::strtod(get("movd.t_movd_ns").c_str(), nullptr);
  model.movd.found = get_or("movd.found", "0") == "1";
  model.movd.source_key = group_key_from_name(get_or("movd.source", "rand:R:0"));
  model.movd.t_rand_ns = std::strtoull(get_or("movd.t_rand_ns", "0").c_str(), nullptr, 10);
  model.movd.clamped = get_or("movd.clamped", "0") == "1";
  std::string notes = get_or("movd.notes", "");
  if (!notes.empty()) model.movd.notes.push_back(notes);
  return model;
}

void write_model(const LatencyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot open " + path.string() + " for writing");
  std::string text = model_to_text(model);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(Errc::IoError, "write failed on " + path.string());
}

LatencyModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(Errc::IoError, "read failed on " + path.string());
  return model_from_text(buf.str());
}

}  // namespace retrace
