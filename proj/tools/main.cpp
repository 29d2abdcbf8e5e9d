// Copyright 2026 The retrace Authors
// SPDX-License-Identifier: Apache-2.0
//
// retrace: command line front end for the trace reconstruction pipeline.
// Stages compose through file artifacts:
//
//   analyze     group statistics and spike steepness per request group
//   infer       fit the latency model from inter-arrival distributions
//   reconstruct decompose, replay against a backend, restore async timing
//   verify      closed-loop idle injection scoring
//   compare     per-record inter-arrival diff between two traces
//   synth       generate a synthetic workload with known ground truth

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "retrace/error.hpp"
#include "retrace/grouping.hpp"
#include "retrace/inference.hpp"
#include "retrace/ingest.hpp"
#include "retrace/postprocess.hpp"
#include "retrace/replay.hpp"
#include "retrace/synth.hpp"
#include "retrace/trace.hpp"
#include "retrace/units.hpp"
#include "retrace/verify.hpp"

namespace {

using retrace::Trace;

// Duration-valued flag: accepts "100us", "1.5ms", bare ns.
CLI::Option* add_duration(CLI::App* app, const std::string& name, uint64_t& target,
                          const std::string& desc) {
  CLI::Option* opt = app->add_option_function<std::string>(
      name,
      [&target, name](const std::string& text) {
        try {
          target = retrace::parse_duration_ns(text);
        } catch (const retrace::Error& e) {
          throw CLI::ValidationError(name, e.what());
        }
      },
      desc);
  opt->default_str(retrace::format_duration_ns(target));
  return opt;
}

struct FormatFlag {
  std::string name = "canonical";
  retrace::TraceFormat value() const { return retrace::format_from_name(name); }
};

CLI::Option* add_format(CLI::App* app, FormatFlag& flag, const char* name = "--format") {
  return app->add_option(name, flag.name, "Trace file format")
      ->check(CLI::IsMember({"canonical", "msrc", "fiu"}))
      ->capture_default_str();
}

struct FitFlags {
  uint64_t quantum_ns = 1000;
  size_t min_group_samples = 30;
  std::string utmost = "mass";
  std::string diff_mode = "location-gap";

  retrace::FitOptions options() const {
    retrace::FitOptions opts;
    opts.quantum_ns = quantum_ns;
    opts.min_group_samples = min_group_samples;
    opts.utmost = utmost == "distance" ? retrace::UtmostRule::MaxDistance
                                       : retrace::UtmostRule::MaxMass;
    if (diff_mode == "vertical-signed") {
      opts.diff_mode = retrace::DiffMode::VerticalSigned;
    } else if (diff_mode == "vertical-abs") {
      opts.diff_mode = retrace::DiffMode::VerticalAbs;
    } else {
      opts.diff_mode = retrace::DiffMode::LocationGap;
    }
    return opts;
  }
};

void add_fit_flags(CLI::App* app, FitFlags& flags) {
  add_duration(app, "--quantum", flags.quantum_ns, "Inter-arrival quantization step");
  app->add_option("--min-group-samples", flags.min_group_samples,
                  "Samples a group needs before its distribution is trusted")
      ->capture_default_str();
  app->add_option("--utmost", flags.utmost, "Spike pick among outliers")
      ->check(CLI::IsMember({"mass", "distance"}))
      ->capture_default_str();
  app->add_option("--diff-mode", flags.diff_mode,
                  "How the two steepest CDFs are differenced for the per-sector slope")
      ->check(CLI::IsMember({"location-gap", "vertical-signed", "vertical-abs"}))
      ->capture_default_str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) retrace::fail(retrace::Errc::IoError, "cannot open for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) retrace::fail(retrace::Errc::IoError, "write failed: " + path);
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string trace_path;
  FormatFlag format;
  FitFlags fit;
  std::string out_path;
};

void run_analyze(const AnalyzeArgs& args) {
  Trace trace = retrace::parse_trace(args.trace_path, args.format.value());
  std::vector<retrace::RequestGroup> groups = retrace::classify(trace);
  retrace::FitOptions opts = args.fit.options();

  std::string csv =
      "group,count,min_intt_ns,median_intt_ns,max_intt_ns,steepness,representative_ns\n";
  for (const retrace::RequestGroup& group : groups) {
    csv += retrace::group_key_name(group.key);
    csv += ',';
    csv += std::to_string(group.member_indices.size());
    csv += ',';
    if (!group.intt_samples.empty()) {
      std::vector<uint64_t> sorted = group.intt_samples;
      std::sort(sorted.begin(), sorted.end());
      size_t n = sorted.size();
      uint64_t median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2;
      csv += std::to_string(sorted.front());
      csv += ',';
      csv += std::to_string(median);
      csv += ',';
      csv += std::to_string(sorted.back());
      csv += ',';
      retrace::EmpiricalPdf pdf = retrace::build_pdf(group.intt_samples, opts.quantum_ns);
      if (pdf.support.size() >= 2) {
        if (auto report = retrace::steepness(pdf, opts.utmost)) {
          csv += fmt_double(report->steepness);
        }
      }
      csv += ',';
      csv += std::to_string(retrace::representative_intt(retrace::cdf_from_pdf(pdf)));
    } else {
      csv += ",,,,";
    }
    csv += '\n';
  }

  if (args.out_path.empty()) {
    std::cout << csv;
  } else {
    write_text_file(args.out_path, csv);
  }
  std::cerr << "analyze: " << trace.records.size() << " records, " << groups.size()
            << " groups\n";
}

// ------------------------------------------------------------------ infer

struct InferArgs {
  std::string trace_path;
  FormatFlag format;
  FitFlags fit;
  std::string model_out;
};

void run_infer(const InferArgs& args) {
  Trace trace = retrace::parse_trace(args.trace_path, args.format.value());
  retrace::LatencyModel model = retrace::fit_model(trace, args.fit.options());
  if (!args.model_out.empty()) {
    retrace::write_model(model, args.model_out);
  } else {
    std::cout << retrace::model_to_text(model);
  }
  std::cerr << "infer: read slope " << fmt_double(model.read.slope_ns_per_sector)
            << " ns/sector (" << retrace::fit_path_name(model.read.path) << "), write slope "
            << fmt_double(model.write.slope_ns_per_sector) << " ns/sector ("
            << retrace::fit_path_name(model.write.path) << "), movd "
            << fmt_double(model.movd.t_movd_ns) << " ns\n";
}

// ------------------------------------------------------------ reconstruct

struct ReconstructArgs {
  std::string trace_path;
  FormatFlag format;
  FitFlags fit;
  std::string out_path;
  std::string model_path;
  std::string backend = "sim";
  std::string sim_model_path;
  std::string target_path;
  std::optional<uint64_t> seed;
  bool virtual_clock = false;
  uint64_t spin_window_ns = 1'000'000;
  bool no_postprocess = false;
};

void run_reconstruct(const ReconstructArgs& args) {
  Trace trace = retrace::parse_trace(args.trace_path, args.format.value());

  bool all_responses = true;
  for (const retrace::IoRecord& rec : trace.records) {
    if (!rec.response_ns.has_value()) {
      all_responses = false;
      break;
    }
  }

  std::optional<retrace::LatencyModel> model;
  if (!args.model_path.empty()) {
    model = retrace::read_model(args.model_path);
  } else if (!all_responses) {
    std::cerr << "reconstruct: no model file given, fitting from the trace\n";
    model = retrace::fit_model(trace, args.fit.options());
  }
  std::vector<retrace::Decomposition> decomp =
      retrace::decompose(trace, model ? &*model : nullptr);

  std::unique_ptr<retrace::DeviceBackend> backend;
  if (args.backend == "sim") {
    retrace::SimulatedParams params;
    if (!args.sim_model_path.empty()) params = retrace::read_sim_params(args.sim_model_path);
    if (args.seed) params.seed = *args.seed;
    backend = std::make_unique<retrace::SimulatedBackend>(params);
  } else {
    if (args.target_path.empty()) {
      retrace::fail(retrace::Errc::BackendIoError, "--backend file needs --target");
    }
    backend = std::make_unique<retrace::RealFileBackend>(args.target_path);
  }

  retrace::ReplayOptions opts;
  opts.virtual_clock = args.virtual_clock;
  opts.spin_window_ns = args.spin_window_ns;
  retrace::ReplayLog log = retrace::replay(trace, decomp, *backend, opts);
  Trace captured = retrace::capture_trace(log, trace);

  size_t async_count = 0;
  if (!args.no_postprocess) {
    captured = retrace::restore_async(decomp, captured);
    for (const retrace::IoRecord& rec : captured.records) {
      if (rec.async_hint) ++async_count;
    }
  }
  retrace::write_canonical(captured, args.out_path);

  uint64_t span = captured.records.empty()
                      ? 0
                      : captured.records.back().arrival_ns - captured.records.front().arrival_ns;
  std::cerr << "reconstruct: " << captured.records.size() << " records over "
            << retrace::format_duration_ns(span) << " (" << backend->name() << " backend, "
            << (args.no_postprocess ? "no postprocess" : std::to_string(async_count) +
                                                             " async gaps restored")
            << ")\n";
}

// ----------------------------------------------------------------- verify

struct VerifyArgs {
  std::string trace_path;
  FormatFlag format;
  FitFlags fit;
  std::string model_path;
  std::string report_path;
  double inject_frac = 0.1;
  uint64_t idle_min_ns = 100'000;
  uint64_t idle_max_ns = 100'000'000;
  uint64_t seed = 1;
  uint64_t max_existing_gap_ns = 0;
  uint64_t tp_threshold_ns = 0;
  std::string baseline = "none";
  double factor = 100;
  uint64_t fixed_threshold_ns = 10'000'000;
};

void run_verify(const VerifyArgs& args) {
  Trace trace = retrace::parse_trace(args.trace_path, args.format.value());

  retrace::PlanConfig config;
  config.fraction = args.inject_frac;
  config.idle_min_ns = args.idle_min_ns;
  config.idle_max_ns = args.idle_max_ns;
  config.seed = args.seed;
  config.max_existing_gap_ns = args.max_existing_gap_ns;
  retrace::InjectionPlan plan = retrace::make_plan(trace, config);
  Trace injected = retrace::inject(trace, plan);

  std::vector<retrace::Decomposition> decomp;
  if (args.baseline == "revision") {
    decomp = retrace::zero_idle_decomposition(injected);
  } else if (args.baseline == "fixed-th") {
    decomp = retrace::fixed_threshold_decomposition(injected, args.fixed_threshold_ns);
  } else if (args.baseline == "acceleration") {
    Trace accelerated = retrace::accelerate(injected, args.factor);
    retrace::LatencyModel model = args.model_path.empty()
                                      ? retrace::fit_model(accelerated, args.fit.options())
                                      : retrace::read_model(args.model_path);
    decomp = retrace::decompose(accelerated, &model);
  } else {
    retrace::LatencyModel model = args.model_path.empty()
                                      ? retrace::fit_model(injected, args.fit.options())
                                      : retrace::read_model(args.model_path);
    decomp = retrace::decompose(injected, &model);
  }

  retrace::VerificationReport report = retrace::score(plan, decomp, args.tp_threshold_ns);
  std::string csv = retrace::report_to_csv(report);
  if (args.report_path.empty()) {
    std::cout << csv;
  } else {
    write_text_file(args.report_path, csv);
  }
  std::cerr << "verify: injected " << report.injected_count << " idles, Detection(TP) "
            << fmt_double(report.detection_tp) << ", Detection(FP) "
            << fmt_double(report.detection_fp) << ", Len(TP) " << fmt_double(report.len_tp)
            << "\n";
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string old_path;
  std::string new_path;
  FormatFlag old_format;
  FormatFlag new_format;
  std::string out_path;
};

void run_compare(const CompareArgs& args) {
  Trace old_trace = retrace::parse_trace(args.old_path, args.old_format.value());
  Trace new_trace = retrace::parse_trace(args.new_path, args.new_format.value());
  if (old_trace.records.size() != new_trace.records.size()) {
    retrace::fail(retrace::Errc::Misaligned,
                  "traces differ in record count: " + std::to_string(old_trace.records.size()) +
                      " vs " + std::to_string(new_trace.records.size()));
  }
  std::vector<uint64_t> old_gaps = retrace::inter_arrival_times(old_trace);
  std::vector<uint64_t> new_gaps = retrace::inter_arrival_times(new_trace);

  std::string csv = "index,old_intt_ns,new_intt_ns,diff_ns\n";
  double sum_diff = 0;
  double sum_abs = 0;
  int64_t max_abs = 0;
  for (size_t i = 0; i < old_gaps.size(); ++i) {
    int64_t diff = static_cast<int64_t>(new_gaps[i]) - static_cast<int64_t>(old_gaps[i]);
    sum_diff += static_cast<double>(diff);
    int64_t abs_diff = diff < 0 ? -diff : diff;
    sum_abs += static_cast<double>(abs_diff);
    max_abs = std::max(max_abs, abs_diff);
    csv += std::to_string(i);
    csv += ',';
    csv += std::to_string(old_gaps[i]);
    csv += ',';
    csv += std::to_string(new_gaps[i]);
    csv += ',';
    csv += std::to_string(diff);
    csv += '\n';
  }
  if (!args.out_path.empty()) write_text_file(args.out_path, csv);

  double n = static_cast<double>(old_gaps.size());
  std::cout << "gaps compared: " << old_gaps.size() << "\n"
            << "mean diff:     " << fmt_double(sum_diff / n) << " ns\n"
            << "mean |diff|:   " << fmt_double(sum_abs / n) << " ns\n"
            << "max |diff|:    " << max_abs << " ns\n";
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  std::string out_path;
  retrace::SynthConfig config;
  uint64_t cdel_read_ns = 20'000;
  uint64_t cdel_write_ns = 20'000;
  uint64_t movd_ns = 0;
  uint64_t jitter_ns = 0;
};

void run_synth(SynthArgs& args) {
  args.config.model.t_cdel_read_ns = static_cast<double>(args.cdel_read_ns);
  args.config.model.t_cdel_write_ns = static_cast<double>(args.cdel_write_ns);
  args.config.model.t_movd_ns = static_cast<double>(args.movd_ns);
  args.config.model.jitter_sigma_ns = static_cast<double>(args.jitter_ns);
  Trace trace = retrace::generate_trace(args.config);
  retrace::write_canonical(trace, args.out_path);
  std::cerr << "synth: " << trace.records.size() << " records -> " << args.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace reconstruction toolkit for legacy block I/O workloads"};
  app.set_version_flag("--version", std::string("retrace ") + RETRACE_VERSION);
  app.set_config("--config", "", "Read options from a key=value file");
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Group statistics and spike steepness");
  analyze_cmd->add_option("trace", analyze.trace_path, "Input trace file")->required();
  add_format(analyze_cmd, analyze.format);
  add_fit_flags(analyze_cmd, analyze.fit);
  analyze_cmd->add_option("--out", analyze.out_path, "Group summary CSV (default stdout)");

  InferArgs infer;
  CLI::App* infer_cmd =
      app.add_subcommand("infer", "Fit the latency model from inter-arrival distributions");
  infer_cmd->add_option("trace", infer.trace_path, "Input trace file")->required();
  add_format(infer_cmd, infer.format);
  add_fit_flags(infer_cmd, infer.fit);
  infer_cmd->add_option("--model-out", infer.model_out, "Model file (default stdout)");

  ReconstructArgs reconstruct;
  CLI::App* reconstruct_cmd =
      app.add_subcommand("reconstruct", "Replay with inferred idles and restore async timing");
  reconstruct_cmd->add_option("trace", reconstruct.trace_path, "Input trace file")->required();
  add_format(reconstruct_cmd, reconstruct.format);
  add_fit_flags(reconstruct_cmd, reconstruct.fit);
  reconstruct_cmd->add_option("--out", reconstruct.out_path, "Reconstructed trace CSV")
      ->required();
  reconstruct_cmd->add_option("--model", reconstruct.model_path,
                              "Latency model file (fitted on the fly when omitted)");
  reconstruct_cmd->add_option("--backend", reconstruct.backend, "Replay target")
      ->check(CLI::IsMember({"sim", "file"}))
      ->capture_default_str();
  reconstruct_cmd->add_option("--sim-model", reconstruct.sim_model_path,
                              "Simulated device parameter file (key=value)");
  reconstruct_cmd->add_option("--target", reconstruct.target_path,
                              "Target file for --backend file");
  reconstruct_cmd->add_option("--seed", reconstruct.seed, "Simulated device jitter seed");
  reconstruct_cmd->add_flag("--virtual-clock", reconstruct.virtual_clock,
                            "Arithmetic clock instead of real waits");
  add_duration(reconstruct_cmd, "--spin-window", reconstruct.spin_window_ns,
               "Busy-wait window before each deadline");
  reconstruct_cmd->add_flag("--no-postprocess", reconstruct.no_postprocess,
                            "Skip async timing restoration");

  VerifyArgs verify;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Closed-loop idle injection scoring");
  verify_cmd->add_option("trace", verify.trace_path, "Base trace file")->required();
  add_format(verify_cmd, verify.format);
  add_fit_flags(verify_cmd, verify.fit);
  verify_cmd->add_option("--model", verify.model_path,
                         "Latency model file (fitted on the injected trace when omitted)");
  verify_cmd->add_option("--inject-frac", verify.inject_frac, "Fraction of records injected")
      ->capture_default_str();
  add_duration(verify_cmd, "--idle-min", verify.idle_min_ns, "Smallest injected idle");
  add_duration(verify_cmd, "--idle-max", verify.idle_max_ns, "Largest injected idle");
  verify_cmd->add_option("--seed", verify.seed, "Injection plan seed")->capture_default_str();
  add_duration(verify_cmd, "--max-existing-gap", verify.max_existing_gap_ns,
               "Skip indices whose gap already exceeds this (0 disables)");
  add_duration(verify_cmd, "--tp-threshold", verify.tp_threshold_ns,
               "Recovered idle must exceed this to count as positive");
  verify_cmd->add_option("--report", verify.report_path, "Report CSV (default stdout)");
  verify_cmd->add_option("--baseline", verify.baseline, "Score a baseline instead")
      ->check(CLI::IsMember({"none", "acceleration", "revision", "fixed-th"}))
      ->capture_default_str();
  verify_cmd->add_option("--factor", verify.factor, "Acceleration divisor")
      ->capture_default_str();
  add_duration(verify_cmd, "--fixed-threshold", verify.fixed_threshold_ns,
               "Idle threshold for --baseline fixed-th");

  CompareArgs compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Per-record inter-arrival diff of two traces");
  compare_cmd->add_option("old", compare.old_path, "Original trace")->required();
  compare_cmd->add_option("new", compare.new_path, "Reconstructed trace")->required();
  add_format(compare_cmd, compare.old_format, "--old-format");
  add_format(compare_cmd, compare.new_format, "--new-format");
  compare_cmd->add_option("--out", compare.out_path, "Per-gap diff CSV");

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic workload with known ground truth");
  synth_cmd->add_option("--out", synth.out_path, "Output trace CSV")->required();
  synth_cmd->add_option("--records", synth.config.records, "Record count")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--write-frac", synth.config.write_fraction, "Write fraction")
      ->capture_default_str();
  synth_cmd->add_option("--random-frac", synth.config.random_fraction,
                        "Random-access fraction")
      ->capture_default_str();
  synth_cmd->add_option("--async-frac", synth.config.async_fraction,
                        "Fraction of gaps shortened below the device time")
      ->capture_default_str();
  synth_cmd->add_option("--async-depth", synth.config.async_depth,
                        "Gap as a fraction of device time for async records")
      ->capture_default_str();
  synth_cmd->add_option("--read-sizes", synth.config.read_sizes, "Read sizes in sectors")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--write-sizes", synth.config.write_sizes, "Write sizes in sectors")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--beta", synth.config.model.read_ns_per_sector,
                        "Read ns per sector")
      ->capture_default_str();
  synth_cmd->add_option("--eta", synth.config.model.write_ns_per_sector,
                        "Write ns per sector")
      ->capture_default_str();
  add_duration(synth_cmd, "--cdel-read", synth.cdel_read_ns, "Read channel delay");
  add_duration(synth_cmd, "--cdel-write", synth.cdel_write_ns, "Write channel delay");
  add_duration(synth_cmd, "--movd", synth.movd_ns, "Random-access seek overhead");
  add_duration(synth_cmd, "--jitter", synth.jitter_ns, "Gaussian gap jitter sigma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const char* stage = "retrace";
  try {
    if (analyze_cmd->parsed()) {
      stage = "analyze";
      run_analyze(analyze);
    } else if (infer_cmd->parsed()) {
      stage = "infer";
      run_infer(infer);
    } else if (reconstruct_cmd->parsed()) {
      stage = "reconstruct";
      run_reconstruct(reconstruct);
    } else if (verify_cmd->parsed()) {
      stage = "verify";
      run_verify(verify);
    } else if (compare_cmd->parsed()) {
      stage = "compare";
      run_compare(compare);
    } else if (synth_cmd->parsed()) {
      stage = "synth";
      run_synth(synth);
    }
  } catch (const retrace::Error& e) {
    std::cerr << "retrace " << stage << ": error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "retrace " << stage << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
