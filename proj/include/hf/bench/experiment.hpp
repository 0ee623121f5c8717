#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "hf/bench/metrics.hpp"
#include "hf/bench/synthetic.hpp"
#include "hf/errors.hpp"
#include "hf/pipeline.hpp"

namespace hf::bench {

/// Frame line parameters are compared in. Unit maps the scene domain onto
/// [0,1]^2 first; data compares (a,b,c) in input coordinates.
enum class ErrorFrame { Unit, Data };

inline ErrorFrame parse_error_frame(std::string_view s) {
  if (s == "unit") return ErrorFrame::Unit;
  if (s == "data") return ErrorFrame::Data;
  throw Error(ErrorCode::InvalidArgument, "error frame must be 'unit' or 'data'");
}

struct RunRecord {
  std::uint64_t data_seed = 0;
  std::uint64_t sampler_seed = 0;
  std::size_t k0 = 0;
  std::size_t structures = 0;
  bool failed = false;  // NoStructuresFound
  double fitting_error = 0.0;
  double segmentation_error = 0.0;
  double sampling_s = 0.0;
  double fitting_s = 0.0;  // everything after sampling
};

struct ExperimentReport {
  std::string name;
  std::size_t true_count = 0;
  std::vector<RunRecord> runs;
  double mean_fitting_error = 0.0;
  double median_fitting_error = 0.0;
  double mean_segmentation_error = 0.0;
  double mean_sampling_s = 0.0;
  double mean_fitting_s = 0.0;
  double k0_accuracy = 0.0;     // fraction of runs with k0 == true count
  double count_accuracy = 0.0;  // same for the number of reported structures
};

inline ParamList comparable_params(const ParamList& params, ModelKind kind, const Box& domain, ErrorFrame frame) {
  if (kind != ModelKind::Line2D || frame == ErrorFrame::Data) return params;
  ParamList out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(line_params_in_unit_frame(p, domain));
  return out;
}

/// Scores one fit against ground truth.
inline RunRecord score_run(const LabeledDataSet& truth, const SyntheticSpec& spec, const FitResult& result,
                           ErrorFrame frame) {
  RunRecord rec;
  rec.k0 = result.diagnostics.k0;
  rec.structures = result.structures.size();
  ParamList est;
  for (const auto& s : result.structures) est.push_back(s.hypothesis.param_vector());
  rec.fitting_error = fitting_error(comparable_params(truth.gt_params, spec.kind, spec.domain, frame),
                                    comparable_params(est, spec.kind, spec.domain, frame));
  rec.segmentation_error = segmentation_error(truth.gt_labels, result.labels);
  rec.sampling_s = result.diagnostics.timings.sampling_s;
  rec.fitting_s = result.diagnostics.timings.total_s - result.diagnostics.timings.sampling_s;
  return rec;
}

inline void summarize(ExperimentReport& rep) {
  const auto n = static_cast<double>(rep.runs.size());
  if (rep.runs.empty()) return;
  std::vector<double> fe;
  double se = 0.0, ts = 0.0, tf = 0.0, hits = 0.0, k0_hits = 0.0;
  for (const auto& r : rep.runs) {
    fe.push_back(r.fitting_error);
    se += r.segmentation_error;
    ts += r.sampling_s;
    tf += r.fitting_s;
    if (r.structures == rep.true_count) hits += 1.0;
    if (r.k0 == rep.true_count) k0_hits += 1.0;
  }
  double sum = 0.0;
  for (double v : fe) sum += v;
  rep.mean_fitting_error = sum / n;
  std::sort(fe.begin(), fe.end());
  const std::size_t m = fe.size();
  rep.median_fitting_error = m % 2 ? fe[m / 2] : 0.5 * (fe[m / 2 - 1] + fe[m / 2]);
  rep.mean_segmentation_error = se / n;
  rep.mean_sampling_s = ts / n;
  rep.mean_fitting_s = tf / n;
  rep.count_accuracy = hits / n;
  rep.k0_accuracy = k0_hits / n;
}

/// Repeats generate + fit with data seed spec.rng_seed + r and sampler seed
/// cfg.sampler.rng_seed + r for r = 0..repeats-1. A run where nothing is
/// found scores every structure as missed and every point as an outlier.
inline ExperimentReport run_experiment(const SyntheticSpec& spec, const FitConfig& cfg, std::size_t repeats,
                                       ErrorFrame frame = ErrorFrame::Unit, const std::string& name = "") {
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be at least 1");
  ExperimentReport rep;
  rep.name = name;
  rep.true_count = spec.structures.size();
  for (std::size_t r = 0; r < repeats; ++r) {
    SyntheticSpec s = spec;
    s.rng_seed = spec.rng_seed + r;
    const LabeledDataSet truth = generate(s);
    FitConfig c = cfg;
    c.kind = spec.kind;
    c.sampler.rng_seed = cfg.sampler.rng_seed + r;
    RunRecord rec;
    try {
      rec = score_run(truth, s, fit(truth.data, c), frame);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoStructuresFound) throw;
      FitResult empty;
      empty.kind = spec.kind;
      empty.labels.assign(truth.data.size(), 0);
      rec = score_run(truth, s, empty, frame);
      rec.failed = true;
    }
    rec.data_seed = s.rng_seed;
    rec.sampler_seed = c.sampler.rng_seed;
    rep.runs.push_back(rec);
  }
  summarize(rep);
  return rep;
}

inline std::string format_report_table(const ExperimentReport& rep) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %6s %6s %10s %10s %10s %10s\n", "run", "k0", "found", "fit_err", "seg_err%",
                "sample_s", "fit_s");
  out += line;
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& r = rep.runs[i];
    std::snprintf(line, sizeof line, "%-10zu %6zu %6zu %10.4f %10.2f %10.3f %10.3f%s\n", i, r.k0, r.structures,
                  r.fitting_error, r.segmentation_error, r.sampling_s, r.fitting_s, r.failed ? "  (none found)" : "");
    out += line;
  }
  std::snprintf(line, sizeof line,
                "%s: runs=%zu true_k=%zu k0_accuracy=%.2f count_accuracy=%.2f mean_fit_err=%.4f median_fit_err=%.4f "
                "mean_seg_err=%.2f%% mean_sample_s=%.3f mean_fit_s=%.3f\n",
                rep.name.empty() ? "summary" : rep.name.c_str(), rep.runs.size(), rep.true_count, rep.k0_accuracy, rep.count_accuracy,
                rep.mean_fitting_error, rep.median_fitting_error, rep.mean_segmentation_error, rep.mean_sampling_s,
                rep.mean_fitting_s);
  out += line;
  return out;
}

inline nlohmann::json report_to_json(const ExperimentReport& rep, bool include_timings = true) {
  using nlohmann::json;
  json runs = json::array();
  for (const auto& r : rep.runs) {
    json j = {{"data_seed", r.data_seed},
              {"sampler_seed", r.sampler_seed},
              {"k0", r.k0},
              {"structures", r.structures},
              {"failed", r.failed},
              {"fitting_error", r.fitting_error},
              {"segmentation_error", r.segmentation_error}};
    if (include_timings) {
      j["sampling_s"] = r.sampling_s;
      j["fitting_s"] = r.fitting_s;
    }
    runs.push_back(std::move(j));
  }
  json out = {{"name", rep.name},
              {"true_count", rep.true_count},
              {"runs", std::move(runs)},
              {"mean_fitting_error", rep.mean_fitting_error},
              {"median_fitting_error", rep.median_fitting_error},
              {"mean_segmentation_error", rep.mean_segmentation_error},
              {"k0_accuracy", rep.k0_accuracy},
              {"count_accuracy", rep.count_accuracy}};
  if (include_timings) {
    out["mean_sampling_s"] = rep.mean_sampling_s;
    out["mean_fitting_s"] = rep.mean_fitting_s;
  }
  return out;
}

}  // namespace hf::bench
