#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hf/bench/experiment.hpp"
#include "hf/bench/io.hpp"
#include "hf/bench/metrics.hpp"
#include "hf/bench/svg.hpp"
#include "hf/bench/synthetic.hpp"
#include "hf/hf.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoStructures = 2;

struct FitFlags {
  std::string model;
  std::size_t hypotheses = 5000;
  std::size_t k_order = 10;
  std::size_t max_structures = 10;
  double theta = 2.5;
  double dedup_overlap = 0.8;
  std::uint64_t seed = 0;
  std::string sampler = "proximity";
  double sigma_prox = 0.0;
  bool refit = false;
  std::size_t forced_k = 0;
  unsigned threads = 1;
};

void add_fit_flags(CLI::App* app, FitFlags& f, bool model_required) {
  auto* m = app->add_option("--model", f.model, "line | circle | homography | fundamental");
  if (model_required) m->required();
  app->add_option("--hypotheses", f.hypotheses, "number of sampled hypotheses M")->capture_default_str();
  app->add_option("--k-order", f.k_order, "IKOSE order K")->capture_default_str();
  app->add_option("--max-structures", f.max_structures, "upper bound C on the structure count")
      ->capture_default_str();
  app->add_option("--theta", f.theta, "inlier threshold in units of sigma")->capture_default_str();
  app->add_option("--dedup-overlap", f.dedup_overlap, "overlap above which structures are duplicates")
      ->capture_default_str();
  app->add_option("--seed", f.seed, "sampler seed")->capture_default_str();
  app->add_option("--sampler", f.sampler, "uniform | proximity")
      ->check(CLI::IsMember({"uniform", "proximity"}))
      ->capture_default_str();
  app->add_option("--sigma-prox", f.sigma_prox, "proximity kernel width (0 = 10% of the bbox diagonal)")
      ->capture_default_str();
  app->add_flag("--refit", f.refit, "least-squares refit on the final inliers");
  app->add_option("--force-k", f.forced_k, "use this structure count instead of the estimate (0 = estimate)");
  app->add_option("--threads", f.threads, "worker threads (0 = all cores)")->capture_default_str();
}

hf::FitConfig make_config(const FitFlags& f, hf::ModelKind kind) {
  hf::FitConfig cfg;
  cfg.kind = kind;
  cfg.sampler.num_hypotheses = f.hypotheses;
  cfg.sampler.strategy = f.sampler == "uniform" ? hf::SamplerStrategy::Uniform : hf::SamplerStrategy::Proximity;
  cfg.sampler.proximity_sigma = f.sigma_prox;
  cfg.sampler.rng_seed = f.seed;
  cfg.k_order = f.k_order;
  cfg.max_structures = f.max_structures;
  cfg.theta = f.theta;
  cfg.dedup_overlap = f.dedup_overlap;
  cfg.refit = f.refit;
  cfg.forced_k = f.forced_k;
  cfg.threads = f.threads;
  return cfg;
}

struct SceneFlags {
  std::string preset;
  std::string spec_path;
  std::optional<std::uint64_t> data_seed;
};

void add_scene_flags(CLI::App* app, SceneFlags& s, const std::string& seed_flag) {
  auto* p = app->add_option("--preset", s.preset, "lines3..lines6, planes2, planes3");
  auto* f = app->add_option("--spec", s.spec_path, "scene spec JSON file");
  p->excludes(f);
  app->add_option(seed_flag, s.data_seed, "data seed (overrides the spec's)");
}

std::optional<hf::bench::SyntheticSpec> scene(const SceneFlags& s) {
  std::optional<hf::bench::SyntheticSpec> spec;
  if (!s.preset.empty()) spec = hf::bench::preset(s.preset, s.data_seed.value_or(0));
  if (!s.spec_path.empty()) spec = hf::bench::load_spec(s.spec_path);
  if (spec && s.data_seed) spec->rng_seed = *s.data_seed;
  return spec;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    hf::bench::detail::write_file(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypergraph multi-structure model fitting"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with ground truth");
  SceneFlags gen_scene;
  std::string gen_out, gen_labels, gen_params, gen_spec_out;
  add_scene_flags(gen, gen_scene, "--seed");
  gen->add_option("-o,--output", gen_out, "dataset CSV")->required();
  gen->add_option("--labels", gen_labels, "ground-truth label sidecar");
  gen->add_option("--params", gen_params, "ground-truth parameters as JSON");
  gen->add_option("--write-spec", gen_spec_out, "write the resolved scene spec as JSON");

  // fit
  auto* fitc = app.add_subcommand("fit", "fit structures to a dataset");
  FitFlags fit_flags;
  std::string fit_in, fit_out, fit_plot;
  bool fit_timings = false;
  fitc->add_option("input", fit_in, "dataset CSV")->required();
  add_fit_flags(fitc, fit_flags, true);
  fitc->add_option("-o,--output", fit_out, "result JSON (default: stdout)");
  fitc->add_option("--plot", fit_plot, "write an SVG plot");
  fitc->add_flag("--timings", fit_timings, "include stage timings in the result");

  // eval
  auto* evalc = app.add_subcommand("eval", "score a result against ground truth");
  std::string eval_result, eval_labels, eval_frame = "unit";
  SceneFlags eval_scene;
  evalc->add_option("result", eval_result, "result JSON")->required();
  evalc->add_option("--labels", eval_labels, "ground-truth label sidecar");
  add_scene_flags(evalc, eval_scene, "--data-seed");
  evalc->add_option("--error-frame", eval_frame, "unit | data")->capture_default_str();

  // bench
  auto* benchc = app.add_subcommand("bench", "repeated generate + fit + score");
  SceneFlags bench_scene;
  FitFlags bench_flags;
  std::size_t repeats = 10;
  std::string bench_json, bench_frame = "unit";
  add_scene_flags(benchc, bench_scene, "--data-seed");
  add_fit_flags(benchc, bench_flags, false);
  benchc->add_option("--repeats", repeats, "number of runs")->capture_default_str();
  benchc->add_option("--error-frame", bench_frame, "unit | data")->capture_default_str();
  benchc->add_option("--json", bench_json, "also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen) {
      const auto spec = scene(gen_scene);
      if (!spec) throw hf::Error(hf::ErrorCode::InvalidArgument, "gen needs --preset or --spec");
      const auto truth = hf::bench::generate(*spec);
      hf::bench::save_dataset(truth.data, gen_out);
      if (!gen_labels.empty()) hf::bench::save_labels(truth.gt_labels, gen_labels);
      if (!gen_params.empty()) {
        hf::bench::detail::write_file(
            gen_params, nlohmann::json{{"kind", std::string(hf::to_string(spec->kind))}, {"params", truth.gt_params}}
                                .dump(2) + '\n');
      }
      if (!gen_spec_out.empty()) hf::bench::detail::write_file(gen_spec_out, hf::bench::spec_to_json(*spec).dump(2) + '\n');
      std::fprintf(stderr, "%zu points, %zu structures\n", truth.data.size(), truth.gt_params.size());
      return kExitOk;
    }

    if (*fitc) {
      const hf::ModelKind kind = hf::parse_model_kind(fit_flags.model);
      const hf::DataSet data = hf::bench::load_dataset(fit_in, hf::point_dimension(kind));
      const hf::FitResult result = hf::fit(data, make_config(fit_flags, kind));
      write_or_print(fit_out, hf::bench::format_result(result, fit_timings));
      if (!fit_plot.empty()) hf::bench::detail::write_file(fit_plot, hf::bench::render_svg(data, result));
      std::fprintf(stderr, "%zu structures (k0 = %zu)\n", result.structures.size(), result.diagnostics.k0);
      return kExitOk;
    }

    if (*evalc) {
      const hf::FitResult result = hf::bench::load_result(eval_result);
      const auto spec = scene(eval_scene);
      nlohmann::json out;
      out["structures"] = result.structures.size();
      std::vector<int> gt_labels;
      if (!eval_labels.empty()) gt_labels = hf::bench::load_labels(eval_labels);
      if (spec) {
        const auto truth = hf::bench::generate(*spec);
        if (gt_labels.empty()) gt_labels = truth.gt_labels;
        hf::bench::ParamList est;
        for (const auto& s : result.structures) est.push_back(s.hypothesis.param_vector());
        const auto frame = hf::bench::parse_error_frame(eval_frame);
        out["fitting_error"] =
            hf::bench::fitting_error(hf::bench::comparable_params(truth.gt_params, spec->kind, spec->domain, frame),
                                     hf::bench::comparable_params(est, spec->kind, spec->domain, frame));
        out["true_structures"] = truth.gt_params.size();
      }
      if (gt_labels.empty()) throw hf::Error(hf::ErrorCode::InvalidArgument, "eval needs --labels, --preset or --spec");
      out["segmentation_error"] = hf::bench::segmentation_error(gt_labels, result.labels);
      std::cout << out.dump(2) << '\n';
      return kExitOk;
    }

    if (*benchc) {
      const auto spec = scene(bench_scene);
      if (!spec) throw hf::Error(hf::ErrorCode::InvalidArgument, "bench needs --preset or --spec");
      if (!bench_flags.model.empty() && hf::parse_model_kind(bench_flags.model) != spec->kind) {
        throw hf::Error(hf::ErrorCode::InvalidArgument, "--model does not match the scene");
      }
      const auto frame = hf::bench::parse_error_frame(bench_frame);
      const std::string name = !bench_scene.preset.empty() ? bench_scene.preset : bench_scene.spec_path;
      const auto rep =
          hf::bench::run_experiment(*spec, make_config(bench_flags, spec->kind), repeats, frame, name);
      std::cout << hf::bench::format_report_table(rep);
      if (!bench_json.empty()) hf::bench::detail::write_file(bench_json, hf::bench::report_to_json(rep).dump(2) + '\n');
      return kExitOk;
    }
  } catch (const hf::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", hf::to_string(e.code()), e.what());
    return e.code() == hf::ErrorCode::NoStructuresFound ? kExitNoStructures : kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
