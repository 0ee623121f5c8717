#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "hf/bench/synthetic.hpp"
#include "hf/errors.hpp"
#include "hf/geometry.hpp"
#include "hf/pipeline.hpp"

namespace hf::bench {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

inline std::string parse_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace detail

/// Parses comma separated rows of 2 (x,y) or 4 (x1,y1,x2,y2) numbers.
/// dim = 0 infers the width from the first data row. A first row that does
/// not parse as numbers is taken as a header; blank lines and '#' comments
/// are skipped.
inline DataSet parse_dataset(std::string_view text, int dim = 0) {
  if (dim != 0 && dim != 2 && dim != 4) throw Error(ErrorCode::InvalidArgument, "dimension must be 2 or 4");
  std::vector<double> coords;
  std::size_t line_no = 0;
  bool seen_row = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split(line, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) numeric = detail::parse_double(fields[i], row[i]);
    if (!numeric) {
      if (!seen_row) {
        seen_row = true;  // header
        continue;
      }
      throw Error(ErrorCode::ParseError, detail::parse_error(line_no, "non-numeric field"));
    }
    seen_row = true;
    if (dim == 0) {
      if (row.size() != 2 && row.size() != 4) {
        throw Error(ErrorCode::ParseError, detail::parse_error(line_no, "expected 2 or 4 columns"));
      }
      dim = static_cast<int>(row.size());
    }
    if (static_cast<int>(row.size()) != dim) {
      throw Error(ErrorCode::ParseError,
                  detail::parse_error(line_no, "expected " + std::to_string(dim) + " columns, got " +
                                                   std::to_string(row.size())));
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, detail::parse_error(line_no, "non-finite value"));
    }
    coords.insert(coords.end(), row.begin(), row.end());
  }
  return DataSet(dim == 0 ? 2 : dim, std::move(coords));
}

inline DataSet load_dataset(const std::string& path, int dim = 0) {
  try {
    return parse_dataset(detail::read_file(path), dim);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::ParseError, path + ": " + e.what());
    throw;
  }
}

inline std::string format_dataset(const DataSet& data) {
  std::string out = data.dim() == 2 ? "x,y\n" : "x1,y1,x2,y2\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t d = 0; d < p.size(); ++d) {
      const auto res = std::to_chars(buf, buf + sizeof buf, p[d]);
      if (d > 0) out += ',';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

inline void save_dataset(const DataSet& data, const std::string& path) {
  detail::write_file(path, format_dataset(data));
}

/// Ground-truth sidecar: one integer label per line.
inline std::vector<int> parse_labels(std::string_view text) {
  std::vector<int> labels;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string_view line =
        detail::trim(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    int v = 0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size() || v < 0) {
      throw Error(ErrorCode::ParseError, detail::parse_error(line_no, "expected a nonnegative integer label"));
    }
    labels.push_back(v);
  }
  return labels;
}

inline std::vector<int> load_labels(const std::string& path) { return parse_labels(detail::read_file(path)); }

inline void save_labels(const std::vector<int>& labels, const std::string& path) {
  std::string out;
  for (int l : labels) out += std::to_string(l) + '\n';
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

/// Timings are wall-clock dependent, so they are left out unless asked for;
/// without them the file is a pure function of data and configuration.
inline nlohmann::json result_to_json(const FitResult& r, bool include_timings = false) {
  using nlohmann::json;
  json j;
  j["kind"] = std::string(to_string(r.kind));
  json structures = json::array();
  for (const auto& s : r.structures) {
    structures.push_back({{"params", s.hypothesis.param_vector()},
                          {"weight", s.weight},
                          {"sigma", s.sigma},
                          {"inliers", s.inliers}});
  }
  j["structures"] = std::move(structures);
  j["labels"] = r.labels;
  const FitDiagnostics& d = r.diagnostics;
  json diag = {{"n_points", d.n_points},
               {"subsets_sampled", d.subsets_sampled},
               {"degenerate_subsets", d.degenerate_subsets},
               {"hypotheses", d.hypotheses},
               {"discarded_not_enough_inliers", d.discarded_not_enough_inliers},
               {"discarded_too_small", d.discarded_too_small},
               {"hyperedges", d.hyperedges},
               {"hyperedges_after_prune", d.hyperedges_after_prune},
               {"vertices_after_prune", d.vertices_after_prune},
               {"k0", d.k0},
               {"k_selected", d.k_selected},
               {"single_structure", d.single_structure},
               {"alignment_costs", d.alignment_costs},
               {"eigenvalues", d.eigenvalues},
               {"empty_subhypergraphs", d.empty_subhypergraphs},
               {"duplicates_removed", d.duplicates_removed},
               {"undersized_structures_removed", d.undersized_structures_removed}};
  if (include_timings) {
    diag["timings"] = {{"sampling_s", d.timings.sampling_s},   {"expansion_s", d.timings.expansion_s},
                       {"pruning_s", d.timings.pruning_s},     {"partition_s", d.timings.partition_s},
                       {"selection_s", d.timings.selection_s}, {"total_s", d.timings.total_s}};
  }
  j["diagnostics"] = std::move(diag);
  return j;
}

inline FitResult result_from_json(const nlohmann::json& j) {
  try {
    FitResult r;
    r.kind = parse_model_kind(j.at("kind").get<std::string>());
    for (const auto& s : j.at("structures")) {
      FittedStructure fs;
      const auto params = s.at("params").get<std::vector<double>>();
      if (params.size() != parameter_dimension(r.kind)) {
        throw Error(ErrorCode::ParseError, "parameter vector has the wrong length");
      }
      fs.hypothesis = ModelHypothesis(r.kind, params);
      fs.weight = s.at("weight").get<double>();
      fs.sigma = s.value("sigma", 0.0);
      fs.inliers = s.at("inliers").get<std::vector<std::size_t>>();
      r.structures.push_back(std::move(fs));
    }
    r.labels = j.at("labels").get<std::vector<int>>();
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      FitDiagnostics& out = r.diagnostics;
      out.n_points = d.value("n_points", std::size_t{0});
      out.subsets_sampled = d.value("subsets_sampled", std::size_t{0});
      out.degenerate_subsets = d.value("degenerate_subsets", std::size_t{0});
      out.hypotheses = d.value("hypotheses", std::size_t{0});
      out.discarded_not_enough_inliers = d.value("discarded_not_enough_inliers", std::size_t{0});
      out.discarded_too_small = d.value("discarded_too_small", std::size_t{0});
      out.hyperedges = d.value("hyperedges", std::size_t{0});
      out.hyperedges_after_prune = d.value("hyperedges_after_prune", std::size_t{0});
      out.vertices_after_prune = d.value("vertices_after_prune", std::size_t{0});
      out.k0 = d.value("k0", std::size_t{0});
      out.k_selected = d.value("k_selected", std::size_t{0});
      out.single_structure = d.value("single_structure", false);
      out.alignment_costs = d.value("alignment_costs", std::vector<double>{});
      out.eigenvalues = d.value("eigenvalues", std::vector<double>{});
      out.empty_subhypergraphs = d.value("empty_subhypergraphs", std::size_t{0});
      out.duplicates_removed = d.value("duplicates_removed", std::size_t{0});
      out.undersized_structures_removed = d.value("undersized_structures_removed", std::size_t{0});
      if (d.contains("timings")) {
        const auto& t = d["timings"];
        out.timings.sampling_s = t.value("sampling_s", 0.0);
        out.timings.expansion_s = t.value("expansion_s", 0.0);
        out.timings.pruning_s = t.value("pruning_s", 0.0);
        out.timings.partition_s = t.value("partition_s", 0.0);
        out.timings.selection_s = t.value("selection_s", 0.0);
        out.timings.total_s = t.value("total_s", 0.0);
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed result: ") + e.what());
  }
}

inline std::string format_result(const FitResult& r, bool include_timings = false) {
  return result_to_json(r, include_timings).dump(2) + '\n';
}

inline void save_result(const FitResult& r, const std::string& path, bool include_timings = false) {
  detail::write_file(path, format_result(r, include_timings));
}

inline FitResult parse_result(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("result is not valid JSON: ") + e.what());
  }
  return result_from_json(j);
}

inline FitResult load_result(const std::string& path) { return parse_result(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Synthetic specs
// ---------------------------------------------------------------------------

inline nlohmann::json box_to_json(const Box& b) { return nlohmann::json::array({b.x_min, b.x_max, b.y_min, b.y_max}); }

inline Box box_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw Error(ErrorCode::ParseError, "a box is [x_min, x_max, y_min, y_max]");
  return Box{v[0], v[1], v[2], v[3]};
}

inline nlohmann::json spec_to_json(const SyntheticSpec& s) {
  using nlohmann::json;
  json regions = json::array();
  for (const auto& r : s.regions) regions.push_back(box_to_json(r));
  json j = {{"kind", std::string(to_string(s.kind))},
            {"structures", s.structures},
            {"regions", std::move(regions)},
            {"inliers_per_structure", s.inliers_per_structure},
            {"inlier_sigma", s.inlier_sigma},
            {"outlier_fraction", s.outlier_fraction},
            {"domain", box_to_json(s.domain)},
            {"seed", s.rng_seed}};
  if (s.second_domain) j["second_domain"] = box_to_json(*s.second_domain);
  return j;
}

inline SyntheticSpec spec_from_json(const nlohmann::json& j) {
  try {
    SyntheticSpec s;
    s.kind = parse_model_kind(j.at("kind").get<std::string>());
    s.structures = j.at("structures").get<std::vector<std::vector<double>>>();
    if (j.contains("regions"))
      for (const auto& r : j["regions"]) s.regions.push_back(box_from_json(r));
    s.inliers_per_structure = j.value("inliers_per_structure", s.inliers_per_structure);
    s.inlier_sigma = j.value("inlier_sigma", s.inlier_sigma);
    s.outlier_fraction = j.value("outlier_fraction", s.outlier_fraction);
    s.domain = box_from_json(j.at("domain"));
    if (j.contains("second_domain")) s.second_domain = box_from_json(j["second_domain"]);
    s.rng_seed = j.value("seed", std::uint64_t{0});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed spec: ") + e.what());
  }
}

inline SyntheticSpec load_spec(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace hf::bench
