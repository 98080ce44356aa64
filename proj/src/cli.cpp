#include "gapdecomp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "gapdecomp/engine.hpp"
#include "gapdecomp/error.hpp"
#include "gapdecomp/inference.hpp"
#include "gapdecomp/report.hpp"

namespace gapdecomp::cli {

using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read input file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::InvalidConfig, "cannot write output file '" + path + "'");
  file << text;
  if (!file) throw Error(ErrorCode::InvalidConfig, "failed writing '" + path + "'");
}

std::optional<std::size_t> resolve_cluster_level(const RunConfig& config) {
  const auto& s = config.cluster_level;
  if (s.empty()) return std::nullopt;
  if (s == "unit") return 0;
  for (std::size_t l = 0; l < config.level_cols.size(); ++l) {
    if (config.level_cols[l] == s) return l + 1;
  }
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec == std::errc{} && ptr == s.data() + s.size() && value <= config.level_cols.size()) {
    return value;
  }
  throw Error(ErrorCode::InvalidConfig,
              "--cluster-level must be 'unit', a level column or a number 0.." +
                  std::to_string(config.level_cols.size()) + ", got '" + s + "'");
}

int exit_code_for(ErrorCode code) {
  return is_estimation_error(code) ? kExitEstimation : kExitInput;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    write_error(err, std::string(code_name(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    write_error(err, std::string(code_name(ErrorCode::MalformedInput)), e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    write_error(err, "INTERNAL", e.what());
    return kExitEstimation;
  }
}

}  // namespace

void write_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

void RunConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (outcome_col.empty()) bad("--outcome-col is required");
  if (group_col.empty()) bad("--group-col is required");
  if (level_cols.empty()) bad("--level-cols needs at least one column");
  if (reference.empty()) bad("--reference is required");
  if (approaches.empty()) bad("--approach needs at least one of 1, 2, 3");
  for (int a : approaches) {
    if (a < 1 || a > 3) bad("approaches must be 1, 2 or 3, got " + std::to_string(a));
  }
  if (cr != 0 && cr != 1) bad("--cr must be 0 or 1");
  if (mc_draws != 0 && mc_draws < kMinDraws) {
    bad("--mc-draws must be 0 (no intervals) or at least " + std::to_string(kMinDraws));
  }
  if (ci_levels.empty() && mc_draws > 0) bad("--ci-levels needs at least one level");
  for (double level : ci_levels) {
    if (!(level > 0.0 && level < 1.0)) bad("confidence levels must lie in (0, 1)");
  }
  if (format != "json" && format != "csv") bad("--format must be json or csv");
}

json run_decompose(const RunConfig& config, const std::string& csv_text) {
  config.validate();
  Hierarchy hierarchy{config.level_cols};
  hierarchy.validate();
  ColumnSchema schema{config.outcome_col, config.group_col, config.level_cols, config.unit_col};
  Dataset data = parse_dataset(csv_text, schema, hierarchy);
  check_nesting(data, true);

  json warnings = json::array();
  if (data.dropped_rows() > 0) {
    warnings.push_back(std::to_string(data.dropped_rows()) +
                       " rows dropped for missing outcome, group or cluster values");
  }
  if (config.exclude_homogeneous) {
    const auto before = data.size();
    data = exclude_homogeneous(data);
    warnings.push_back(std::to_string(before - data.size()) +
                       " rows in single-group " + config.level_cols.front() +
                       " clusters excluded");
  }
  if (config.standardize) data = standardize(data);

  const auto coded = encode_groups(data, config.reference);
  EstimationOptions options;
  options.cluster_level = resolve_cluster_level(config);
  options.correction = config.cr == 0 ? Correction::CR0 : Correction::CR1;
  const auto params = estimate(data, coded, options);

  std::vector<std::size_t> targets;
  if (config.targets.empty()) {
    for (std::size_t g = 0; g < params.comparison_groups(); ++g) targets.push_back(g);
  } else {
    for (const auto& t : config.targets) {
      const int g = params.group_index(t);
      if (g < 0) throw Error(ErrorCode::InvalidConfig, "'" + t + "' is not a comparison group");
      targets.push_back(static_cast<std::size_t>(g));
    }
  }
  std::vector<int> approaches = config.approaches;
  std::sort(approaches.begin(), approaches.end());
  approaches.erase(std::unique(approaches.begin(), approaches.end()), approaches.end());

  std::vector<CiRequest> requests;
  for (auto t : targets) {
    for (int a : approaches) requests.push_back({a, t});
  }

  std::vector<DecompositionResult> results;
  if (config.mc_draws > 0) {
    const auto draws = draw_parameters(params, config.mc_draws, config.seed, config.threads);
    for (const auto& w : draws.warnings) warnings.push_back(w);
    for (auto& c : component_cis(draws, params, requests, config.ci_levels, config.threads)) {
      if (c.point.dropped_draws > 0) {
        warnings.push_back(c.point.target + " approach " + std::to_string(c.point.approach) +
                           ": " + std::to_string(c.point.dropped_draws) +
                           " draws with a zero total dropped");
      }
      results.push_back(std::move(c.point));
    }
  } else {
    for (const auto& r : requests) results.push_back(decompose(params, r.approach, r.target));
  }

  json parameters = parameters_to_json(params);
  for (const auto& b : parameters["between_gaps"]) {
    if (b["extrapolated"] == true) {
      warnings.push_back("between gap of " + b["group"].get<std::string>() + " at level " +
                         b["level"].get<std::string>() +
                         " is extrapolated: no cluster is made up entirely of that group");
    }
  }

  if (config.serial) {
    const auto serial = serial_fit(data, coded, options);
    const double parallel_omega = params.omega(0, 0, 0);
    json s = {{"school_within", serial.school_within},
              {"school_district", serial.school_district},
              {"district", serial.district},
              {"school_total", serial.school_total()},
              {"school_parallel", parallel_omega},
              {"identity_error", std::abs(serial.school_total() - parallel_omega)}};
    json diffs = json::object();
    for (int a : approaches) {
      const auto lhs = serial_decompose(serial, params, a);
      const auto rhs = decompose(params, a, std::size_t{0});
      double worst = 0.0;
      for (std::size_t c = 0; c < lhs.components.size(); ++c) {
        worst = std::max(worst, std::abs(lhs.components[c].value - rhs.components[c].value));
      }
      diffs[std::to_string(a)] = worst;
    }
    s["max_component_difference"] = std::move(diffs);
    parameters["serial"] = std::move(s);
  }

  json decompositions = json::array();
  for (const auto& r : results) decompositions.push_back(decomposition_to_json(r));

  json levels = json::array();
  for (std::size_t l = 1; l <= data.levels(); ++l) {
    levels.push_back({{"index", l},
                      {"name", config.level_cols[l - 1]},
                      {"clusters", data.cluster_count(l)}});
  }
  const auto cluster_level = options.cluster_level.value_or(data.levels());
  json meta = {
      {"n", data.size()},
      {"dropped_rows", data.dropped_rows()},
      {"outcome", config.outcome_col},
      {"reference", params.reference},
      {"groups", params.groups},
      {"levels", std::move(levels)},
      {"approaches", approaches},
      {"standardized", config.standardize},
      {"exclude_homogeneous", config.exclude_homogeneous},
      {"cluster_level", cluster_level == 0 ? std::string("unit")
                                           : config.level_cols[cluster_level - 1]},
      {"correction", config.cr == 0 ? "CR0" : "CR1"},
      {"mc_draws", config.mc_draws},
      {"seed", config.seed},
  };
  if (config.mc_draws > 0) {
    std::vector<double> levels_sorted = config.ci_levels;
    std::sort(levels_sorted.begin(), levels_sorted.end());
    meta["ci_levels"] = levels_sorted;
  }

  json doc;
  doc["meta"] = std::move(meta);
  doc["parameters"] = std::move(parameters);
  doc["decompositions"] = std::move(decompositions);
  doc["warnings"] = std::move(warnings);
  return doc;
}

int cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const auto doc = run_decompose(config, read_input(config.input));
    std::string text;
    if (config.format == "csv") {
      text = render_stacked_csv(decompositions_from_json(doc));
    } else {
      text = doc.dump(2) + "\n";
    }
    write_output(config.out, text, out);
  });
}

json truth_to_json(const TrueParams& truth, const SynthConfig& config) {
  json within = json::array();
  for (std::size_t g = 0; g < truth.groups.size(); ++g) {
    within.push_back({{"group", truth.groups[g]}, {"value", truth.within_gaps[g]}});
  }
  json contextual = json::array();
  for (Eigen::Index l = 0; l < truth.contextual.rows(); ++l) {
    for (Eigen::Index g = 0; g < truth.contextual.cols(); ++g) {
      contextual.push_back({{"level", config.level_names[static_cast<std::size_t>(l)]},
                            {"group", truth.groups[static_cast<std::size_t>(g)]},
                            {"value", truth.contextual(l, g)}});
    }
  }
  return {
      {"alpha", truth.alpha},
      {"reference", truth.reference},
      {"groups", truth.groups},
      {"level_names", config.level_names},
      {"within_gaps", std::move(within)},
      {"contextual", std::move(contextual)},
      {"noise_sd", truth.noise_sd},
      {"seed", truth.seed},
      {"attempts", truth.attempts},
      {"config",
       {{"groups", config.groups},
        {"levels", config.levels},
        {"top_clusters", config.top_clusters},
        {"children", {config.children_min, config.children_max}},
        {"units", {config.units_min, config.units_max}},
        {"group_weights", config.group_weights},
        {"concentration", config.concentration},
        {"jitter", config.jitter}}},
  };
}

int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SynthConfig synth = config.synth;
    synth.normalize();
    const auto result = generate(synth);
    std::string truth_path = config.truth_out;
    if (truth_path.empty() && !config.out.empty() && config.out != "-") {
      truth_path = config.out + ".truth.json";
    }
    write_output(config.out, to_csv(result.dataset), out);
    if (!truth_path.empty()) {
      write_output(truth_path, truth_to_json(result.truth, synth).dump(2) + "\n", out);
    }
  });
}

int cmd_report(const std::string& input, const std::string& format, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (format != "md" && format != "stacked-csv" && format != "json") {
      throw Error(ErrorCode::InvalidConfig, "report format must be md, stacked-csv or json");
    }
    const auto text = read_input(input);
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedInput, std::string("results document is not JSON: ") + e.what());
    }
    const auto results = decompositions_from_json(doc);
    std::string rendered;
    if (format == "md") {
      rendered = render_markdown(results);
    } else if (format == "stacked-csv") {
      rendered = render_stacked_csv(results);
    } else {
      json arr = json::array();
      for (const auto& r : results) arr.push_back(decomposition_to_json(r));
      rendered = json{{"decompositions", std::move(arr)}}.dump(2) + "\n";
    }
    write_output(out_path, rendered, out);
  });
}

}  // namespace gapdecomp::cli
