#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gapdecomp/synth.hpp"

namespace gapdecomp::cli {

/// Level columns run finest first: {"school", "district"} makes school
/// level 1 and district level 2.
struct RunConfig {
  std::string input;  // path, or "-" for stdin
  std::string outcome_col;
  std::string group_col;
  std::vector<std::string> level_cols;
  std::string unit_col;
  std::string reference;
  std::vector<int> approaches{1, 2, 3};
  std::vector<std::string> targets;  // empty = every comparison group
  bool serial = false;
  bool standardize = false;
  bool exclude_homogeneous = false;
  std::string cluster_level;  // "" = coarsest, "unit", a level name or 1..L
  int cr = 1;
  std::size_t mc_draws = 20000;  // 0 disables intervals
  std::uint64_t seed = 0;
  std::vector<double> ci_levels{0.95, 0.99, 0.999};
  std::string format = "json";  // json | csv
  std::string out;              // empty = stdout
  unsigned threads = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Full results document for an already-loaded CSV text.
nlohmann::json run_decompose(const RunConfig& config, const std::string& csv_text);

/// Error codes become exit codes: 0 success, 2 input, 3 estimation.
/// Errors are written to `err` as {"error": {"code", "message"}}.
int cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err);

struct SimulateConfig {
  SynthConfig synth;
  std::string out;        // CSV path; empty = stdout
  std::string truth_out;  // default: <out>.truth.json
};

nlohmann::json truth_to_json(const TrueParams& truth, const SynthConfig& config);

int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err);

/// `format` is md, stacked-csv or json.
int cmd_report(const std::string& input, const std::string& format, const std::string& out_path,
               std::ostream& out, std::ostream& err);

void write_error(std::ostream& err, const std::string& code, const std::string& message);

}  // namespace gapdecomp::cli
