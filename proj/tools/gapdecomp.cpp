// Command-line front end: decompose, simulate, report.
//
// Level columns are given finest first (--level-cols school,district), so
// level 1 is the school and the last column is the coarsest cluster.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gapdecomp/cli.hpp"
#include "gapdecomp/error.hpp"

namespace {

using gapdecomp::cli::write_error;

// A single value is repeated to fill `count` entries.
bool broadcast(std::vector<double>& values, std::size_t count) {
  if (values.size() == 1 && count > 1) values.assign(count, values.front());
  return values.size() == count;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decompose mean outcome gaps between groups across nested clusters"};
  app.require_subcommand(1);

  gapdecomp::cli::RunConfig run;
  auto* dec = app.add_subcommand("decompose", "Decompose the gaps in a CSV dataset");
  dec->add_option("--input", run.input, "CSV file, or - for stdin")->required();
  dec->add_option("--outcome-col", run.outcome_col)->required();
  dec->add_option("--group-col", run.group_col)->required();
  dec->add_option("--level-cols", run.level_cols, "Cluster columns, finest first")
      ->required()
      ->delimiter(',');
  dec->add_option("--unit-col", run.unit_col, "Optional unit id column");
  dec->add_option("--reference", run.reference, "Reference group label")->required();
  dec->add_option("--approach", run.approaches, "Subset of 1,2,3")->delimiter(',');
  dec->add_option("--target", run.targets, "Comparison groups to report (default all)")
      ->delimiter(',');
  dec->add_flag("--serial", run.serial, "Serial mediation check (2 groups, 2 levels)");
  dec->add_flag("--standardize", run.standardize, "Rescale the outcome to mean 0, sd 1");
  dec->add_flag("--exclude-homogeneous", run.exclude_homogeneous,
                "Drop finest clusters made up of a single group");
  dec->add_option("--cluster-level", run.cluster_level,
                  "Clustering for standard errors: unit, a level column or its number "
                  "(default coarsest)");
  dec->add_option("--cr", run.cr, "Small-sample correction, 0 or 1");
  dec->add_option("--mc-draws", run.mc_draws, "Monte Carlo draws; 0 disables intervals");
  dec->add_option("--seed", run.seed);
  dec->add_option("--ci-levels", run.ci_levels)->delimiter(',');
  dec->add_option("--format", run.format, "json or csv");
  dec->add_option("--out", run.out, "Output path (default stdout)");
  dec->add_option("--threads", run.threads, "Worker threads for Monte Carlo draws");

  gapdecomp::cli::SimulateConfig sim;
  auto& s = sim.synth;
  std::vector<double> within{-0.1};
  std::vector<double> contextual{-0.5};
  auto* simc = app.add_subcommand("simulate", "Generate a synthetic hierarchical dataset");
  simc->add_option("--groups", s.groups);
  simc->add_option("--levels", s.levels);
  simc->add_option("--top-clusters", s.top_clusters);
  simc->add_option("--children-min", s.children_min);
  simc->add_option("--children-max", s.children_max);
  simc->add_option("--units-min", s.units_min);
  simc->add_option("--units-max", s.units_max);
  simc->add_option("--group-weights", s.group_weights)->delimiter(',');
  simc->add_option("--concentration", s.concentration);
  simc->add_option("--jitter", s.jitter);
  simc->add_option("--alpha", s.alpha);
  simc->add_option("--within", within, "G-1 within-cluster gaps, or one value for all")
      ->delimiter(',');
  simc->add_option("--contextual", contextual,
                   "L*(G-1) contextual effects, level by level, or one value for all")
      ->delimiter(',');
  simc->add_option("--noise-sd", s.noise_sd);
  simc->add_option("--seed", s.seed);
  simc->add_flag("--strict", s.strict, "Fail instead of redrawing when a group is empty");
  simc->add_option("--group-labels", s.group_labels, "First label is the reference")
      ->delimiter(',');
  simc->add_option("--level-names", s.level_names, "Finest first")->delimiter(',');
  simc->add_option("--out", sim.out, "CSV path (default stdout)");
  simc->add_option("--truth-out", sim.truth_out, "Sidecar JSON (default <out>.truth.json)");

  std::string report_input, report_format = "md", report_out;
  auto* rep = app.add_subcommand("report", "Render a results document");
  rep->add_option("--input", report_input, "Results JSON, or - for stdin")->required();
  rep->add_option("--format", report_format, "md, stacked-csv or json");
  rep->add_option("--out", report_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    write_error(std::cerr, "INVALID_CONFIG", e.what());
    return 2;
  }

  if (dec->parsed()) return gapdecomp::cli::cmd_decompose(run, std::cout, std::cerr);
  if (rep->parsed()) {
    return gapdecomp::cli::cmd_report(report_input, report_format, report_out, std::cout,
                                      std::cerr);
  }

  if (s.groups < 2 || s.levels < 1) {
    write_error(std::cerr, "INVALID_CONFIG", "need at least 2 groups and 1 level");
    return 2;
  }
  if (!broadcast(within, s.groups - 1)) {
    write_error(std::cerr, "INVALID_CONFIG", "--within needs 1 or G-1 values");
    return 2;
  }
  const std::size_t cells = s.levels * (s.groups - 1);
  if (!broadcast(contextual, cells)) {
    write_error(std::cerr, "INVALID_CONFIG", "--contextual needs 1 or L*(G-1) values");
    return 2;
  }
  s.within_gaps = within;
  s.contextual.resize(static_cast<Eigen::Index>(s.levels), static_cast<Eigen::Index>(s.groups - 1));
  for (std::size_t l = 0; l < s.levels; ++l) {
    for (std::size_t g = 0; g + 1 < s.groups; ++g) {
      s.contextual(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(g)) =
          contextual[l * (s.groups - 1) + g];
    }
  }
  return gapdecomp::cli::cmd_simulate(sim, std::cout, std::cerr);
}
