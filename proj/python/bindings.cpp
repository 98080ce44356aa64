// Python bindings. Documents cross the boundary as JSON text; the package
// __init__ turns them into dicts.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "gapdecomp/cli.hpp"
#include "gapdecomp/engine.hpp"
#include "gapdecomp/error.hpp"
#include "gapdecomp/report.hpp"
#include "gapdecomp/synth.hpp"

namespace py = pybind11;
using namespace gapdecomp;

namespace {

std::string decompose_csv(const std::string& csv_text, const std::string& outcome_col,
                          const std::string& group_col, const std::vector<std::string>& level_cols,
                          const std::string& reference, const std::vector<int>& approaches,
                          const std::vector<std::string>& targets, bool serial, bool standardize,
                          bool exclude_homogeneous, const std::string& cluster_level, int cr,
                          std::size_t mc_draws, std::uint64_t seed,
                          const std::vector<double>& ci_levels, const std::string& unit_col,
                          unsigned threads) {
  cli::RunConfig c;
  c.input = "-";
  c.outcome_col = outcome_col;
  c.group_col = group_col;
  c.level_cols = level_cols;
  c.reference = reference;
  c.approaches = approaches;
  c.targets = targets;
  c.serial = serial;
  c.standardize = standardize;
  c.exclude_homogeneous = exclude_homogeneous;
  c.cluster_level = cluster_level;
  c.cr = cr;
  c.mc_draws = mc_draws;
  c.seed = seed;
  c.ci_levels = ci_levels;
  c.unit_col = unit_col;
  c.threads = threads;
  c.validate();
  py::gil_scoped_release release;
  return cli::run_decompose(c, csv_text).dump();
}

// Arithmetic decomposition from coefficient values alone.
std::string decompose_values(const std::string& reference, const std::vector<std::string>& groups,
                             const std::vector<std::string>& level_names,
                             const Eigen::VectorXd& within, const Eigen::MatrixXd& contextual,
                             const std::vector<Eigen::MatrixXd>& segregation, int approach,
                             const std::string& target) {
  ParameterSet p;
  p.reference = reference;
  p.groups = groups;
  p.level_names = level_names;
  p.within_gaps = within;
  p.contextual = contextual;
  p.segregation = segregation;
  p.validate();
  return decomposition_to_json(decompose(p, approach, std::string_view(target))).dump();
}

py::tuple simulate(std::size_t groups, std::size_t levels, std::size_t top_clusters,
                   std::size_t children_min, std::size_t children_max, std::size_t units_min,
                   std::size_t units_max, std::vector<double> group_weights, double concentration,
                   double jitter, double alpha, std::vector<double> within_gaps,
                   Eigen::MatrixXd contextual, double noise_sd, std::uint64_t seed, bool strict,
                   std::vector<std::string> group_labels, std::vector<std::string> level_names) {
  SynthConfig c;
  c.groups = groups;
  c.levels = levels;
  c.top_clusters = top_clusters;
  c.children_min = children_min;
  c.children_max = children_max;
  c.units_min = units_min;
  c.units_max = units_max;
  c.group_weights = std::move(group_weights);
  c.concentration = concentration;
  c.jitter = jitter;
  c.alpha = alpha;
  c.within_gaps = std::move(within_gaps);
  c.contextual = std::move(contextual);
  c.noise_sd = noise_sd;
  c.seed = seed;
  c.strict = strict;
  c.group_labels = std::move(group_labels);
  c.level_names = std::move(level_names);
  const auto result = generate(c);
  c.normalize();
  return py::make_tuple(to_csv(result.dataset), cli::truth_to_json(result.truth, c).dump());
}

std::string render(const std::string& results_json, const std::string& format) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(results_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  }
  const auto results = decompositions_from_json(doc);
  if (format == "md") return render_markdown(results);
  if (format == "stacked-csv") return render_stacked_csv(results);
  throw Error(ErrorCode::InvalidConfig, "format must be md or stacked-csv");
}

}  // namespace

PYBIND11_MODULE(_gapdecomp, m) {
  m.doc() = "Gap decomposition across nested clusters";

  // Raised for every library error; `code` holds the stable name, e.g.
  // "NESTING_VIOLATION".
  static py::handle error_type =
      PyErr_NewException("gapdecomp._gapdecomp.GapDecompError", PyExc_ValueError, nullptr);
  m.add_object("GapDecompError", py::reinterpret_borrow<py::object>(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("decompose_csv", &decompose_csv, py::arg("csv_text"), py::arg("outcome_col"),
        py::arg("group_col"), py::arg("level_cols"), py::arg("reference"),
        py::arg("approaches") = std::vector<int>{1, 2, 3},
        py::arg("targets") = std::vector<std::string>{}, py::arg("serial") = false,
        py::arg("standardize") = false, py::arg("exclude_homogeneous") = false,
        py::arg("cluster_level") = "", py::arg("cr") = 1, py::arg("mc_draws") = 20000,
        py::arg("seed") = 0, py::arg("ci_levels") = std::vector<double>{0.95, 0.99, 0.999},
        py::arg("unit_col") = "", py::arg("threads") = 1);
  m.def("decompose_values", &decompose_values, py::arg("reference"), py::arg("groups"),
        py::arg("level_names"), py::arg("within"), py::arg("contextual"),
        py::arg("segregation"), py::arg("approach"), py::arg("target"));
  m.def("simulate", &simulate, py::arg("groups") = 2, py::arg("levels") = 1,
        py::arg("top_clusters") = 20, py::arg("children_min") = 2, py::arg("children_max") = 4,
        py::arg("units_min") = 20, py::arg("units_max") = 40,
        py::arg("group_weights") = std::vector<double>{}, py::arg("concentration") = 1.0,
        py::arg("jitter") = 10.0, py::arg("alpha") = 0.0,
        py::arg("within_gaps") = std::vector<double>{},
        py::arg("contextual") = Eigen::MatrixXd(), py::arg("noise_sd") = 1.0,
        py::arg("seed") = 0, py::arg("strict") = false,
        py::arg("group_labels") = std::vector<std::string>{},
        py::arg("level_names") = std::vector<std::string>{});
  m.def("render", &render, py::arg("results_json"), py::arg("format") = "md");
}
