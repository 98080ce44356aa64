#include "gapdecomp/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "csv.hpp"
#include "gapdecomp/error.hpp"

namespace gapdecomp {

using nlohmann::json;

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw Error(ErrorCode::MalformedInput, "expected a number, got " + j.dump());
  return j.get<double>();
}

std::string fmt(double v, int precision) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string term_name(const ColumnTag& tag, const ParameterSet& p) {
  switch (tag.kind) {
    case ColumnKind::Intercept: return "intercept";
    case ColumnKind::Dummy: return "group:" + p.groups[static_cast<std::size_t>(tag.group - 2)];
    case ColumnKind::Mediator:
      return "share:" + p.level_names[static_cast<std::size_t>(tag.level - 1)] + ":" +
             p.groups[static_cast<std::size_t>(tag.group - 2)];
  }
  return "?";
}

// standard error of the coefficient with `tag` in `eq`, NaN when unavailable
double se_of(const EquationEstimate& eq, const ColumnTag& tag) {
  const int j = eq.find(tag);
  if (j < 0 || eq.covariance.rows() != eq.coefficients.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::sqrt(std::max(eq.covariance(j, j), 0.0));
}

const EquationEstimate* equation(const ParameterSet& p, EquationKind kind, int level = 0,
                                 int group = 0) {
  for (const auto& eq : p.equations) {
    if (eq.kind == kind && eq.level == level && eq.group == group) return &eq;
  }
  return nullptr;
}

double se_in(const ParameterSet& p, EquationKind kind, const ColumnTag& tag, int level = 0,
             int group = 0) {
  const auto* eq = equation(p, kind, level, group);
  return eq ? se_of(*eq, tag) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string level_key(double level) { return shortest(level); }

json component_to_json(const Component& c) {
  json j;
  j["label"] = c.label;
  j["value"] = number(c.value);
  j["share"] = number(c.share);
  if (!c.stars.empty()) j["stars"] = c.stars;
  if (!c.ci.empty()) {
    json ci = json::object();
    for (const auto& iv : c.ci) {
      ci[level_key(iv.level)] = {{"value", {number(iv.value_lo), number(iv.value_hi)}},
                                 {"share", {number(iv.share_lo), number(iv.share_hi)}}};
    }
    j["ci"] = std::move(ci);
  }
  return j;
}

json decomposition_to_json(const DecompositionResult& r) {
  json j;
  j["target"] = r.target;
  j["approach"] = r.approach;
  j["total_gap"] = number(r.total_gap);
  j["fitted_total"] = number(r.fitted_total);
  j["dropped_draws"] = r.dropped_draws;
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(component_to_json(c));
  j["components"] = std::move(comps);
  return j;
}

json parameters_to_json(const ParameterSet& p) {
  json out;
  const auto gm1 = p.comparison_groups();
  const auto L = p.levels();
  json total = json::array(), within = json::array(), contextual = json::array(),
       segregation = json::array(), between = json::array();
  for (std::size_t g = 0; g < gm1; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    const auto tag = ColumnTag::dummy(static_cast<int>(g) + 2);
    if (p.total_gaps.size() == static_cast<Eigen::Index>(gm1)) {
      total.push_back({{"group", p.groups[g]},
                       {"estimate", number(p.total_gaps(gi))},
                       {"se", number(se_in(p, EquationKind::Total, tag))}});
    }
    within.push_back({{"group", p.groups[g]},
                      {"estimate", number(p.within_gaps(gi))},
                      {"se", number(se_in(p, EquationKind::Outcome, tag))}});
  }
  for (std::size_t l = 1; l <= L; ++l) {
    const auto li = static_cast<Eigen::Index>(l - 1);
    for (std::size_t g = 0; g < gm1; ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      const int group = static_cast<int>(g) + 2;
      contextual.push_back(
          {{"level", p.level_names[l - 1]},
           {"group", p.groups[g]},
           {"estimate", number(p.contextual(li, gi))},
           {"se", number(se_in(p, EquationKind::Outcome,
                               ColumnTag::mediator(static_cast<int>(l), group)))}});
      const double max_share = p.max_proportion.size() ? p.max_proportion(li, gi)
                                                       : std::numeric_limits<double>::quiet_NaN();
      json b = {{"level", p.level_names[l - 1]},
                {"group", p.groups[g]},
                {"estimate", number(between_gap(p, l, g))}};
      // no cluster is made up entirely of the group: the gap is an extrapolation
      b["extrapolated"] = std::isfinite(max_share) ? json(max_share < 1.0) : json(nullptr);
      between.push_back(std::move(b));
      for (std::size_t r = 0; r < gm1; ++r) {
        segregation.push_back(
            {{"level", p.level_names[l - 1]},
             {"group", p.groups[r]},
             {"mediator", p.groups[g]},
             {"estimate", number(p.omega(l - 1, r, g))},
             {"se", number(se_in(p, EquationKind::Mediation,
                                 ColumnTag::dummy(static_cast<int>(r) + 2),
                                 static_cast<int>(l), group))}});
      }
    }
  }
  json equations = json::array();
  for (const auto& eq : p.equations) {
    json terms = json::array();
    for (std::size_t j = 0; j < eq.tags.size(); ++j) {
      terms.push_back({{"term", term_name(eq.tags[j], p)},
                       {"estimate", number(eq.coefficients(static_cast<Eigen::Index>(j)))},
                       {"se", number(se_of(eq, eq.tags[j]))}});
    }
    equations.push_back({{"name", eq.name()},
                         {"n", eq.n},
                         {"n_clusters", eq.n_clusters},
                         {"r_squared", number(eq.r_squared)},
                         {"terms", std::move(terms)}});
  }
  out["total_gaps"] = std::move(total);
  out["within_gaps"] = std::move(within);
  out["contextual"] = std::move(contextual);
  out["segregation"] = std::move(segregation);
  out["between_gaps"] = std::move(between);
  out["equations"] = std::move(equations);
  return out;
}

std::vector<DecompositionResult> decompositions_from_json(const json& doc) {
  auto fail = [](const std::string& what) -> void {
    throw Error(ErrorCode::MalformedInput, "results document: " + what);
  };
  if (!doc.is_object() || !doc.contains("decompositions") || !doc["decompositions"].is_array()) {
    fail("missing 'decompositions' array");
  }
  std::vector<DecompositionResult> out;
  try {
    for (const auto& d : doc["decompositions"]) {
      DecompositionResult r;
      r.target = d.at("target").get<std::string>();
      r.approach = d.at("approach").get<int>();
      r.total_gap = read_number(d.at("total_gap"));
      r.fitted_total = d.contains("fitted_total") ? read_number(d["fitted_total"])
                                                  : std::numeric_limits<double>::quiet_NaN();
      r.dropped_draws = d.value("dropped_draws", std::size_t{0});
      if (!d.at("components").is_array() || d["components"].empty()) {
        fail("decomposition for '" + r.target + "' has no components");
      }
      for (const auto& c : d["components"]) {
        Component comp;
        comp.label = c.at("label").get<std::string>();
        comp.value = read_number(c.at("value"));
        comp.share = read_number(c.at("share"));
        comp.stars = c.value("stars", std::string{});
        if (c.contains("ci")) {
          for (const auto& [key, iv] : c["ci"].items()) {
            Interval interval;
            interval.level = std::stod(key);
            interval.value_lo = read_number(iv.at("value").at(0));
            interval.value_hi = read_number(iv.at("value").at(1));
            interval.share_lo = read_number(iv.at("share").at(0));
            interval.share_hi = read_number(iv.at("share").at(1));
            comp.ci.push_back(interval);
          }
          std::sort(comp.ci.begin(), comp.ci.end(),
                    [](const Interval& a, const Interval& b) { return a.level < b.level; });
        }
        r.components.push_back(std::move(comp));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(e.what());
  } catch (const std::invalid_argument&) {
    fail("confidence level keys must be numbers");
  }
  if (out.empty()) fail("no decompositions");
  return out;
}

std::string render_markdown(const std::vector<DecompositionResult>& results) {
  std::ostringstream os;
  bool first = true;
  for (const auto& r : results) {
    if (!first) os << "\n";
    first = false;
    os << "## " << r.target << ", approach " << r.approach << "\n\n";
    os << "Total gap: " << fmt(r.total_gap, 3) << " SD\n\n";
    bool has_ci = false;
    for (const auto& c : r.components) has_ci = has_ci || !c.ci.empty();
    os << "| component | value | share |";
    if (has_ci) os << " 95% CI (share) |";
    os << " stars |\n|---|---:|---:|";
    if (has_ci) os << "---|";
    os << "---|\n";
    for (const auto& c : r.components) {
      os << "| " << c.label << " | " << fmt(c.value, 3) << " | " << fmt(100.0 * c.share, 1)
         << "% |";
      if (has_ci) {
        const Interval* iv95 = nullptr;
        for (const auto& iv : c.ci) {
          if (std::abs(iv.level - 0.95) < 1e-12) iv95 = &iv;
        }
        if (iv95) {
          os << " [" << fmt(100.0 * iv95->share_lo, 1) << "%, " << fmt(100.0 * iv95->share_hi, 1)
             << "%] |";
        } else {
          os << " |";
        }
      }
      os << " " << c.stars << " |\n";
    }
  }
  return os.str();
}

std::string render_stacked_csv(const std::vector<DecompositionResult>& results) {
  std::string out = "target,approach,component_label,value,share,star\n";
  for (const auto& r : results) {
    for (const auto& c : r.components) {
      out += csv::quote(r.target) + "," + std::to_string(r.approach) + "," + csv::quote(c.label) +
             "," + shortest(c.value) + "," + shortest(c.share) + "," + c.stars + "\n";
    }
  }
  return out;
}

}  // namespace gapdecomp
