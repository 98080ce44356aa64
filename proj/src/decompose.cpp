#include <cmath>
#include <limits>
#include <string>

#include "gapdecomp/engine.hpp"
#include "gapdecomp/error.hpp"

namespace gapdecomp {

namespace {

std::string lvl(std::size_t l) { return "l" + std::to_string(l); }

}  // namespace

const Component* DecompositionResult::find(std::string_view label) const {
  for (const auto& c : components) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

DecompositionResult decompose(const ParameterSet& params, int approach, std::size_t target) {
  params.validate();
  if (approach < 1 || approach > 3) {
    throw Error(ErrorCode::InvalidConfig, "approach must be 1, 2 or 3");
  }
  if (target >= params.comparison_groups()) {
    throw Error(ErrorCode::InvalidConfig, "target group index out of range");
  }

  const std::size_t L = params.levels();
  const std::size_t gm1 = params.comparison_groups();
  const auto t = static_cast<Eigen::Index>(target);
  const double within = params.within_gaps(t);
  auto own_omega = [&](std::size_t l) { return params.omega(l - 1, target, target); };
  auto context = [&](std::size_t l, std::size_t g) {
    return params.contextual(static_cast<Eigen::Index>(l - 1), static_cast<Eigen::Index>(g));
  };
  // weight of the level-l between component: omega_l - omega_{l+1}, or omega_L at the top
  auto between_weight = [&](std::size_t l) {
    return l < L ? own_omega(l) - own_omega(l + 1) : own_omega(L);
  };

  DecompositionResult r;
  r.target = params.groups[target];
  r.target_index = target;
  r.approach = approach;
  r.fitted_total = params.total_gaps.size() == static_cast<Eigen::Index>(gm1)
                       ? params.total_gaps(t)
                       : std::numeric_limits<double>::quiet_NaN();
  auto add = [&r](std::string label, double value) {
    r.components.push_back(Component{std::move(label), value, 0.0, {}, {}});
  };
  auto add_cross = [&] {
    for (std::size_t l = 1; l <= L; ++l) {
      for (std::size_t g = 0; g < gm1; ++g) {
        if (g == target) continue;
        add("cross." + lvl(l) + ".g" + params.groups[g],
            params.omega(l - 1, target, g) * context(l, g));
      }
    }
  };

  switch (approach) {
    case 1:
      add("within", within);
      for (std::size_t l = 1; l <= L; ++l) {
        for (std::size_t g = 0; g < gm1; ++g) {
          add("seg." + lvl(l) + ".g" + params.groups[g],
              params.omega(l - 1, target, g) * context(l, g));
        }
      }
      break;
    case 2:
      add("within", (1.0 - own_omega(1)) * within);
      for (std::size_t l = 1; l <= L; ++l) {
        add("between." + lvl(l), between_weight(l) * between_gap(params, l, target));
      }
      add_cross();
      break;
    case 3:
      add("within", (1.0 - own_omega(1)) * within);
      for (std::size_t l = 1; l <= L; ++l) {
        const double w = between_weight(l);
        add("intake." + lvl(l), w * within);
        for (std::size_t from = 1; from <= l; ++from) {
          add("context." + lvl(l) + ".c" + std::to_string(from), w * context(from, target));
        }
      }
      add_cross();
      break;
  }

  double total = 0.0;
  for (const auto& c : r.components) total += c.value;
  r.total_gap = total;
  for (auto& c : r.components) {
    c.share = total != 0.0 ? c.value / total : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

DecompositionResult decompose(const ParameterSet& params, int approach, std::string_view target) {
  const int t = params.group_index(target);
  if (t < 0) {
    throw Error(ErrorCode::UnknownReference,
                "'" + std::string(target) + "' is not a comparison group");
  }
  return decompose(params, approach, static_cast<std::size_t>(t));
}

}  // namespace gapdecomp
