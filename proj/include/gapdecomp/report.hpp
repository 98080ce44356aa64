#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gapdecomp/engine.hpp"

namespace gapdecomp {

/// Confidence levels are keyed by their shortest decimal form ("0.95").
std::string level_key(double level);

nlohmann::json component_to_json(const Component& c);
nlohmann::json decomposition_to_json(const DecompositionResult& r);
nlohmann::json parameters_to_json(const ParameterSet& params);

/// Inverse of decomposition_to_json for the "decompositions" array of a
/// results document. Throws MalformedInput on schema violations.
std::vector<DecompositionResult> decompositions_from_json(const nlohmann::json& doc);

/// Markdown tables, one per (target, approach).
std::string render_markdown(const std::vector<DecompositionResult>& results);

/// Tidy stacked-bar data: target,approach,component_label,value,share,star.
std::string render_stacked_csv(const std::vector<DecompositionResult>& results);

}  // namespace gapdecomp
