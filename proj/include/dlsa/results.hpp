#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlsa/combiner.hpp"
#include "dlsa/shrinkage.hpp"
#include "dlsa/simulation.hpp"

namespace dlsa::io {

// Structured result documents. Support and active-set indices are 1-based in
// every document; vectors use the stacked layout (coefficients, cutpoints).

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);

nlohmann::json combined_json(const CombinedFit& fit, std::span<const std::string> names);
nlohmann::json path_json(const LassoPath& path, const SelectionResult& selection);
nlohmann::json selection_json(const SelectionResult& selection, std::span<const std::string> names);
nlohmann::json report_json(const sim::SimulationReport& report);

/// Parameter labels: covariate names followed by "cut1".."cut{L-1}".
std::vector<std::string> parameter_names(std::span<const std::string> covariates,
                                         int num_cutpoints);

/// Writes `doc` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dlsa::io
