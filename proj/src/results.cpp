#include "dlsa/results.hpp"

#include <cmath>
#include <fstream>

#include "dlsa/errors.hpp"

namespace dlsa::io {
namespace {

nlohmann::json one_based(const IndexSet& set) {
  auto out = nlohmann::json::array();
  for (auto j : set) out.push_back(j + 1);
  return out;
}

// NaN and infinities become null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json to_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> parameter_names(std::span<const std::string> covariates,
                                         int num_cutpoints) {
  std::vector<std::string> out(covariates.begin(), covariates.end());
  for (int c = 1; c <= num_cutpoints; ++c) out.push_back("cut" + std::to_string(c));
  return out;
}

nlohmann::json combined_json(const CombinedFit& fit, std::span<const std::string> names) {
  nlohmann::json doc;
  doc["family"] = std::string(fit.family.name());
  doc["num_cutpoints"] = fit.family.num_cutpoints();
  doc["N"] = fit.total_n;
  doc["K"] = fit.k;
  doc["q"] = fit.theta_tilde.size();
  doc["parameters"] = names;
  doc["theta_tilde"] = to_json(fit.theta_tilde.stacked());
  doc["precision"] = to_json(fit.precision);
  doc["covariance"] = to_json(fit.covariance);
  doc["pseudo_inverse_used"] = fit.pseudo_inverse_used;
  return doc;
}

nlohmann::json path_json(const LassoPath& path, const SelectionResult& selection) {
  nlohmann::json doc;
  doc["knots"] = path.knots;
  auto coefs = nlohmann::json::array();
  auto active = nlohmann::json::array();
  for (std::size_t i = 0; i < path.knots.size(); ++i) {
    coefs.push_back(to_json(path.coefficients[i]));
    active.push_back(one_based(path.active_sets[i]));
  }
  doc["coefficients"] = std::move(coefs);
  doc["active_sets"] = std::move(active);
  doc["df"] = path.df;
  doc["dbic"] = selection.dbic_values;
  doc["penalized"] = one_based(path.penalized);
  doc["weights"] = to_json(path.weights);
  return doc;
}

nlohmann::json selection_json(const SelectionResult& selection, std::span<const std::string> names) {
  nlohmann::json doc;
  doc["lambda0"] = selection.chosen_lambda0;
  doc["knot"] = selection.chosen_knot;
  doc["dbic"] = selection.dbic_min;
  doc["support"] = one_based(selection.support);
  auto support_names = nlohmann::json::array();
  for (auto j : selection.support) {
    if (static_cast<std::size_t>(j) < names.size()) support_names.push_back(names[j]);
  }
  doc["support_names"] = std::move(support_names);
  doc["theta_selected"] = to_json(selection.theta_selected);
  return doc;
}

nlohmann::json report_json(const sim::SimulationReport& report) {
  nlohmann::json doc;
  const auto& s = report.spec;
  doc["example"] = s.example;
  doc["setting"] = static_cast<int>(s.setting);
  doc["N"] = s.n_total;
  doc["K"] = s.workers;
  doc["R"] = s.replications;
  doc["seed"] = s.seed;
  doc["theta0"] = to_json(report.theta0);
  doc["rmse_global"] = to_json(report.rmse_global);
  auto rows = nlohmann::json::object();
  for (const auto& row : report.rows) {
    rows[row.name] = {{"rmse", to_json(row.rmse)}, {"ree", to_json(row.ree)}};
  }
  doc["estimators"] = std::move(rows);
  doc["ms"] = report.ms;
  doc["cm"] = report.cm;
  doc["successes"] = report.successes;
  doc["failures"] = report.failures;
  doc["failure_messages"] = report.failure_messages;
  return doc;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace dlsa::io
