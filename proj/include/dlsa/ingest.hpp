#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace dlsa::io {

enum class ColumnRole { response, numeric, categorical, survival_time, event, ordinal, ignore };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::ignore;
  /// Declared categorical levels; inferred from the data when empty.
  std::vector<std::string> levels;
  /// L for an ordinal response.
  int ordinal_levels = 0;
  /// Per-column override of Schema::standardize for numeric columns.
  std::optional<bool> standardize;
};

/// Column roles for a CSV file, read from JSON of the form
///
///   {"standardize": true, "strict": true,
///    "columns": [{"name": "y", "role": "response"},
///                {"name": "carrier", "role": "categorical", "levels": ["AA", "UA"]},
///                {"name": "grade", "role": "ordinal", "levels": 4}, ...]}
///
/// Roles: response, numeric, categorical, survival-time, event, ordinal,
/// ignore. CSV columns the schema does not mention are ignored.
struct Schema {
  std::vector<ColumnSpec> columns;
  bool standardize = false;
  /// Strict: an undeclared categorical level is an input error. Lenient: it
  /// goes to an extra "<col>=other" dummy and is reported in Dataset::notes.
  bool strict = true;

  static Schema from_json(const nlohmann::json& j);
  static Schema load(const std::filesystem::path& path);
};

/// Parsed, encoded rows ready for partitioning.
struct Dataset {
  Eigen::MatrixXd covariates;
  /// Response, survival time or ordinal level (1..L).
  Eigen::VectorXd response;
  Eigen::VectorXd event;  // survival data only
  std::vector<std::string> covariate_names;
  int ordinal_levels = 0;
  /// Raw text of the key column when one was requested for partitioning.
  std::vector<std::string> key;
  std::vector<std::string> notes;

  Eigen::Index rows() const { return covariates.rows(); }
  bool survival() const { return event.size() > 0; }
};

/// Reads a headered CSV under `schema`. Numeric columns are z-scored with
/// the population variance when standardization is on; categorical columns
/// become (levels - 1) dummies with the most frequent level as baseline.
/// Throws CsvError (with the line number) on malformed rows and InputError
/// on schema/header mismatches.
Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema,
                   const std::optional<std::string>& key_column = std::nullopt);

/// Same, from an in-memory CSV text.
Dataset ingest_csv_text(const std::string& text, const Schema& schema,
                        const std::optional<std::string>& key_column = std::nullopt);

/// Splits one CSV record; double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dlsa::io
