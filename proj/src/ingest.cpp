#include "dlsa/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "dlsa/errors.hpp"

namespace dlsa::io {
namespace {

ColumnRole parse_role(const std::string& s) {
  if (s == "response") return ColumnRole::response;
  if (s == "numeric") return ColumnRole::numeric;
  if (s == "categorical") return ColumnRole::categorical;
  if (s == "survival-time") return ColumnRole::survival_time;
  if (s == "event") return ColumnRole::event;
  if (s == "ordinal") return ColumnRole::ordinal;
  if (s == "ignore") return ColumnRole::ignore;
  throw ConfigError("unknown column role '" + s + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Accumulated values of one used column.
struct ColumnData {
  const ColumnSpec* spec = nullptr;
  std::size_t field = 0;
  std::vector<double> numbers;
  // Categorical columns: codes into `level_names`, -1 for "other".
  std::vector<int> codes;
  std::vector<std::string> level_names;
  std::unordered_map<std::string, int> level_index;
  bool declared = false;
  std::size_t unknown_count = 0;
};

class CsvSource {
 public:
  explicit CsvSource(std::istream& in) : in_(in) {}
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!trim(line).empty()) return true;
    }
    return false;
  }
  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

Dataset ingest_stream(std::istream& in, const Schema& schema,
                      const std::optional<std::string>& key_column) {
  CsvSource src(in);
  std::string line;
  if (!src.next(line)) throw CsvError(1, "missing header row");
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position[std::string(trim(header[i]))] = i;

  std::vector<ColumnData> used;
  int responses = 0, times = 0, events = 0, ordinals = 0;
  for (const auto& col : schema.columns) {
    if (col.role == ColumnRole::ignore) continue;
    const auto it = position.find(col.name);
    if (it == position.end()) throw InputError("schema column '" + col.name + "' not in CSV header");
    ColumnData d;
    d.spec = &col;
    d.field = it->second;
    if (col.role == ColumnRole::categorical && !col.levels.empty()) {
      d.declared = true;
      for (const auto& lvl : col.levels) {
        d.level_index.emplace(lvl, static_cast<int>(d.level_names.size()));
        d.level_names.push_back(lvl);
      }
    }
    responses += col.role == ColumnRole::response;
    times += col.role == ColumnRole::survival_time;
    events += col.role == ColumnRole::event;
    ordinals += col.role == ColumnRole::ordinal;
    if (col.role == ColumnRole::ordinal && col.ordinal_levels < 2) {
      throw ConfigError("ordinal column '" + col.name + "' needs levels >= 2");
    }
    used.push_back(std::move(d));
  }
  const bool survival = times == 1 && events == 1;
  if (times != events || times > 1 || responses + ordinals + times != 1) {
    throw ConfigError(
        "schema needs exactly one of: a response column, an ordinal column, or a "
        "survival-time plus event pair");
  }

  std::optional<std::size_t> key_field;
  std::vector<std::string> key;
  if (key_column) {
    const auto it = position.find(*key_column);
    if (it == position.end()) throw ConfigError("partition key column '" + *key_column + "' not in CSV header");
    key_field = it->second;
  }

  while (src.next(line)) {
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw CsvError(src.line(), "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
    }
    for (auto& d : used) {
      const auto& spec = *d.spec;
      const std::string_view raw = trim(fields[d.field]);
      if (spec.role == ColumnRole::categorical) {
        const std::string value(raw);
        auto it = d.level_index.find(value);
        if (it == d.level_index.end()) {
          if (d.declared) {
            if (schema.strict) {
              throw CsvError(src.line(), "column '" + spec.name + "': unknown level '" + value + "'");
            }
            ++d.unknown_count;
            d.codes.push_back(-1);
            continue;
          }
          it = d.level_index.emplace(value, static_cast<int>(d.level_names.size())).first;
          d.level_names.push_back(value);
        }
        d.codes.push_back(it->second);
        continue;
      }
      const auto v = parse_number(raw);
      if (!v) {
        throw CsvError(src.line(), "column '" + spec.name + "': not a number '" + std::string(raw) + "'");
      }
      if (spec.role == ColumnRole::ordinal &&
          (*v != std::floor(*v) || *v < 1.0 || *v > spec.ordinal_levels)) {
        throw CsvError(src.line(), "column '" + spec.name + "': ordinal level outside 1.." +
                                       std::to_string(spec.ordinal_levels));
      }
      if (spec.role == ColumnRole::event && *v != 0.0 && *v != 1.0) {
        throw CsvError(src.line(), "column '" + spec.name + "': event flag must be 0 or 1");
      }
      if (spec.role == ColumnRole::survival_time && !(*v > 0.0)) {
        throw CsvError(src.line(), "column '" + spec.name + "': survival time must be positive");
      }
      d.numbers.push_back(*v);
    }
    if (key_field) key.emplace_back(trim(fields[*key_field]));
  }

  Dataset out;
  out.key = std::move(key);
  std::vector<Eigen::VectorXd> design_cols;
  for (auto& d : used) {
    const auto& spec = *d.spec;
    switch (spec.role) {
      case ColumnRole::response:
      case ColumnRole::survival_time:
        out.response = Eigen::Map<const Eigen::VectorXd>(d.numbers.data(), static_cast<Eigen::Index>(d.numbers.size()));
        break;
      case ColumnRole::ordinal:
        out.response = Eigen::Map<const Eigen::VectorXd>(d.numbers.data(), static_cast<Eigen::Index>(d.numbers.size()));
        out.ordinal_levels = spec.ordinal_levels;
        break;
      case ColumnRole::event:
        out.event = Eigen::Map<const Eigen::VectorXd>(d.numbers.data(), static_cast<Eigen::Index>(d.numbers.size()));
        break;
      case ColumnRole::numeric: {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.numbers.data(), static_cast<Eigen::Index>(d.numbers.size()));
        if (spec.standardize.value_or(schema.standardize) && v.size() > 0) {
          const double mean = v.mean();
          v.array() -= mean;
          const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
          if (sd > 0.0) {
            v /= sd;
          } else {
            out.notes.push_back("column '" + spec.name + "' is constant; centered only");
          }
        }
        out.covariate_names.push_back(spec.name);
        design_cols.push_back(std::move(v));
        break;
      }
      case ColumnRole::categorical: {
        const auto levels = d.level_names.size();
        std::vector<std::size_t> counts(levels, 0);
        for (int c : d.codes) {
          if (c >= 0) ++counts[static_cast<std::size_t>(c)];
        }
        // Baseline: most frequent level, ties to the lexicographically smallest.
        std::size_t baseline = 0;
        for (std::size_t l = 1; l < levels; ++l) {
          if (counts[l] > counts[baseline] ||
              (counts[l] == counts[baseline] && d.level_names[l] < d.level_names[baseline])) {
            baseline = l;
          }
        }
        std::vector<std::size_t> order;
        for (std::size_t l = 0; l < levels; ++l) {
          if (l != baseline) order.push_back(l);
        }
        if (!d.declared) {
          std::sort(order.begin(), order.end(),
                    [&](std::size_t a, std::size_t b) { return d.level_names[a] < d.level_names[b]; });
        }
        const auto n = static_cast<Eigen::Index>(d.codes.size());
        for (auto l : order) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
          for (Eigen::Index i = 0; i < n; ++i) v(i) = d.codes[i] == static_cast<int>(l) ? 1.0 : 0.0;
          out.covariate_names.push_back(spec.name + "=" + d.level_names[l]);
          design_cols.push_back(std::move(v));
        }
        if (d.unknown_count > 0) {
          Eigen::VectorXd v(n);
          for (Eigen::Index i = 0; i < n; ++i) v(i) = d.codes[i] < 0 ? 1.0 : 0.0;
          out.covariate_names.push_back(spec.name + "=other");
          design_cols.push_back(std::move(v));
          out.notes.push_back("column '" + spec.name + "': " + std::to_string(d.unknown_count) +
                              " rows with undeclared levels mapped to '" + spec.name + "=other'");
        }
        break;
      }
      case ColumnRole::ignore:
        break;
    }
  }
  if (!survival) out.event.resize(0);

  const auto rows = out.response.size();
  out.covariates.resize(rows, static_cast<Eigen::Index>(design_cols.size()));
  for (std::size_t j = 0; j < design_cols.size(); ++j) {
    out.covariates.col(static_cast<Eigen::Index>(j)) = design_cols[j];
  }
  if (out.covariates.cols() == 0) throw ConfigError("schema defines no covariates");
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

Schema Schema::from_json(const nlohmann::json& j) {
  Schema s;
  try {
    s.standardize = j.value("standardize", false);
    s.strict = j.value("strict", true);
    for (const auto& c : j.at("columns")) {
      ColumnSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.role = parse_role(c.at("role").get<std::string>());
      if (c.contains("standardize")) spec.standardize = c.at("standardize").get<bool>();
      if (c.contains("levels")) {
        if (spec.role == ColumnRole::ordinal) {
          spec.ordinal_levels = c.at("levels").get<int>();
        } else {
          spec.levels = c.at("levels").get<std::vector<std::string>>();
        }
      }
      s.columns.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid schema: ") + e.what());
  }
  return s;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema " + path.string() + ": " + e.what());
  }
}

Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema,
                   const std::optional<std::string>& key_column) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return ingest_stream(in, schema, key_column);
}

Dataset ingest_csv_text(const std::string& text, const Schema& schema,
                        const std::optional<std::string>& key_column) {
  std::istringstream in(text);
  return ingest_stream(in, schema, key_column);
}

}  // namespace dlsa::io
