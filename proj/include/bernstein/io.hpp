#pragma once

// CSV and JSON input/output for specs, coefficient tables and sample batches.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/galerkin.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/model.hpp"
#include "bernstein/sampler.hpp"

namespace bernstein {

/// Shortest representation that parses back to the same double; "nan"/"inf" otherwise.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("not a number: '" + s + "'");
  return v;
}

/// Fixed-schema table that renders as CSV (header row) or JSON (array of objects).
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Cells are numbers or preformatted strings (e.g. "NA", flags).
  void add_row(std::vector<std::string> cells) {
    detail::require(cells.size() == columns_.size(), "Table: row width does not match the header");
    rows_.push_back(std::move(cells));
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
      os << '\n';
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows_) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t c = 0; c < r.size(); ++c) {
        double v = 0.0;
        const auto res = std::from_chars(r[c].data(), r[c].data() + r[c].size(), v);
        if (res.ec == std::errc() && res.ptr == r[c].data() + r[c].size())
          obj[columns_[c]] = v;
        else
          obj[columns_[c]] = r[c];
      }
      arr.push_back(std::move(obj));
    }
    return arr;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Reads a CSV written by Table::write_csv.
inline Table read_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("read_csv: empty input");
  Table t(split(line));
  while (std::getline(is, line))
    if (!line.empty()) t.add_row(split(line));
  return t;
}

// ---------------------------------------------------------------------------
// JSON for data and specs

inline nlohmann::json datum_to_json(const Datum& d) {
  nlohmann::json j;
  j["kind"] = d.kind_name();
  if (!d.is_dirac()) {
    j["sigma"] = d.sigma();
    j["a"] = d.center();
  }
  return j;
}

inline Datum datum_from_json(const nlohmann::json& j, std::size_t d) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("datum: missing 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dirac") return Datum::dirac(d);
  if (!j.contains("sigma")) throw ValidationError("datum: missing 'sigma'");
  const double sigma = j.at("sigma").get<double>();
  Point a(d, 0.0);
  if (j.contains("a")) {
    a = j.at("a").get<Point>();
    if (a.size() != d) throw ValidationError("datum: 'a' must have d entries");
  }
  if (kind == "gaussian") return Datum::gaussian(sigma, a);
  if (kind == "hat_product") return Datum::hat_product(sigma, a);
  if (kind == "hat_isotropic") return Datum::hat_isotropic(sigma, a);
  throw ValidationError("datum: unknown kind '" + kind + "'");
}

/// {d, T, phi0: {...}, psiT: {...}}; the normalization is informational only.
inline nlohmann::json spec_to_json(const ProcessSpec& spec) {
  nlohmann::json j;
  j["d"] = spec.dimension();
  j["T"] = spec.horizon();
  j["phi0"] = datum_to_json(spec.phi0());
  j["psiT"] = datum_to_json(spec.psiT());
  j["normalization"] = spec.normalization();
  return j;
}

/// Builds a spec from JSON; any stored normalization is ignored and recomputed.
inline ProcessSpec spec_from_json(const nlohmann::json& j,
                                  NormalizationMethod method = NormalizationMethod::automatic) {
  try {
    const auto d = j.at("d").get<std::size_t>();
    const double T = j.at("T").get<double>();
    return ProcessSpec::create(d, T, datum_from_json(j.at("phi0"), d), datum_from_json(j.at("psiT"), d), method);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spec JSON: ") + e.what());
  }
}

inline ProcessSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spec file: ") + e.what());
  }
  return spec_from_json(j);
}

inline void save_spec(const ProcessSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write spec file '" + path + "'");
  out << spec_to_json(spec).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Tables of library objects

/// Columns n1..nd, E_n, alpha, beta in enumeration order.
inline Table coefficient_table(const GalerkinTruncation& tr) {
  std::vector<std::string> cols;
  for (std::size_t j = 0; j < tr.dimension(); ++j) cols.push_back("n" + std::to_string(j + 1));
  cols.insert(cols.end(), {"E_n", "alpha", "beta"});
  Table t(cols);
  const auto indices = enumerate_truncation(tr.dimension(), tr.truncation());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::vector<std::string> row;
    for (int n : indices[i]) row.push_back(std::to_string(n));
    row.push_back(format_number(energy(indices[i])));
    row.push_back(format_number(tr.alpha()[i]));
    row.push_back(format_number(tr.beta()[i]));
    t.add_row(std::move(row));
  }
  return t;
}

/// Columns path, time, x1..xd.
inline Table batch_table(const SampleBatch& batch) {
  std::vector<std::string> cols{"path", "time"};
  for (std::size_t j = 0; j < batch.dimension(); ++j) cols.push_back("x" + std::to_string(j + 1));
  Table t(cols);
  for (std::size_t p = 0; p < batch.count; ++p)
    for (std::size_t k = 0; k < batch.times(); ++k) {
      std::vector<std::string> row{std::to_string(p), format_number(batch.source.times[k])};
      for (std::size_t j = 0; j < batch.dimension(); ++j) row.push_back(format_number(batch.value(p, k, j)));
      t.add_row(std::move(row));
    }
  return t;
}

}  // namespace bernstein
