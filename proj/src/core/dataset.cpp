#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "bsafe/core.hpp"
#include "bsafe/error.hpp"

namespace bsafe {

std::string to_string(OutcomeKind kind) {
  return kind == OutcomeKind::continuous ? "continuous" : "binary";
}

OutcomeKind outcome_kind_from_string(const std::string& s) {
  if (s == "continuous") return OutcomeKind::continuous;
  if (s == "binary") return OutcomeKind::binary;
  throw UsageError("unknown outcome kind '" + s + "' (expected continuous or binary)");
}

Dataset::Dataset(std::vector<Unit> units, int k_decisions, OutcomeKind outcome_kind)
    : units_(std::move(units)), k_decisions_(k_decisions), outcome_kind_(outcome_kind) {
  if (k_decisions_ < 2) throw ValidationError("dataset needs at least 2 decisions, got " + std::to_string(k_decisions_));
  if (!units_.empty()) dimension_ = units_.front().covariates.size();
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const Unit& u = units_[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (u.covariates.size() != dimension_)
      throw ValidationError(where + ": expected " + std::to_string(dimension_) + " covariates, got " +
                            std::to_string(u.covariates.size()));
    if (u.decision < 0 || u.decision >= k_decisions_)
      throw ValidationError(where + ": decision " + std::to_string(u.decision) + " outside 0.." +
                            std::to_string(k_decisions_ - 1));
    for (double v : u.covariates)
      if (!std::isfinite(v)) throw ValidationError(where + ": non-finite covariate");
    if (!std::isfinite(u.outcome)) throw ValidationError(where + ": non-finite outcome");
    if (outcome_kind_ == OutcomeKind::binary && u.outcome != 0.0 && u.outcome != 1.0)
      throw ValidationError(where + ": binary outcome must be 0 or 1, got " + std::to_string(u.outcome));
  }
}

CovariateSet Dataset::covariates() const {
  CovariateSet xs;
  xs.reserve(units_.size());
  for (const auto& u : units_) xs.push_back(u.covariates);
  return xs;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(const std::string& field, long row, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("row " + std::to_string(row) + ": cannot parse '" + field + "' in column '" + column + "'", row);
  return v;
}

int parse_int(const std::string& field, long row, const std::string& column) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec == std::errc() && ptr == field.data() + field.size()) return v;
  // accept integral reals such as "1.0"
  double d = parse_real(field, row, column);
  if (d != std::floor(d))
    throw ParseError("row " + std::to_string(row) + ": decision '" + field + "' is not an integer", row);
  return static_cast<int>(d);
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, const DatasetSchema& schema) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw ParseError("empty dataset file: no header row");

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t d_col = column(schema.decision);
  const std::size_t y_col = column(schema.outcome);
  std::vector<std::size_t> x_cols;
  if (schema.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != d_col && c != y_col) x_cols.push_back(c);
  } else {
    for (const auto& name : schema.covariates) x_cols.push_back(column(name));
  }

  std::vector<Unit> units;
  long row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    ++row;
    auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    Unit u;
    u.covariates.reserve(x_cols.size());
    for (auto c : x_cols) u.covariates.push_back(parse_real(fields[c], row, header[c]));
    u.decision = parse_int(fields[d_col], row, header[d_col]);
    u.outcome = parse_real(fields[y_col], row, header[y_col]);
    units.push_back(std::move(u));
  }
  return Dataset(std::move(units), schema.k_decisions, schema.outcome_kind);
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
  return read_dataset_csv(in, schema);
}

void write_dataset_csv(std::ostream& out, const Dataset& data, const DatasetSchema& schema) {
  std::vector<std::string> names = schema.covariates;
  if (names.empty())
    for (std::size_t j = 0; j < data.dimension(); ++j) names.push_back("x" + std::to_string(j + 1));
  if (names.size() != data.dimension()) throw UsageError("schema covariate count does not match dataset");
  for (const auto& n : names) out << n << ',';
  out << schema.decision << ',' << schema.outcome << '\n';
  out << std::setprecision(17);
  for (const auto& u : data.units()) {
    for (double v : u.covariates) out << v << ',';
    out << u.decision << ',' << u.outcome << '\n';
  }
}

}  // namespace bsafe
