#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bsafe/error.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::tables {

namespace {

std::size_t product(const std::vector<int>& sizes) {
  std::size_t n = 1;
  for (int s : sizes) n *= static_cast<std::size_t>(s);
  return n;
}

void check_shape(const std::vector<int>& sizes, int outputs) {
  if (sizes.empty()) throw ValidationError("decision table needs at least one input axis");
  for (int s : sizes)
    if (s < 1) throw ValidationError("decision table axis sizes must be positive");
  if (outputs < 1) throw ValidationError("decision table needs at least one output value");
}

}  // namespace

DecisionTable::DecisionTable(std::vector<int> sizes, int outputs, std::vector<int> cells)
    : sizes_(std::move(sizes)), outputs_(outputs), cells_(std::move(cells)) {
  check_shape(sizes_, outputs_);
  if (cells_.size() != product(sizes_))
    throw ValidationError("decision table expects " + std::to_string(product(sizes_)) + " cells, got " +
                          std::to_string(cells_.size()));
  for (int v : cells_)
    if (v < 1 || v > outputs_)
      throw ValidationError("decision table cell " + std::to_string(v) + " outside 1.." + std::to_string(outputs_));
}

DecisionTable DecisionTable::constant(std::vector<int> sizes, int outputs, int value) {
  check_shape(sizes, outputs);
  const std::size_t n = product(sizes);
  return DecisionTable(std::move(sizes), outputs, std::vector<int>(n, value));
}

DecisionTable DecisionTable::from_function(std::vector<int> sizes, int outputs,
                                           const std::function<int(std::span<const int>)>& fn) {
  check_shape(sizes, outputs);
  const std::size_t n = product(sizes);
  std::vector<int> cells(n);
  std::vector<int> scores(sizes.size(), 1);
  for (std::size_t idx = 0; idx < n; ++idx) {
    cells[idx] = fn(scores);
    for (std::size_t a = sizes.size(); a-- > 0;) {
      if (++scores[a] <= sizes[a]) break;
      scores[a] = 1;
    }
  }
  return DecisionTable(std::move(sizes), outputs, std::move(cells));
}

void DecisionTable::set(std::size_t index, int value) {
  if (value < 1 || value > outputs_) throw ValidationError("decision table value out of range");
  cells_.at(index) = value;
}

std::size_t DecisionTable::index_of(std::span<const int> scores) const {
  if (scores.size() != sizes_.size())
    throw ValidationError("decision table of arity " + std::to_string(sizes_.size()) + " got " +
                          std::to_string(scores.size()) + " inputs");
  std::size_t idx = 0;
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    if (scores[a] < 1 || scores[a] > sizes_[a])
      throw ValidationError("input score " + std::to_string(scores[a]) + " outside 1.." + std::to_string(sizes_[a]));
    idx = idx * static_cast<std::size_t>(sizes_[a]) + static_cast<std::size_t>(scores[a] - 1);
  }
  return idx;
}

std::vector<int> DecisionTable::scores_of(std::size_t index) const {
  std::vector<int> s(sizes_.size());
  for (std::size_t a = sizes_.size(); a-- > 0;) {
    s[a] = static_cast<int>(index % static_cast<std::size_t>(sizes_[a])) + 1;
    index /= static_cast<std::size_t>(sizes_[a]);
  }
  return s;
}

bool is_monotone(const DecisionTable& t) {
  // covering edges suffice: comparable pairs are joined by a chain of them
  std::size_t stride = 1;
  for (std::size_t a = t.arity(); a-- > 0;) {
    const auto size = static_cast<std::size_t>(t.sizes()[a]);
    for (std::size_t v = 0; v < t.cell_count(); ++v) {
      const std::size_t coord = (v / stride) % size;
      if (coord + 1 < size && t.at(v) > t.at(v + stride)) return false;
    }
    stride *= size;
  }
  return true;
}

std::size_t changed_cells(const DecisionTable& a, const DecisionTable& b) {
  if (a.sizes() != b.sizes()) throw ValidationError("cannot compare tables of different shapes");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.cell_count(); ++i) n += a.at(i) != b.at(i) ? 1 : 0;
  return n;
}

Json table_to_json(const DecisionTable& t) {
  return Json{{"sizes", t.sizes()}, {"outputs", t.outputs()}, {"cells", t.cells()}};
}

DecisionTable table_from_json(const Json& j) {
  return DecisionTable(j.at("sizes").get<std::vector<int>>(), j.at("outputs").get<int>(),
                       j.at("cells").get<std::vector<int>>());
}

void write_table_text(std::ostream& out, const DecisionTable& t) {
  const auto& sizes = t.sizes();
  out << "# sizes";
  for (int s : sizes) out << ' ' << s;
  out << " outputs " << t.outputs() << '\n';
  const std::size_t rows = static_cast<std::size_t>(sizes[0]);
  const std::size_t cols = sizes.size() > 1 ? static_cast<std::size_t>(sizes[1]) : 1;
  const std::size_t block = rows * cols;
  const std::size_t slices = t.cell_count() / block;
  // rows index axis 0 and columns axis 1; remaining axes vary across slices
  for (std::size_t s = 0; s < slices; ++s) {
    if (sizes.size() > 2) {
      // decode slice coordinates for axes 2..p-1 (last axis fastest)
      std::vector<int> rest(sizes.size() - 2);
      std::size_t r = s;
      for (std::size_t a = sizes.size(); a-- > 2;) {
        rest[a - 2] = static_cast<int>(r % static_cast<std::size_t>(sizes[a])) + 1;
        r /= static_cast<std::size_t>(sizes[a]);
      }
      out << "# slice";
      for (std::size_t a = 0; a < rest.size(); ++a) out << " input" << (a + 3) << '=' << rest[a];
      out << '\n';
    }
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        std::vector<int> scores;
        scores.push_back(static_cast<int>(i) + 1);
        if (sizes.size() > 1) scores.push_back(static_cast<int>(j) + 1);
        if (sizes.size() > 2) {
          std::size_t r = s;
          std::vector<int> rest(sizes.size() - 2);
          for (std::size_t a = sizes.size(); a-- > 2;) {
            rest[a - 2] = static_cast<int>(r % static_cast<std::size_t>(sizes[a])) + 1;
            r /= static_cast<std::size_t>(sizes[a]);
          }
          scores.insert(scores.end(), rest.begin(), rest.end());
        }
        out << (j ? " " : "") << t(scores);
      }
      out << '\n';
    }
  }
}

DecisionTable read_table_text(std::istream& in) {
  std::string line;
  std::vector<int> sizes;
  int outputs = 0;
  std::vector<int> grid_order;  // values in file order
  while (std::getline(in, line)) {
    if (line.rfind("# sizes", 0) == 0) {
      std::istringstream ss(line.substr(7));
      std::string tok;
      while (ss >> tok) {
        if (tok == "outputs") {
          ss >> outputs;
          break;
        }
        sizes.push_back(std::stoi(tok));
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int v = 0;
    while (ss >> v) grid_order.push_back(v);
  }
  if (sizes.empty() || outputs < 1) throw ParseError("table text: missing '# sizes ... outputs N' header");
  const std::size_t rows = static_cast<std::size_t>(sizes[0]);
  const std::size_t cols = sizes.size() > 1 ? static_cast<std::size_t>(sizes[1]) : 1;
  std::size_t total = 1;
  for (int s : sizes) total *= static_cast<std::size_t>(s);
  if (grid_order.size() != total)
    throw ParseError("table text: expected " + std::to_string(total) + " values, got " + std::to_string(grid_order.size()));
  std::vector<int> cells(total);
  const std::size_t rest = total / (rows * cols);
  for (std::size_t s = 0; s < rest; ++s)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) cells[(i * cols + j) * rest + s] = grid_order[(s * rows + i) * cols + j];
  return DecisionTable(std::move(sizes), outputs, std::move(cells));
}

}  // namespace bsafe::tables
