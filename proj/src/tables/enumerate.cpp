#include <cmath>

#include "bsafe/error.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::tables {

namespace {

constexpr double kMaxRawMaps = 1e7;

struct Enumerator {
  const GridPosetDag& dag;
  int outputs;
  std::vector<int> cells;
  std::vector<DecisionTable> out;

  // predecessors of a vertex always have smaller indices
  void fill(std::size_t v) {
    if (v == cells.size()) {
      out.emplace_back(dag.sizes(), outputs, cells);
      return;
    }
    int lo = 1;
    for (std::size_t p : dag.predecessors(v)) lo = std::max(lo, cells[p]);
    for (int value = lo; value <= outputs; ++value) {
      cells[v] = value;
      fill(v + 1);
    }
  }
};

}  // namespace

std::vector<DecisionTable> enumerate_monotone_tables(const std::vector<int>& sizes, int outputs) {
  GridPosetDag dag(sizes);
  if (outputs < 1) throw ValidationError("need at least one output value");
  const double raw = static_cast<double>(dag.vertex_count()) * std::log10(static_cast<double>(outputs));
  if (raw > std::log10(kMaxRawMaps) + 1e-12)
    throw ValidationError("table enumeration too large: " + std::to_string(outputs) + "^" +
                          std::to_string(dag.vertex_count()) + " exceeds 1e7 maps");
  Enumerator e{dag, outputs, std::vector<int>(dag.vertex_count(), 1), {}};
  e.fill(0);
  return std::move(e.out);
}

}  // namespace bsafe::tables
