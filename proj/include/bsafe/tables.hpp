#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "bsafe/core.hpp"
#include "bsafe/rng.hpp"

namespace bsafe::tables {

// Total map from a grid of 1-based input scores to an output score in 1..outputs.
// Cells are stored row-major with the last axis fastest.
class DecisionTable {
 public:
  DecisionTable(std::vector<int> sizes, int outputs, std::vector<int> cells);

  static DecisionTable constant(std::vector<int> sizes, int outputs, int value);
  // fn receives 1-based scores
  static DecisionTable from_function(std::vector<int> sizes, int outputs,
                                     const std::function<int(std::span<const int>)>& fn);

  std::size_t arity() const { return sizes_.size(); }
  const std::vector<int>& sizes() const { return sizes_; }
  int outputs() const { return outputs_; }
  std::size_t cell_count() const { return cells_.size(); }
  const std::vector<int>& cells() const { return cells_; }

  int operator()(std::span<const int> scores) const { return cells_[index_of(scores)]; }
  int operator()(std::initializer_list<int> scores) const {
    return (*this)(std::span<const int>(scores.begin(), scores.size()));
  }
  int at(std::size_t index) const { return cells_[index]; }
  void set(std::size_t index, int value);

  std::size_t index_of(std::span<const int> scores) const;
  std::vector<int> scores_of(std::size_t index) const;

  bool operator==(const DecisionTable& o) const = default;

 private:
  std::vector<int> sizes_;
  int outputs_;
  std::vector<int> cells_;
};

bool is_monotone(const DecisionTable& t);
std::size_t changed_cells(const DecisionTable& a, const DecisionTable& b);

Json table_to_json(const DecisionTable& t);
DecisionTable table_from_json(const Json& j);
// Plain-text grid: rows index the first input, columns the second, and each
// block below a "# slice" line fixes the remaining inputs.
void write_table_text(std::ostream& out, const DecisionTable& t);
DecisionTable read_table_text(std::istream& in);

// Covering relations of the componentwise order on the input grid.
class GridPosetDag {
 public:
  explicit GridPosetDag(std::vector<int> sizes);
  // Arbitrary DAG on n vertices, e.g. an antichain. Its tables use a single
  // axis of size n, so only the chain moves and decode apply to it.
  static GridPosetDag from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t vertex_count() const { return n_; }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::vector<std::size_t>& successors(std::size_t v) const { return succ_[v]; }
  const std::vector<std::size_t>& predecessors(std::size_t v) const { return pred_[v]; }
  bool has_edge(std::size_t u, std::size_t v) const;
  bool is_grid() const { return grid_; }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> strides_;
  std::size_t n_ = 1;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::vector<std::size_t>> pred_;
  bool grid_ = true;
};

// A topological sort of the grid poset plus |Y|-1 sorted cut positions. The
// vertex at position t receives output 1 + #{j : boundaries[j] <= t}.
struct LinearExtensionState {
  std::vector<std::size_t> order;
  std::vector<std::size_t> boundaries;

  bool operator==(const LinearExtensionState& o) const = default;
  auto operator<=>(const LinearExtensionState& o) const = default;
};

bool is_valid(const LinearExtensionState& s, const GridPosetDag& dag);
// A state that decodes to the given monotone table.
LinearExtensionState encode(const DecisionTable& t, const GridPosetDag& dag);
DecisionTable decode(const LinearExtensionState& s, const GridPosetDag& dag, int outputs);

// Karzanov-Khachiyan move: pick an adjacent position pair uniformly and, with
// probability 1/2, swap it when the two vertices are incomparable. Returns
// true when the order changed.
bool sort_chain_step(LinearExtensionState& s, const GridPosetDag& dag, Rng& rng);
// Moves one uniformly chosen boundary by +-1 when it stays in 0..|V| and in
// sorted order (coincident boundaries allowed). Returns true when it moved.
bool boundary_step(LinearExtensionState& s, const GridPosetDag& dag, Rng& rng);

// Every monotone table over the grid, each exactly once.
std::vector<DecisionTable> enumerate_monotone_tables(const std::vector<int>& sizes, int outputs);

// Chain state that keeps its decoded table current under single moves.
class TableChain {
 public:
  TableChain(const DecisionTable& start, std::shared_ptr<const GridPosetDag> dag);

  const DecisionTable& table() const { return table_; }
  const LinearExtensionState& state() const { return state_; }
  bool sort_step(Rng& rng);
  bool boundary_step(Rng& rng);

 private:
  int output_at(std::size_t position) const;

  std::shared_ptr<const GridPosetDag> dag_;
  LinearExtensionState state_;
  DecisionTable table_;
};

struct ShortBurstConfig {
  int bursts = 200;        // R
  int burst_length = 10;   // chain steps per burst
  int restarts = 2000;     // independent runs
  double sort_move_probability = 0.5;
  int threads = 1;

  void validate() const;
};

Json config_to_json(const ShortBurstConfig& c);
ShortBurstConfig burst_config_from_json(const Json& j);

struct Evaluation {
  double objective = 0.0;
  bool feasible = false;
};

// Called from worker threads concurrently when threads > 1.
using TableEvaluator = std::function<Evaluation(const std::vector<DecisionTable>&)>;

struct ShortBurstResult {
  std::vector<DecisionTable> tables;
  Evaluation evaluation;
  std::size_t changed_cells = 0;  // relative to the initial tables
  int best_restart = -1;
  std::size_t evaluations = 0;
};

// Maximizes the objective over monotone tables subject to feasibility. Each
// step mutates one uniformly chosen table; each burst restarts from its best
// feasible state; the best feasible result across restarts is returned, ties
// going to fewer changed cells and then the lower restart index.
ShortBurstResult short_burst(const TableEvaluator& evaluate, const std::vector<DecisionTable>& initial,
                             const ShortBurstConfig& config, std::uint64_t seed);

ShortBurstResult short_burst(const std::function<double(const std::vector<DecisionTable>&)>& objective,
                             const std::function<bool(const std::vector<DecisionTable>&)>& constraint,
                             const std::vector<DecisionTable>& initial, const ShortBurstConfig& config,
                             std::uint64_t seed);

}  // namespace bsafe::tables
