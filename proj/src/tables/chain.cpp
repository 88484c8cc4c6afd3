#include <algorithm>

#include "bsafe/error.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::tables {

bool sort_chain_step(LinearExtensionState& s, const GridPosetDag& dag, Rng& rng) {
  const std::size_t n = s.order.size();
  if (n < 2) return false;
  const std::size_t t = uniform_index(rng, n - 1);
  const bool propose = uniform01(rng) < 0.5;
  // adjacent vertices are incomparable iff no covering edge joins them
  if (!propose || dag.has_edge(s.order[t], s.order[t + 1])) return false;
  std::swap(s.order[t], s.order[t + 1]);
  return true;
}

bool boundary_step(LinearExtensionState& s, const GridPosetDag& dag, Rng& rng) {
  const std::size_t nb = s.boundaries.size();
  if (nb == 0) return false;
  const std::size_t j = uniform_index(rng, nb);
  const bool up = uniform01(rng) < 0.5;
  const std::size_t b = s.boundaries[j];
  if (up) {
    const std::size_t hi = j + 1 < nb ? s.boundaries[j + 1] : dag.vertex_count();
    if (b + 1 > hi) return false;
    s.boundaries[j] = b + 1;
  } else {
    const std::size_t lo = j > 0 ? s.boundaries[j - 1] : 0;
    if (b == 0 || b - 1 < lo) return false;
    s.boundaries[j] = b - 1;
  }
  return true;
}

TableChain::TableChain(const DecisionTable& start, std::shared_ptr<const GridPosetDag> dag)
    : dag_(std::move(dag)), state_(encode(start, *dag_)), table_(start) {}

int TableChain::output_at(std::size_t position) const {
  const auto it = std::upper_bound(state_.boundaries.begin(), state_.boundaries.end(), position);
  return static_cast<int>(it - state_.boundaries.begin()) + 1;
}

bool TableChain::sort_step(Rng& rng) {
  const std::size_t n = state_.order.size();
  if (n < 2) return false;
  const std::size_t t = uniform_index(rng, n - 1);
  const bool propose = uniform01(rng) < 0.5;
  if (!propose || dag_->has_edge(state_.order[t], state_.order[t + 1])) return false;
  std::swap(state_.order[t], state_.order[t + 1]);
  // outputs stay attached to positions
  table_.set(state_.order[t], output_at(t));
  table_.set(state_.order[t + 1], output_at(t + 1));
  return true;
}

bool TableChain::boundary_step(Rng& rng) {
  const std::size_t before_size = state_.boundaries.size();
  if (before_size == 0) return false;
  const auto before = state_.boundaries;
  if (!tables::boundary_step(state_, *dag_, rng)) return false;
  for (std::size_t j = 0; j < before_size; ++j) {
    if (state_.boundaries[j] == before[j]) continue;
    // moving a cut from b to b+1 lowers position b; moving it to b-1 raises position b-1
    const std::size_t position = std::min(state_.boundaries[j], before[j]);
    table_.set(state_.order[position], output_at(position));
  }
  return true;
}

}  // namespace bsafe::tables
