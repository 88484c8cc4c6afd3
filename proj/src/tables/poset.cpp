#include <algorithm>
#include <numeric>

#include "bsafe/error.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::tables {

GridPosetDag::GridPosetDag(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw ValidationError("grid poset needs at least one axis");
  strides_.assign(sizes_.size(), 1);
  for (std::size_t a = sizes_.size(); a-- > 0;) {
    if (sizes_[a] < 1) throw ValidationError("grid poset axis sizes must be positive");
    strides_[a] = n_;
    n_ *= static_cast<std::size_t>(sizes_[a]);
  }
  succ_.resize(n_);
  pred_.resize(n_);
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    const auto size = static_cast<std::size_t>(sizes_[a]);
    for (std::size_t v = 0; v < n_; ++v) {
      if ((v / strides_[a]) % size + 1 < size) {
        const std::size_t w = v + strides_[a];
        edges_.emplace_back(v, w);
        succ_[v].push_back(w);
        pred_[w].push_back(v);
      }
    }
  }
}

GridPosetDag GridPosetDag::from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n == 0) throw ValidationError("poset needs at least one vertex");
  GridPosetDag dag({static_cast<int>(n)});
  dag.grid_ = false;
  dag.edges_.clear();
  dag.succ_.assign(n, {});
  dag.pred_.assign(n, {});
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n || u == v) throw ValidationError("poset edge out of range");
    dag.edges_.emplace_back(u, v);
    dag.succ_[u].push_back(v);
    dag.pred_[v].push_back(u);
  }
  // Kahn's algorithm; leftover vertices lie on a cycle
  std::vector<std::size_t> indeg(n), ready;
  for (std::size_t v = 0; v < n; ++v)
    if ((indeg[v] = dag.pred_[v].size()) == 0) ready.push_back(v);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::size_t v = ready.back();
    ready.pop_back();
    ++seen;
    for (std::size_t w : dag.succ_[v])
      if (--indeg[w] == 0) ready.push_back(w);
  }
  if (seen != n) throw ValidationError("poset edges contain a cycle");
  return dag;
}

bool GridPosetDag::has_edge(std::size_t u, std::size_t v) const {
  if (!grid_) return std::find(succ_[u].begin(), succ_[u].end(), v) != succ_[u].end();
  if (v <= u) return false;
  const std::size_t diff = v - u;
  for (std::size_t a = 0; a < sizes_.size(); ++a)
    if (diff == strides_[a]) return (u / strides_[a]) % static_cast<std::size_t>(sizes_[a]) + 1 <
                                    static_cast<std::size_t>(sizes_[a]);
  return false;
}

bool is_valid(const LinearExtensionState& s, const GridPosetDag& dag) {
  const std::size_t n = dag.vertex_count();
  if (s.order.size() != n) return false;
  std::vector<std::size_t> pos(n, n);
  for (std::size_t t = 0; t < n; ++t) {
    if (s.order[t] >= n || pos[s.order[t]] != n) return false;
    pos[s.order[t]] = t;
  }
  for (const auto& [u, v] : dag.edges())
    if (pos[u] > pos[v]) return false;
  for (std::size_t j = 0; j < s.boundaries.size(); ++j) {
    if (s.boundaries[j] > n) return false;
    if (j > 0 && s.boundaries[j] < s.boundaries[j - 1]) return false;
  }
  return true;
}

LinearExtensionState encode(const DecisionTable& t, const GridPosetDag& dag) {
  if (!dag.is_grid()) throw ValidationError("tables encode only over grid posets");
  if (t.sizes() != dag.sizes()) throw ValidationError("table shape does not match the poset");
  if (!is_monotone(t)) throw ValidationError("only monotone tables have a linear-extension encoding");
  LinearExtensionState s;
  s.order.resize(dag.vertex_count());
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  // by output value, then by index; index order already respects every edge
  std::stable_sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) { return t.at(a) < t.at(b); });
  for (int j = 1; j < t.outputs(); ++j)
    s.boundaries.push_back(static_cast<std::size_t>(
        std::count_if(t.cells().begin(), t.cells().end(), [j](int v) { return v <= j; })));
  return s;
}

DecisionTable decode(const LinearExtensionState& s, const GridPosetDag& dag, int outputs) {
  if (s.boundaries.size() + 1 != static_cast<std::size_t>(outputs))
    throw ValidationError("state has " + std::to_string(s.boundaries.size()) + " boundaries, expected " +
                          std::to_string(outputs - 1));
  std::vector<int> cells(dag.vertex_count());
  std::size_t j = 0;
  for (std::size_t t = 0; t < s.order.size(); ++t) {
    while (j < s.boundaries.size() && s.boundaries[j] <= t) ++j;
    cells[s.order[t]] = static_cast<int>(j) + 1;
  }
  return DecisionTable(dag.sizes(), outputs, std::move(cells));
}

}  // namespace bsafe::tables
