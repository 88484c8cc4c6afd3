#include <cmath>

#include "bsafe/error.hpp"
#include "bsafe/parallel.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::tables {

namespace {

constexpr double kTieTolerance = 1e-12;

struct Candidate {
  std::vector<TableChain> chains;
  Evaluation eval;
  std::size_t changed = 0;
};

std::size_t total_changed(const std::vector<TableChain>& chains, const std::vector<DecisionTable>& initial) {
  std::size_t n = 0;
  for (std::size_t t = 0; t < chains.size(); ++t) n += changed_cells(chains[t].table(), initial[t]);
  return n;
}

std::vector<DecisionTable> tables_of(const std::vector<TableChain>& chains) {
  std::vector<DecisionTable> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(c.table());
  return out;
}

// Strictly better objective, or equal objective with fewer changed cells.
bool better(const Evaluation& e, std::size_t changed, const Evaluation& best, std::size_t best_changed) {
  if (e.objective > best.objective + kTieTolerance) return true;
  return std::abs(e.objective - best.objective) <= kTieTolerance && changed < best_changed;
}

struct RestartOutcome {
  std::vector<DecisionTable> tables;
  Evaluation eval;
  std::size_t changed = 0;
  std::size_t evaluations = 0;
};

RestartOutcome run_restart(const TableEvaluator& evaluate, const std::vector<DecisionTable>& initial,
                           const std::vector<std::shared_ptr<const GridPosetDag>>& dags, const ShortBurstConfig& config,
                           const Evaluation& initial_eval, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TableChain> start;
  for (std::size_t t = 0; t < initial.size(); ++t) start.emplace_back(initial[t], dags[t]);
  Candidate current{start, initial_eval, 0};
  // `record` is what the restart returns; `current` is where each burst
  // starts. Ties move `current` to the latest state so the walk can drift
  // across plateaus, while `record` keeps the fewest changed cells.
  Candidate record = current;
  std::size_t evaluations = 0;
  for (int r = 0; r < config.bursts; ++r) {
    Candidate next = current;  // T_r0 is always a candidate
    std::vector<TableChain> walk = current.chains;
    for (int k = 0; k < config.burst_length; ++k) {
      const std::size_t which = walk.size() == 1 ? 0 : uniform_index(rng, walk.size());
      const bool sort_move = uniform01(rng) < config.sort_move_probability;
      const bool changed = sort_move ? walk[which].sort_step(rng) : walk[which].boundary_step(rng);
      if (!changed) continue;
      const auto tabs = tables_of(walk);
      const Evaluation e = evaluate(tabs);
      ++evaluations;
      if (!e.feasible) continue;
      if (e.objective < next.eval.objective - kTieTolerance) continue;
      const std::size_t ch = total_changed(walk, initial);
      next = Candidate{walk, e, ch};
      if (better(e, ch, record.eval, record.changed)) record = next;
    }
    current = std::move(next);
  }
  current = std::move(record);
  return {tables_of(current.chains), current.eval, current.changed, evaluations};
}

}  // namespace

void ShortBurstConfig::validate() const {
  if (bursts < 1) throw ValidationError("short-burst optimizer needs at least one burst");
  if (burst_length < 1) throw ValidationError("burst length must be positive");
  if (restarts < 1) throw ValidationError("short-burst optimizer needs at least one restart");
  if (!(sort_move_probability >= 0.0 && sort_move_probability <= 1.0))
    throw ValidationError("sort move probability must lie in [0, 1]");
}

Json config_to_json(const ShortBurstConfig& c) {
  return Json{{"bursts", c.bursts},
              {"burst_length", c.burst_length},
              {"restarts", c.restarts},
              {"sort_move_probability", c.sort_move_probability}};
}

ShortBurstConfig burst_config_from_json(const Json& j) {
  for (const auto& [key, _] : j.items())
    if (key != "bursts" && key != "burst_length" && key != "restarts" && key != "sort_move_probability")
      throw UsageError("unknown key '" + key + "' in mcmc config");
  ShortBurstConfig c;
  c.bursts = j.value("bursts", c.bursts);
  c.burst_length = j.value("burst_length", c.burst_length);
  c.restarts = j.value("restarts", c.restarts);
  c.sort_move_probability = j.value("sort_move_probability", c.sort_move_probability);
  return c;
}

ShortBurstResult short_burst(const TableEvaluator& evaluate, const std::vector<DecisionTable>& initial,
                             const ShortBurstConfig& config, std::uint64_t seed) {
  config.validate();
  if (initial.empty()) throw ValidationError("short-burst optimizer needs at least one table");
  std::vector<std::shared_ptr<const GridPosetDag>> dags;
  for (const auto& t : initial) {
    if (!is_monotone(t)) throw ValidationError("initial tables must be monotone");
    dags.push_back(std::make_shared<const GridPosetDag>(t.sizes()));
  }
  const Evaluation initial_eval = evaluate(initial);
  if (!initial_eval.feasible) throw ValidationError("initial tables violate the constraint; no feasible state");

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  parallel_for(outcomes.size(), resolve_threads(config.threads), [&](std::size_t r) {
    outcomes[r] = run_restart(evaluate, initial, dags, config, initial_eval, derive_seed(seed, {r}));
  });

  ShortBurstResult result{initial, initial_eval, 0, -1, 1};
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.evaluations += outcomes[r].evaluations;
    if (better(outcomes[r].eval, outcomes[r].changed, result.evaluation, result.changed_cells) ||
        result.best_restart < 0) {
      if (result.best_restart >= 0 &&
          !better(outcomes[r].eval, outcomes[r].changed, result.evaluation, result.changed_cells))
        continue;
      result.tables = outcomes[r].tables;
      result.evaluation = outcomes[r].eval;
      result.changed_cells = outcomes[r].changed;
      result.best_restart = static_cast<int>(r);
    }
  }
  return result;
}

ShortBurstResult short_burst(const std::function<double(const std::vector<DecisionTable>&)>& objective,
                             const std::function<bool(const std::vector<DecisionTable>&)>& constraint,
                             const std::vector<DecisionTable>& initial, const ShortBurstConfig& config,
                             std::uint64_t seed) {
  return short_burst(
      [&](const std::vector<DecisionTable>& t) { return Evaluation{objective(t), constraint(t)}; }, initial, config,
      seed);
}

}  // namespace bsafe::tables
