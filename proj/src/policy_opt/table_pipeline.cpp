#include "bsafe/error.hpp"
#include "bsafe/policy_opt.hpp"

namespace bsafe::policy_opt {

std::string to_string(TableScope s) { return s == TableScope::top_table_only ? "top" : "all"; }

TableScope table_scope_from_string(const std::string& s) {
  if (s == "top" || s == "top_table_only") return TableScope::top_table_only;
  if (s == "all" || s == "all_tables") return TableScope::all_tables;
  throw UsageError("unknown table scope '" + s + "' (expected top or all)");
}

OptimizationResult solve_table_pipeline(const risk::BenefitRiskTable& table, const hes::HesPipeline& pipeline,
                                        TableScope scope, double epsilon, const tables::ShortBurstConfig& mcmc,
                                        std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ValidationError("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
  mcmc.validate();
  if (table.k_decisions() != pipeline.output_levels())
    throw ValidationError("table has " + std::to_string(table.k_decisions()) + " decisions but the pipeline emits " +
                          std::to_string(pipeline.output_levels()) + " scores");
  const hes::HesPipeline work = scope == TableScope::top_table_only ? pipeline.with_detached_sink("top") : pipeline;
  std::vector<std::string> names;
  if (scope == TableScope::top_table_only)
    names.push_back("top");
  else
    for (const auto& [name, _] : work.tables()) names.push_back(name);

  const std::size_t n = table.n_units();
  std::vector<std::vector<int>> scores;
  for (const auto& x : table.distribution().support()) scores.push_back(hes::round_scores(x, work.rounding(), work.levels()));
  // the sink inputs stay fixed when only the sink table moves
  std::vector<std::vector<int>> sink_args;
  if (scope == TableScope::top_table_only)
    for (const auto& s : scores) sink_args.push_back(work.sink_inputs(s));

  auto decisions_for = [&](const std::vector<tables::DecisionTable>& tabs) {
    std::vector<int> d(n);
    if (scope == TableScope::top_table_only) {
      for (std::size_t i = 0; i < n; ++i) d[i] = tabs[0](sink_args[i]) - 1;
    } else {
      hes::HesPipeline p = work;
      for (std::size_t t = 0; t < names.size(); ++t) p.set_table(names[t], tabs[t]);
      for (std::size_t i = 0; i < n; ++i) d[i] = p.evaluate_rounded(scores[i]) - 1;
    }
    return d;
  };
  auto evaluate = [&](const std::vector<tables::DecisionTable>& tabs) {
    const auto d = decisions_for(tabs);
    return tables::Evaluation{risk::posterior_value(d, table), risk::pacrisk(d, table) <= epsilon + kFeasibilityTolerance};
  };

  std::vector<tables::DecisionTable> initial;
  for (const auto& name : names) initial.push_back(work.table(name));
  const auto sb = tables::short_burst(evaluate, initial, mcmc, seed);

  hes::HesPipeline learned = work;
  for (std::size_t t = 0; t < names.size(); ++t) learned.set_table(names[t], sb.tables[t]);
  OptimizationResult r;
  r.decisions = decisions_for(sb.tables);
  r.posterior_value_gain = risk::posterior_value(r.decisions, table);
  r.pacrisk = risk::pacrisk(r.decisions, table);
  r.epsilon = epsilon;
  r.feasible = r.pacrisk <= epsilon + kFeasibilityTolerance;
  r.certified = false;
  r.policy = hes::pipeline_policy(std::move(learned));
  r.diagnostics = Json{{"method", "short_burst"},
                       {"scope", to_string(scope)},
                       {"tables", names},
                       {"evaluations", sb.evaluations},
                       {"best_restart", sb.best_restart},
                       {"changed_cells", sb.changed_cells},
                       {"mcmc", tables::config_to_json(mcmc)}};
  return r;
}

}  // namespace bsafe::policy_opt
