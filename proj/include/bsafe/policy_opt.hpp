#pragma once

#include <cstdint>
#include <string>

#include "bsafe/core.hpp"
#include "bsafe/hes.hpp"
#include "bsafe/risk.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::policy_opt {

struct OptimizationResult {
  Policy policy = Policy::linear(0.0, 0.0, -1.0);
  std::vector<int> decisions;  // per support point of the table
  double posterior_value_gain = 0.0;
  double pacrisk = 0.0;
  double epsilon = 0.0;
  bool feasible = false;
  bool certified = false;     // proven optimal over the class
  double duality_gap = 0.0;   // upper bound minus achieved gain when not certified
  Json diagnostics = Json::object();
};

Json result_to_json(const OptimizationResult& r);

// Tolerance for the risk constraint and for objective ties.
inline constexpr double kFeasibilityTolerance = 1e-12;

// max sum_i w_i b[i][d_i] s.t. sum_i w_i r[i][d_i] <= epsilon over all
// assignments. Lagrangian price sweep with greedy repair; falls back to an
// exact dynamic program over draw counts or to enumeration when the sweep
// cannot certify optimality and the instance is small enough.
OptimizationResult solve_per_unit(const risk::BenefitRiskTable& table, double epsilon);

// Exhaustive search over all K^n assignments; reference for small instances.
OptimizationResult solve_per_unit_brute_force(const risk::BenefitRiskTable& table, double epsilon);

struct LinearOptions {
  int threads = 1;
  // Rules tried before the generated candidates, e.g. a linear baseline, so
  // that ties resolve to them.
  std::vector<LinearThreshold> extra_candidates;
};

// Best feasible delta(x) = I(a x1 + b x2 + c > 0) over every labeling of the
// support points induced by a line, plus the constant policies.
OptimizationResult solve_linear(const risk::BenefitRiskTable& table, double epsilon, const LinearOptions& opts = {});

enum class TableScope { top_table_only, all_tables };

std::string to_string(TableScope s);
TableScope table_scope_from_string(const std::string& s);

// Searches monotone tables of the pipeline with the short-burst optimizer. The
// table's support points are the raw sub-model scores; decision = score - 1.
// For top_table_only the sink is detached into its own table "top".
OptimizationResult solve_table_pipeline(const risk::BenefitRiskTable& table, const hes::HesPipeline& pipeline,
                                        TableScope scope, double epsilon, const tables::ShortBurstConfig& mcmc,
                                        std::uint64_t seed);

}  // namespace bsafe::policy_opt
