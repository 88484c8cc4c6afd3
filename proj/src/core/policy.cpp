#include <cmath>
#include <limits>

#include "bsafe/core.hpp"
#include "bsafe/error.hpp"

namespace bsafe {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::per_unit_assignment: return "per_unit_assignment";
    case PolicyKind::linear_threshold: return "linear_threshold";
    case PolicyKind::table_pipeline: return "table_pipeline";
  }
  return "unknown";
}

Policy::Policy(Payload p) : payload_(std::move(p)) {}

Policy Policy::per_unit(CovariateSet support, std::vector<int> decisions) {
  if (support.size() != decisions.size())
    throw ValidationError("per-unit policy: " + std::to_string(support.size()) + " support points but " +
                          std::to_string(decisions.size()) + " decisions");
  if (support.empty()) throw ValidationError("per-unit policy needs a nonempty support");
  for (const auto& x : support)
    if (x.size() != support.front().size()) throw ValidationError("per-unit policy: ragged support");
  for (int d : decisions)
    if (d < 0) throw ValidationError("per-unit policy: negative decision");
  auto index = std::make_shared<std::map<Covariates, int>>();
  for (std::size_t i = 0; i < support.size(); ++i) index->emplace(support[i], decisions[i]);  // first wins
  Policy p(PerUnitAssignment{std::move(support), std::move(decisions)});
  p.index_ = std::move(index);
  return p;
}

Policy Policy::linear(double a, double b, double c) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
    throw ValidationError("linear policy coefficients must be finite");
  return Policy(LinearThreshold{a, b, c});
}

Policy Policy::table_pipeline(std::shared_ptr<const DecisionRule> rule) {
  if (!rule) throw ValidationError("table_pipeline policy needs a rule");
  return Policy(std::move(rule));
}

PolicyKind Policy::kind() const {
  switch (payload_.index()) {
    case 0: return PolicyKind::per_unit_assignment;
    case 1: return PolicyKind::linear_threshold;
    default: return PolicyKind::table_pipeline;
  }
}

int Policy::apply(std::span<const double> x) const {
  if (const auto* pu = std::get_if<PerUnitAssignment>(&payload_)) {
    const std::size_t p = pu->support.front().size();
    if (x.size() != p)
      throw ValidationError("policy expects " + std::to_string(p) + " covariates, got " + std::to_string(x.size()));
    auto it = index_->find(Covariates(x.begin(), x.end()));
    if (it != index_->end()) return it->second;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pu->support.size(); ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < p; ++j) d += (x[j] - pu->support[i][j]) * (x[j] - pu->support[i][j]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return pu->decisions[best];
  }
  if (const auto* lt = std::get_if<LinearThreshold>(&payload_)) {
    if (x.size() != 2)
      throw ValidationError("linear threshold policy expects 2 covariates, got " + std::to_string(x.size()));
    return lt->a * x[0] + lt->b * x[1] + lt->c > 0.0 ? 1 : 0;
  }
  const auto& rule = std::get<std::shared_ptr<const DecisionRule>>(payload_);
  if (x.size() != rule->dimension())
    throw ValidationError("pipeline policy expects " + std::to_string(rule->dimension()) + " covariates, got " +
                          std::to_string(x.size()));
  return rule->decide(x);
}

std::vector<int> Policy::apply_all(const CovariateSet& xs) const {
  std::vector<int> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(apply(x));
  return out;
}

int apply_policy(const Policy& policy, std::span<const double> x) { return policy.apply(x); }

Json policy_to_json(const Policy& policy) {
  Json j;
  j["kind"] = to_string(policy.kind());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PerUnitAssignment>) {
          j["support"] = p.support;
          j["decisions"] = p.decisions;
        } else if constexpr (std::is_same_v<T, LinearThreshold>) {
          j["a"] = p.a;
          j["b"] = p.b;
          j["c"] = p.c;
        } else {
          j["pipeline"] = p->to_json();
        }
      },
      policy.payload());
  return j;
}

Policy policy_from_json(const Json& j, const RuleLoader& loader) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "per_unit_assignment")
    return Policy::per_unit(j.at("support").get<CovariateSet>(), j.at("decisions").get<std::vector<int>>());
  if (kind == "linear_threshold")
    return Policy::linear(j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>());
  if (kind == "table_pipeline") {
    if (!loader) throw UsageError("no loader available for table_pipeline policies");
    return Policy::table_pipeline(loader(j.at("pipeline")));
  }
  throw ValidationError("unknown policy kind '" + kind + "'");
}

}  // namespace bsafe
