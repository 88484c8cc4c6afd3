#include <cmath>
#include <numeric>

#include "bsafe/core.hpp"
#include "bsafe/error.hpp"

namespace bsafe {

double UtilitySpec::expected_binary(int k, double p) const {
  if (mode == Mode::outcome_identity) return p;
  return custom.at({k, 0}) * (1.0 - p) + custom.at({k, 1}) * p;
}

void UtilitySpec::validate(int k_decisions, OutcomeKind kind) const {
  if (mode == Mode::outcome_identity) return;
  if (kind != OutcomeKind::binary)
    throw ValidationError("custom utility tables are supported for binary outcomes only");
  for (int k = 0; k < k_decisions; ++k)
    for (int y = 0; y <= 1; ++y) {
      auto it = custom.find({k, y});
      if (it == custom.end())
        throw ValidationError("custom utility missing entry for decision " + std::to_string(k) + ", outcome " +
                              std::to_string(y));
      if (!std::isfinite(it->second)) throw ValidationError("custom utility must be finite");
    }
}

Json utility_to_json(const UtilitySpec& u) {
  Json j;
  if (u.mode == UtilitySpec::Mode::outcome_identity) {
    j["mode"] = "outcome_identity";
    return j;
  }
  j["mode"] = "custom_table";
  Json rows = Json::array();
  for (const auto& [key, v] : u.custom) rows.push_back({{"decision", key.first}, {"outcome", key.second}, {"utility", v}});
  j["custom"] = rows;
  return j;
}

UtilitySpec utility_from_json(const Json& j) {
  UtilitySpec u;
  const auto mode = j.value("mode", std::string("outcome_identity"));
  if (mode == "outcome_identity") return u;
  if (mode != "custom_table") throw ValidationError("unknown utility mode '" + mode + "'");
  u.mode = UtilitySpec::Mode::custom_table;
  for (const auto& row : j.at("custom"))
    u.custom[{row.at("decision").get<int>(), row.at("outcome").get<int>()}] = row.at("utility").get<double>();
  return u;
}

EmpiricalCovariateDistribution::EmpiricalCovariateDistribution(CovariateSet support)
    : support_(std::move(support)) {
  if (support_.empty()) throw ValidationError("covariate distribution needs a nonempty support");
  weights_.assign(support_.size(), 1.0 / static_cast<double>(support_.size()));
}

EmpiricalCovariateDistribution::EmpiricalCovariateDistribution(CovariateSet support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty()) throw ValidationError("covariate distribution needs a nonempty support");
  if (weights_.size() != support_.size()) throw ValidationError("one weight per support point required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("covariate weights must be finite and nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("covariate weights must sum to 1");
  const double w0 = weights_.front();
  for (double w : weights_) uniform_ = uniform_ && w == w0;
}

}  // namespace bsafe
