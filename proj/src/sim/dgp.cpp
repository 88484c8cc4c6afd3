#include <cmath>

#include "bsafe/error.hpp"
#include "bsafe/sim.hpp"

namespace bsafe::sim {

std::string to_string(Scenario s) { return s == Scenario::I ? "I" : "II"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "I" || s == "1") return Scenario::I;
  if (s == "II" || s == "2") return Scenario::II;
  throw UsageError("unknown scenario '" + s + "' (expected I or II)");
}

void DgpSpec::validate() const {
  if (n < 2) throw ValidationError("simulation needs at least 2 units");
  if (outcome == OutcomeKind::continuous && !(sigma > 0.0)) throw ValidationError("noise sd must be positive");
  if (outcome == OutcomeKind::binary && !std::isfinite(gamma)) throw ValidationError("gamma must be finite");
}

bool DgpSpec::custom() const {
  if (outcome == OutcomeKind::continuous) return sigma != 1.0 && sigma != 2.0 && sigma != 3.0;
  return gamma != 1.0 && gamma != 2.0;
}

Json dgp_to_json(const DgpSpec& s) {
  Json j{{"scenario", to_string(s.scenario)}, {"outcome", to_string(s.outcome)}, {"n", s.n}};
  if (s.outcome == OutcomeKind::continuous)
    j["sigma"] = s.sigma;
  else
    j["gamma"] = s.gamma;
  return j;
}

Policy baseline_policy(Scenario s) {
  return s == Scenario::I ? Policy::linear(0.0, 0.0, -1.0) : Policy::linear(1.0, 0.0, -0.5);
}

double conditional_mean(const DgpSpec& spec, std::span<const double> x, int d) {
  const double both = x[0] > 0.0 && x[1] > 0.0 ? 1.0 : 0.0;
  const double mag = std::abs(x[0]) * std::abs(x[1]);
  if (spec.outcome == OutcomeKind::continuous) return x[0] + x[1] + (4.0 * both - 2.0) * d * mag;
  const double eta = 0.5 * x[0] + 0.5 * x[1] + spec.gamma * (3.0 * both - 1.5) * d * mag;
  return 1.0 / (1.0 + std::exp(-eta));
}

double oracle_tau(const DgpSpec& spec, std::span<const double> x, int k) {
  const int base = baseline_policy(spec.scenario).apply(x);
  return conditional_mean(spec, x, k) - conditional_mean(spec, x, base);
}

risk::OracleTau make_oracle(const DgpSpec& spec) {
  return [spec](std::span<const double> x, int k) { return oracle_tau(spec, x, k); };
}

CovariateSet draw_covariates(std::size_t n, Rng& rng) {
  CovariateSet xs(n, Covariates(2));
  for (auto& x : xs) {
    x[0] = 2.0 * uniform01(rng) - 1.0;
    x[1] = 2.0 * uniform01(rng) - 1.0;
  }
  return xs;
}

Dataset generate(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  const auto xs = draw_covariates(spec.n, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Unit> units;
  units.reserve(spec.n);
  for (const auto& x : xs) {
    const int d = spec.scenario == Scenario::I ? (uniform01(rng) < 0.5 ? 1 : 0) : (x[0] > 0.5 ? 1 : 0);
    const double mu = conditional_mean(spec, x, d);
    double y;
    if (spec.outcome == OutcomeKind::continuous)
      y = mu + spec.sigma * noise(rng);
    else
      y = uniform01(rng) < mu ? 1.0 : 0.0;
    units.push_back(Unit{x, d, y});
  }
  return Dataset(std::move(units), 2, spec.outcome);
}

double true_value(const Policy& policy, const DgpSpec& spec, const CovariateSet& xs) {
  if (xs.empty()) throw ValidationError("true value needs covariate draws");
  double sum = 0.0;
  for (const auto& x : xs) sum += conditional_mean(spec, x, policy.apply(x));
  return sum / static_cast<double>(xs.size());
}

double true_value(const Policy& policy, const DgpSpec& spec, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  return true_value(policy, spec, draw_covariates(samples, rng));
}

}  // namespace bsafe::sim
