#include <iomanip>
#include <ostream>

#include "bsafe/error.hpp"
#include "bsafe/kernels.hpp"
#include "bsafe/risk.hpp"

namespace bsafe::risk {

BenefitRiskTable::BenefitRiskTable(int k_decisions, std::vector<double> benefit, std::vector<double> risk,
                                   EmpiricalCovariateDistribution dist, std::vector<int> baseline_decisions,
                                   std::optional<std::size_t> draw_count)
    : k_(k_decisions),
      b_(std::move(benefit)),
      r_(std::move(risk)),
      dist_(std::move(dist)),
      baseline_(std::move(baseline_decisions)),
      draw_count_(draw_count) {
  const std::size_t n = dist_.size();
  if (k_ < 1) throw ValidationError("benefit/risk table needs at least one decision");
  if (b_.size() != n * static_cast<std::size_t>(k_) || r_.size() != b_.size())
    throw ValidationError("benefit/risk table dimensions do not match the covariate distribution");
  if (baseline_.size() != n) throw ValidationError("benefit/risk table needs one baseline decision per unit");
  for (double r : r_)
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("risk entries must lie in [0, 1]");
  for (std::size_t i = 0; i < n; ++i) {
    const int base = baseline_[i];
    if (base < 0 || base >= k_) throw ValidationError("baseline decision out of range");
    if (b_[i * static_cast<std::size_t>(k_) + base] != 0.0 || r_[i * static_cast<std::size_t>(k_) + base] != 0.0)
      throw ValidationError("baseline decision of unit " + std::to_string(i) + " must have zero benefit and risk");
  }
}

BenefitRiskTable summarize(const gp::PosteriorDrawSet& draws, const EmpiricalCovariateDistribution& dist) {
  if (draws.n_units() != dist.size())
    throw ValidationError("draw set has " + std::to_string(draws.n_units()) + " units but the distribution has " +
                          std::to_string(dist.size()) + " support points");
  const std::size_t n = draws.n_units();
  const int K = draws.k_decisions();
  const double M = static_cast<double>(draws.n_draws());
  std::vector<double> b(n * static_cast<std::size_t>(K)), r(b.size());
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) {
      const auto st = kernels::draw_stats(draws.draws(i, k));
      b[i * static_cast<std::size_t>(K) + k] = st.sum / M;
      r[i * static_cast<std::size_t>(K) + k] = static_cast<double>(st.negatives) / M;
    }
  return BenefitRiskTable(K, std::move(b), std::move(r), dist, draws.baseline_decisions(), draws.n_draws());
}

namespace {

void check_decisions(std::span<const int> decisions, std::size_t n, int K) {
  if (decisions.size() != n)
    throw ValidationError("expected " + std::to_string(n) + " decisions, got " + std::to_string(decisions.size()));
  for (int d : decisions)
    if (d < 0 || d >= K) throw ValidationError("decision " + std::to_string(d) + " out of range");
}

}  // namespace

double posterior_value(std::span<const int> decisions, const BenefitRiskTable& table) {
  check_decisions(decisions, table.n_units(), table.k_decisions());
  double v = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) v += table.weight(i) * table.benefit(i, decisions[i]);
  return v;
}

double posterior_value(const Policy& policy, const BenefitRiskTable& table) {
  const auto d = policy.apply_all(table.distribution().support());
  return posterior_value(d, table);
}

double pacrisk(std::span<const int> decisions, const BenefitRiskTable& table) {
  check_decisions(decisions, table.n_units(), table.k_decisions());
  double v = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) v += table.weight(i) * table.risk(i, decisions[i]);
  return v;
}

double pacrisk(const Policy& policy, const BenefitRiskTable& table) {
  const auto d = policy.apply_all(table.distribution().support());
  return pacrisk(d, table);
}

double pacrisk_direct(std::span<const int> decisions, const gp::PosteriorDrawSet& draws,
                      const EmpiricalCovariateDistribution& dist) {
  if (draws.n_units() != dist.size()) throw ValidationError("draw set and distribution sizes differ");
  check_decisions(decisions, draws.n_units(), draws.k_decisions());
  const auto& w = dist.weights();
  double total = 0.0;
  for (std::size_t m = 0; m < draws.n_draws(); ++m) {
    // ACRisk under the m-th posterior draw
    double acrisk = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i)
      if (draws.at(i, decisions[i], m) < 0.0) acrisk += w[i];
    total += acrisk;
  }
  return total / static_cast<double>(draws.n_draws());
}

double pacrisk_direct(const Policy& policy, const Policy& baseline, const gp::PosteriorDrawSet& draws,
                      const EmpiricalCovariateDistribution& dist) {
  if (baseline.apply_all(dist.support()) != draws.baseline_decisions())
    throw ValidationError("draw set was not computed against the given baseline policy");
  const auto d = policy.apply_all(dist.support());
  return pacrisk_direct(d, draws, dist);
}

double true_acrisk(const Policy& policy, const Policy& baseline, const OracleTau& oracle_tau,
                   const EmpiricalCovariateDistribution& dist) {
  double risk = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& x = dist.support()[i];
    const int d = policy.apply(x);
    if (d == baseline.apply(x)) continue;  // zero gain relative to itself
    if (oracle_tau(x, d) < 0.0) risk += dist.weights()[i];
  }
  return risk;
}

void write_table_csv(std::ostream& out, const BenefitRiskTable& table) {
  out << "unit,decision,b,r\n" << std::setprecision(17);
  for (std::size_t i = 0; i < table.n_units(); ++i)
    for (int k = 0; k < table.k_decisions(); ++k)
      out << i << ',' << k << ',' << table.benefit(i, k) << ',' << table.risk(i, k) << '\n';
}

}  // namespace bsafe::risk
