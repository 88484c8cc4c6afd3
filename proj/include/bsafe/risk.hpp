#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bsafe/core.hpp"
#include "bsafe/gp_posterior.hpp"

namespace bsafe::risk {

// Posterior conditional benefit b_k(x_i) and risk r_k(x_i) per support point,
// both relative to the baseline decision at that point.
class BenefitRiskTable {
 public:
  BenefitRiskTable(int k_decisions, std::vector<double> benefit, std::vector<double> risk,
                   EmpiricalCovariateDistribution dist, std::vector<int> baseline_decisions,
                   std::optional<std::size_t> draw_count = std::nullopt);

  std::size_t n_units() const { return dist_.size(); }
  int k_decisions() const { return k_; }
  double benefit(std::size_t i, int k) const { return b_[i * static_cast<std::size_t>(k_) + k]; }
  double risk(std::size_t i, int k) const { return r_[i * static_cast<std::size_t>(k_) + k]; }
  double weight(std::size_t i) const { return dist_.weights()[i]; }
  const EmpiricalCovariateDistribution& distribution() const { return dist_; }
  const std::vector<int>& baseline_decisions() const { return baseline_; }
  // Number of posterior draws behind r when built by summarize(); each risk is then a multiple of 1/M.
  std::optional<std::size_t> draw_count() const { return draw_count_; }

 private:
  int k_;
  std::vector<double> b_;
  std::vector<double> r_;
  EmpiricalCovariateDistribution dist_;
  std::vector<int> baseline_;
  std::optional<std::size_t> draw_count_;
};

BenefitRiskTable summarize(const gp::PosteriorDrawSet& draws, const EmpiricalCovariateDistribution& dist);

// Sum_i w_i b[i][d_i]: posterior expected value gain over the baseline.
double posterior_value(std::span<const int> decisions, const BenefitRiskTable& table);
double posterior_value(const Policy& policy, const BenefitRiskTable& table);

// Sum_i w_i r[i][d_i].
double pacrisk(std::span<const int> decisions, const BenefitRiskTable& table);
double pacrisk(const Policy& policy, const BenefitRiskTable& table);

// PACRisk as the posterior mean of the per-draw ACRisk, computed from the raw draws.
double pacrisk_direct(std::span<const int> decisions, const gp::PosteriorDrawSet& draws,
                      const EmpiricalCovariateDistribution& dist);
double pacrisk_direct(const Policy& policy, const Policy& baseline, const gp::PosteriorDrawSet& draws,
                      const EmpiricalCovariateDistribution& dist);

// Baseline-relative conditional expected utility gain of decision k at x under the true parameter.
using OracleTau = std::function<double(std::span<const double> x, int k)>;

// ACRisk at the true parameter: weighted share of support points made worse off.
double true_acrisk(const Policy& policy, const Policy& baseline, const OracleTau& oracle_tau,
                   const EmpiricalCovariateDistribution& dist);

// CSV with columns unit,decision,b,r.
void write_table_csv(std::ostream& out, const BenefitRiskTable& table);

}  // namespace bsafe::risk
