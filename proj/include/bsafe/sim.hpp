#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsafe/core.hpp"
#include "bsafe/gp_posterior.hpp"
#include "bsafe/risk.hpp"
#include "bsafe/rng.hpp"

namespace bsafe::sim {

// I: randomized decisions, baseline treats nobody. II: decision I(x1 > 0.5),
// which is also the baseline, so the treated and untreated regions never overlap.
enum class Scenario { I, II };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct DgpSpec {
  Scenario scenario = Scenario::I;
  OutcomeKind outcome = OutcomeKind::continuous;
  double sigma = 1.0;  // noise sd, continuous outcome
  double gamma = 1.0;  // effect scale, binary outcome
  std::size_t n = 50;

  void validate() const;
  // True when the parameters sit outside the published grids.
  bool custom() const;
};

Json dgp_to_json(const DgpSpec& s);

Policy baseline_policy(Scenario s);

// E[Y | X = x, D = d].
double conditional_mean(const DgpSpec& spec, std::span<const double> x, int d);
// Gain of decision k over the baseline decision at x.
double oracle_tau(const DgpSpec& spec, std::span<const double> x, int k);
risk::OracleTau make_oracle(const DgpSpec& spec);

Dataset generate(const DgpSpec& spec, Rng& rng);
CovariateSet draw_covariates(std::size_t n, Rng& rng);

// Mean of E[Y | X, delta(X)] over the given covariate draws.
double true_value(const Policy& policy, const DgpSpec& spec, const CovariateSet& xs);
// Same, over `samples` fresh covariates drawn from `seed`.
double true_value(const Policy& policy, const DgpSpec& spec, std::size_t samples, std::uint64_t seed);

struct SweepCell {
  DgpSpec dgp;
  double length_scale = 1.0;
  double sigma0sq = 4.0;
};

struct SweepConfig {
  std::vector<SweepCell> cells;
  std::vector<double> epsilons;
  int replications = 200;
  std::size_t draws = 1000;
  int burn_in = 500;
  int chains = 2;
  std::size_t mc_samples = 100000;
  int threads = 1;

  void validate() const;
};

struct ReplicationRow {
  std::size_t cell = 0;
  int replication = 0;
  double epsilon = 0.0;
  double posterior_gain = 0.0;
  double pacrisk = 0.0;
  double true_value = 0.0;
  double true_acrisk = 0.0;
  bool is_baseline = false;  // learned labeling equals the baseline on the sample
  LinearThreshold rule;
  std::string error;  // nonempty when the estimator failed for this replication
};

struct Aggregate {
  std::size_t cell = 0;
  double epsilon = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
  double mean_value = 0.0;
  double se_value = 0.0;
  double mean_acrisk = 0.0;
  double se_acrisk = 0.0;
  double q90_acrisk = 0.0;
  double mean_gain = 0.0;
};

struct ReplicationReport {
  SweepConfig config;
  std::uint64_t seed = 0;
  std::vector<ReplicationRow> rows;

  std::vector<Aggregate> aggregates() const;
  // Rows of one (cell, epsilon) in replication order.
  std::vector<const ReplicationRow*> select(std::size_t cell, double epsilon) const;
};

// For each cell and replication: simulate, fit the GP, summarize, solve the
// linear class at every epsilon, and score the result against the truth.
ReplicationReport run_sweep(const SweepConfig& config, std::uint64_t seed);

void write_rows_csv(std::ostream& out, const ReplicationReport& r);
void write_aggregates_csv(std::ostream& out, const ReplicationReport& r);
// Series behind the value / ACRisk / 90th percentile versus epsilon plots.
void write_plot_data(const std::filesystem::path& dir, const ReplicationReport& r);

Json sweep_config_to_json(const SweepConfig& c);

}  // namespace bsafe::sim
