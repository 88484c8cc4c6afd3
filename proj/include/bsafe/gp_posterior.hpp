#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bsafe/core.hpp"

namespace bsafe::gp {

// Matern kernel with smoothness fixed at nu = 3/2.
struct MaternKernelParams {
  static constexpr double nu = 1.5;
  double length_scale = 1.0;
  double variance = 4.0;  // sigma_0^2

  void validate() const;
};

// sigma_0^2 (1 + sqrt(3) d / l) exp(-sqrt(3) d / l), d = |x1 - x2|.
double matern32(std::span<const double> x1, std::span<const double> x2, const MaternKernelParams& params);

Eigen::MatrixXd gram(const CovariateSet& a, const CovariateSet& b, const MaternKernelParams& params);

// Upper bound on P(|f(x1) - f(x2)| > c2 |x1 - x2|) implied by a GP prior whose
// mean is c1-Lipschitz.
struct LipschitzBound {
  double raw = 0.0;
  double clamped = 0.0;  // raw clipped to [0, 1]
};

LipschitzBound probabilistic_lipschitz_bound(const MaternKernelParams& params, double mean_lipschitz,
                                             double threshold);

enum class Link { identity, logit };

struct InverseGammaPrior {
  double shape = 1.0;
  double scale = 1.0;
};

// Sequential-difference model Y(k) = sum_{d<=k} f_d(X) + noise (identity link)
// or Y(k) ~ Bernoulli(expit(sum_{d<=k} f_d(X))) (logit link), one GP per level.
struct GpModelSpec {
  std::vector<MaternKernelParams> levels;
  double prior_mean = 0.0;
  InverseGammaPrior noise_prior;
  std::optional<double> fixed_noise_variance;  // pins sigma^2 and skips its update
  Link link = Link::identity;
  UtilitySpec utility;
  int chains = 2;
  int burn_in = 500;
  double jitter = 1e-8;  // relative to each level's sigma_0^2

  static GpModelSpec defaults(int k_decisions, Link link, MaternKernelParams params = {});
  void validate(int k_decisions, OutcomeKind kind) const;
};

Json spec_to_json(const GpModelSpec& spec);
// `k_decisions` expands a single kernel block to every level.
GpModelSpec spec_from_json(const Json& j, int k_decisions);

// Draws of the latent level functions at the query points.
struct LatentDraws {
  std::vector<Eigen::MatrixXd> f;        // one (n_query x M) matrix per level
  std::vector<double> noise_variance;    // per draw; empty for the logit link

  std::size_t levels() const { return f.size(); }
  std::size_t n_query() const { return f.empty() ? 0 : static_cast<std::size_t>(f.front().rows()); }
  std::size_t n_draws() const { return f.empty() ? 0 : static_cast<std::size_t>(f.front().cols()); }
};

// tau[i][k][m]: utility gain of decision k over the baseline decision at query
// point i under draw m. Storage is contiguous over m.
class PosteriorDrawSet {
 public:
  PosteriorDrawSet(std::size_t n_units, int k_decisions, std::size_t n_draws, std::vector<int> baseline_decisions,
                   std::uint64_t seed);

  std::size_t n_units() const { return n_units_; }
  int k_decisions() const { return k_; }
  std::size_t n_draws() const { return m_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<int>& baseline_decisions() const { return baseline_; }
  const std::optional<Policy>& baseline_policy() const { return baseline_policy_; }
  void set_baseline_policy(Policy p) { baseline_policy_ = std::move(p); }

  double& at(std::size_t i, int k, std::size_t m) { return tau_[index(i, k) + m]; }
  double at(std::size_t i, int k, std::size_t m) const { return tau_[index(i, k) + m]; }
  std::span<double> draws(std::size_t i, int k) { return {tau_.data() + index(i, k), m_}; }
  std::span<const double> draws(std::size_t i, int k) const { return {tau_.data() + index(i, k), m_}; }
  const std::vector<double>& raw() const { return tau_; }

  // Throws unless every entry is finite and baseline columns are exactly zero.
  void validate() const;

  bool operator==(const PosteriorDrawSet& o) const {
    return n_units_ == o.n_units_ && k_ == o.k_ && m_ == o.m_ && seed_ == o.seed_ && baseline_ == o.baseline_ &&
           tau_ == o.tau_;
  }

 private:
  std::size_t index(std::size_t i, int k) const { return (i * static_cast<std::size_t>(k_) + k) * m_; }

  std::size_t n_units_;
  int k_;
  std::size_t m_;
  std::vector<int> baseline_;
  std::uint64_t seed_;
  std::optional<Policy> baseline_policy_;
  std::vector<double> tau_;
};

// Latent posterior sampling. The continuous sampler alternates exact Gaussian
// conditioning of {f_k} given sigma^2 with an inverse-gamma update of sigma^2;
// the binary sampler draws from the Laplace approximation at the latent mode.
LatentDraws sample_latent_continuous(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                                     std::size_t n_draws, std::uint64_t seed);
LatentDraws sample_latent_binary(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                                 std::size_t n_draws, std::uint64_t seed);

// Converts latent draws into baseline-relative utility gains.
PosteriorDrawSet effect_draws(const LatentDraws& latent, Link link, const UtilitySpec& utility,
                              const std::vector<int>& baseline_decisions, std::uint64_t seed);

PosteriorDrawSet fit_gp_continuous(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                                   const Policy& baseline, std::size_t n_draws, std::uint64_t seed);
PosteriorDrawSet fit_gp_binary(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                               const Policy& baseline, std::size_t n_draws, std::uint64_t seed);
// Dispatches on the dataset's outcome kind.
PosteriorDrawSet fit_gp(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                        const Policy& baseline, std::size_t n_draws, std::uint64_t seed);

// Long CSV (unit,decision,draw,tau) with a leading comment carrying the
// baseline decisions and seed.
void write_draws_csv(std::ostream& out, const PosteriorDrawSet& draws);
PosteriorDrawSet read_draws_csv(std::istream& in);
// Little-endian binary: magic "BSDRAWS1", u64 n, K, M, seed, i32 baseline[n], f64 tau[n*K*M].
void write_draws_binary(std::ostream& out, const PosteriorDrawSet& draws);
PosteriorDrawSet read_draws_binary(std::istream& in);

}  // namespace bsafe::gp
