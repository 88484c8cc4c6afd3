#include <cmath>

#include "bsafe/error.hpp"
#include "gp/gp_internal.hpp"

namespace bsafe::gp {

LatentDraws sample_latent_continuous(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                                     std::size_t n_draws, std::uint64_t seed) {
  if (data.outcome_kind() != OutcomeKind::continuous)
    throw ValidationError("continuous GP fit requires a continuous outcome");
  if (n_draws < 1) throw ValidationError("need at least one posterior draw");
  const detail::Design d = detail::build_design(data, spec, query);
  const auto N = static_cast<Eigen::Index>(data.size());
  const auto Q = static_cast<Eigen::Index>(query.size());
  const int K = d.levels;

  // Cov(eta) = V diag(lambda) V^T, so (Cov(eta) + sigma^2 I)^{-1} is cheap for any sigma^2.
  Eigen::MatrixXd V;
  Eigen::VectorXd lambda;
  if (N > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.observed_cov);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the observation covariance failed");
    V = eig.eigenvectors();
    lambda = eig.eigenvalues().cwiseMax(0.0);
  }

  LatentDraws out;
  out.f.assign(static_cast<std::size_t>(K), Eigen::MatrixXd(Q, static_cast<Eigen::Index>(n_draws)));
  out.noise_variance.reserve(n_draws);

  const double a0 = spec.noise_prior.shape;
  const double b0 = spec.noise_prior.scale;
  double y_var = b0 / (a0 + 1.0);
  if (N > 1) {
    const double mean = d.y.mean();
    y_var = std::max((d.y.array() - mean).square().sum() / static_cast<double>(N - 1), 1e-6);
  }

  const auto chains = static_cast<std::size_t>(spec.chains);
  Eigen::Index column = 0;
  for (std::size_t c = 0; c < chains; ++c) {
    const std::size_t keep = n_draws / chains + (c < n_draws % chains ? 1 : 0);
    Rng rng = make_rng(seed, {c});
    double sigma2 = spec.fixed_noise_variance.value_or(y_var);
    const std::size_t total = static_cast<std::size_t>(spec.burn_in) + keep;
    for (std::size_t it = 0; it < total; ++it) {
      Eigen::MatrixXd f = detail::prior_draw(d, spec.prior_mean, rng);
      if (N > 0) {
        Eigen::VectorXd resid = d.y - detail::observed_sum(d, f) - std::sqrt(sigma2) * detail::standard_normal(N, rng);
        Eigen::VectorXd coeff = V.transpose() * resid;
        coeff.array() /= lambda.array() + sigma2;
        const Eigen::VectorXd alpha = V * coeff;
        for (int lvl = 0; lvl < K; ++lvl) f.col(lvl).noalias() += d.cross[static_cast<std::size_t>(lvl)] * alpha;
      }
      if (!spec.fixed_noise_variance) {
        double sse = 0.0;
        if (N > 0) sse = (d.y - detail::observed_sum(d, f)).squaredNorm();
        std::gamma_distribution<double> gamma(a0 + 0.5 * static_cast<double>(N), 1.0 / (b0 + 0.5 * sse));
        sigma2 = 1.0 / gamma(rng);
      }
      if (it >= static_cast<std::size_t>(spec.burn_in)) {
        for (int lvl = 0; lvl < K; ++lvl)
          for (Eigen::Index i = 0; i < Q; ++i)
            out.f[static_cast<std::size_t>(lvl)](i, column) = f(d.query_at[static_cast<std::size_t>(i)], lvl);
        out.noise_variance.push_back(sigma2);
        ++column;
      }
    }
  }
  return out;
}

}  // namespace bsafe::gp
