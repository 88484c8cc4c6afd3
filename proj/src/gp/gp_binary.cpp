#include <cmath>
#include <limits>

#include "bsafe/error.hpp"
#include "gp/gp_internal.hpp"

namespace bsafe::gp {

namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr double kMinCurvature = 1e-12;

double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Mode {
  Eigen::VectorXd eta;       // latent mode at the observations
  Eigen::VectorXd gradient;  // d log p(y | eta) at the mode
  Eigen::VectorXd sqrt_w;    // sqrt of the negative Hessian diagonal
  Eigen::LLT<Eigen::MatrixXd> b_factor;  // I + W^1/2 Cov W^1/2
};

double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) s += y(i) > 0.5 ? log_sigmoid(eta(i)) : log_sigmoid(-eta(i));
  return s;
}

// Newton iteration for the posterior mode of eta ~ N(mu, C), y ~ Bernoulli(expit(eta)).
Mode find_mode(const Eigen::MatrixXd& C, const Eigen::VectorXd& mu, const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd eta = mu;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  auto objective = [&](const Eigen::VectorXd& av, const Eigen::VectorXd& ev) {
    return -0.5 * av.dot(ev - mu) + log_likelihood(y, ev);
  };
  double psi = objective(a, eta);
  for (int iter = 1; iter <= kMaxNewtonIterations; ++iter) {
    Eigen::VectorXd pi = eta.unaryExpr(&sigmoid);
    Eigen::VectorXd w = (pi.array() * (1.0 - pi.array())).max(kMinCurvature);
    Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::VectorXd grad = y - pi;
    Eigen::MatrixXd B = sw.asDiagonal() * C * sw.asDiagonal();
    B.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw NumericalError("Laplace mode search: factorization failed at iteration " + std::to_string(iter));
    Eigen::VectorXd b = w.asDiagonal() * (eta - mu) + grad;
    Eigen::VectorXd a_new = b - sw.asDiagonal() * llt.solve(sw.asDiagonal() * (C * b));
    // damped step on the a-parametrization
    Eigen::VectorXd da = a_new - a;
    double step = 1.0;
    Eigen::VectorXd a_try, eta_try;
    double psi_try = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 30; ++halving) {
      a_try = a + step * da;
      eta_try = C * a_try + mu;
      psi_try = objective(a_try, eta_try);
      if (psi_try >= psi - 1e-12) break;
      step *= 0.5;
    }
    const double change = (eta_try - eta).cwiseAbs().maxCoeff();
    const double gain = psi_try - psi;
    a = a_try;
    eta = eta_try;
    psi = psi_try;
    if (std::abs(gain) < 1e-10 && change < 1e-8) {
      Mode m;
      Eigen::VectorXd p = eta.unaryExpr(&sigmoid);
      m.gradient = y - p;
      m.sqrt_w = (p.array() * (1.0 - p.array())).max(kMinCurvature).sqrt();
      Eigen::MatrixXd Bm = m.sqrt_w.asDiagonal() * C * m.sqrt_w.asDiagonal();
      Bm.diagonal().array() += 1.0;
      m.b_factor.compute(Bm);
      if (m.b_factor.info() != Eigen::Success) throw NumericalError("Laplace approximation: factorization failed at the mode");
      m.eta = eta;
      return m;
    }
  }
  throw NumericalError("Laplace mode search did not converge after " + std::to_string(kMaxNewtonIterations) +
                       " iterations");
}

}  // namespace

LatentDraws sample_latent_binary(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                                 std::size_t n_draws, std::uint64_t seed) {
  if (data.outcome_kind() != OutcomeKind::binary) throw ValidationError("binary GP fit requires a binary outcome");
  if (n_draws < 1) throw ValidationError("need at least one posterior draw");
  const detail::Design d = detail::build_design(data, spec, query);
  const auto N = static_cast<Eigen::Index>(data.size());
  const auto Q = static_cast<Eigen::Index>(query.size());
  const int K = d.levels;

  Mode mode;
  if (N > 0) mode = find_mode(d.observed_cov, d.observed_mean, d.y);

  LatentDraws out;
  out.f.assign(static_cast<std::size_t>(K), Eigen::MatrixXd(Q, static_cast<Eigen::Index>(n_draws)));
  Rng rng = make_rng(seed, {0});
  for (std::size_t m = 0; m < n_draws; ++m) {
    Eigen::MatrixXd f = detail::prior_draw(d, spec.prior_mean, rng);
    if (N > 0) {
      // Laplace posterior = Gaussian posterior under pseudo-targets
      // eta_hat + grad / w with heteroscedastic noise 1 / w.
      const Eigen::VectorXd& sw = mode.sqrt_w;
      Eigen::VectorXd rhs = sw.asDiagonal() * (mode.eta - detail::observed_sum(d, f)) +
                            mode.gradient.cwiseQuotient(sw) - detail::standard_normal(N, rng);
      const Eigen::VectorXd alpha = sw.asDiagonal() * mode.b_factor.solve(rhs);
      for (int lvl = 0; lvl < K; ++lvl) f.col(lvl).noalias() += d.cross[static_cast<std::size_t>(lvl)] * alpha;
    }
    for (int lvl = 0; lvl < K; ++lvl)
      for (Eigen::Index i = 0; i < Q; ++i)
        out.f[static_cast<std::size_t>(lvl)](i, static_cast<Eigen::Index>(m)) = f(d.query_at[static_cast<std::size_t>(i)], lvl);
  }
  return out;
}

}  // namespace bsafe::gp
