#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "bsafe/error.hpp"
#include "bsafe/gp_posterior.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bsafe;

namespace {

// General Matern form with the modified Bessel function of the second kind.
double matern_bessel(double d, double nu, double l, double var) {
  if (d == 0.0) return var;
  const double s = std::sqrt(2.0 * nu) * d / l;
  return var * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(s, nu) * std::cyl_bessel_k(nu, s);
}

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Dataset make_data(const CovariateSet& xs, const std::vector<int>& d, const std::vector<double>& y, int k,
                  OutcomeKind kind) {
  std::vector<Unit> units;
  for (std::size_t i = 0; i < xs.size(); ++i) units.push_back(Unit{xs[i], d[i], y[i]});
  return Dataset(std::move(units), k, kind);
}

}  // namespace

TEST_CASE("matern 3/2 matches the Bessel form") {
  gp::MaternKernelParams p{1.0, 1.0};
  const std::vector<double> o{0.0}, one{1.0};
  CHECK(gp::matern32(o, one, p) == doctest::Approx(matern_bessel(1.0, 1.5, 1.0, 1.0)).epsilon(1e-12));
  CHECK(gp::matern32(o, one, p) == doctest::Approx(0.48335).epsilon(1e-4));
  CHECK(gp::matern32(one, one, gp::MaternKernelParams{0.3, 2.5}) == 2.5);
  const std::vector<double> far{100.0};
  CHECK(gp::matern32(o, far, p) < 1e-60);

  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = testing::random_points(1, 3, rng)[0], b = testing::random_points(1, 3, rng)[0];
    const gp::MaternKernelParams q{0.2 + 2 * uniform01(rng), 0.5 + 4 * uniform01(rng)};
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(gp::matern32(a, b, q) ==
          doctest::Approx(matern_bessel(std::sqrt(d2), 1.5, q.length_scale, q.variance)).epsilon(1e-10));
  }
}

TEST_CASE("probabilistic lipschitz bound") {
  const auto b = gp::probabilistic_lipschitz_bound(gp::MaternKernelParams{1.0, 4.0}, 0.0, 10.95);
  CHECK(b.raw == doctest::Approx(12.0 / (10.95 * 10.95)).epsilon(1e-12));
  CHECK(std::abs(b.clamped - 0.100) <= 0.002);
  const auto twice = gp::probabilistic_lipschitz_bound(gp::MaternKernelParams{1.0, 8.0}, 0.0, 10.95);
  CHECK(twice.raw == doctest::Approx(2.0 * b.raw).epsilon(1e-12));
  CHECK(gp::probabilistic_lipschitz_bound(gp::MaternKernelParams{1.0, 4.0}, 0.0, 1e6).raw < 1e-10);
  CHECK(gp::probabilistic_lipschitz_bound(gp::MaternKernelParams{1.0, 4.0}, 0.0, 0.1).clamped == 1.0);
}

TEST_CASE("a level without observations keeps its prior") {
  Rng rng(4);
  const auto xs = testing::random_points(10, 1, rng);
  std::vector<double> y(10);
  for (auto& v : y) v = uniform01(rng);
  const Dataset data = make_data(xs, std::vector<int>(10, 0), y, 2, OutcomeKind::continuous);
  auto spec = gp::GpModelSpec::defaults(2, gp::Link::identity);
  spec.burn_in = 50;
  const std::size_t M = 4000;
  const CovariateSet query{{0.3}};
  const auto latent = gp::sample_latent_continuous(data, spec, query, M, 17);
  const double mean = latent.f[1].row(0).mean();
  CHECK(std::abs(mean) <= 3.0 * 2.0 / std::sqrt(static_cast<double>(M)));
}

TEST_CASE("near-noiseless fit interpolates the observations") {
  const CovariateSet xs{{-0.8}, {-0.3}, {0.1}, {0.4}, {0.9}};
  const std::vector<double> y{0.5, -0.2, 1.0, 0.3, -0.7};
  const Dataset data = make_data(xs, std::vector<int>(5, 0), y, 2, OutcomeKind::continuous);
  auto spec = gp::GpModelSpec::defaults(2, gp::Link::identity);
  spec.fixed_noise_variance = 1e-8;
  const auto latent = gp::sample_latent_continuous(data, spec, xs, 400, 3);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(latent.f[0].row(i).mean() - y[i]) < 1e-3);
}

TEST_CASE("continuous posterior mean matches exact conditioning") {
  Rng rng(8);
  const std::size_t n = 15;
  const auto xs = testing::random_points(n, 2, rng);
  const auto d = testing::random_decisions(n, 2, rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = xs[i][0] + d[i] * xs[i][1] + 0.3 * (2 * uniform01(rng) - 1);
  const Dataset data = make_data(xs, d, y, 2, OutcomeKind::continuous);
  auto spec = gp::GpModelSpec::defaults(2, gp::Link::identity);
  const double s2 = 0.25;
  spec.fixed_noise_variance = s2;
  const CovariateSet query{{0.2, -0.1}, {-0.5, 0.6}};
  const std::size_t M = 20000;
  const auto latent = gp::sample_latent_continuous(data, spec, query, M, 5);

  // eta = A f stacked over levels; joint Gaussian algebra on the naive scale
  const gp::MaternKernelParams p = spec.levels[0];
  Eigen::MatrixXd Kxx = gp::gram(xs, xs, p), Kqx = gp::gram(query, xs, p), Kqq = gp::gram(query, query, p);
  Eigen::MatrixXd C = Kxx;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) C(i, j) += (d[i] >= 1 && d[j] >= 1) ? Kxx(i, j) : 0.0;
  C.diagonal().array() += s2;
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd alpha = C.ldlt().solve(yv);
  for (int lvl = 0; lvl < 2; ++lvl) {
    Eigen::MatrixXd cross = Kqx;
    if (lvl == 1)
      for (std::size_t j = 0; j < n; ++j)
        if (d[j] < 1) cross.col(static_cast<Eigen::Index>(j)).setZero();
    const Eigen::VectorXd mean = cross * alpha;
    const Eigen::MatrixXd cov = Kqq - cross * C.ldlt().solve(cross.transpose());
    for (int q = 0; q < 2; ++q) {
      const double se = std::sqrt(cov(q, q) / static_cast<double>(M));
      CHECK(std::abs(latent.f[lvl].row(q).mean() - mean(q)) < 4.0 * se + 1e-6);
      const double var = (latent.f[lvl].row(q).array() - latent.f[lvl].row(q).mean()).square().mean();
      CHECK(var == doctest::Approx(cov(q, q)).epsilon(0.05));
    }
  }
}

TEST_CASE("identity link with always-0 baseline gives tau_1 = f_1") {
  Rng rng(6);
  const auto xs = testing::random_points(8, 2, rng);
  std::vector<double> y(8);
  for (auto& v : y) v = uniform01(rng);
  const Dataset data = make_data(xs, testing::random_decisions(8, 2, rng), y, 2, OutcomeKind::continuous);
  auto spec = gp::GpModelSpec::defaults(2, gp::Link::identity);
  spec.burn_in = 20;
  const auto latent = gp::sample_latent_continuous(data, spec, xs, 50, 9);
  const auto tau = gp::effect_draws(latent, gp::Link::identity, spec.utility, std::vector<int>(8, 0), 9);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t m = 0; m < 50; ++m) {
      CHECK(tau.at(i, 0, m) == 0.0);
      CHECK(tau.at(i, 1, m) == doctest::Approx(latent.f[1](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m))));
    }
}

TEST_CASE("zero latent draws give zero effects under the logit link") {
  gp::LatentDraws z;
  z.f.assign(3, Eigen::MatrixXd::Zero(4, 6));
  const auto tau = gp::effect_draws(z, gp::Link::logit, UtilitySpec{}, {0, 1, 2, 0}, 1);
  for (double v : tau.raw()) CHECK(v == 0.0);
}

TEST_CASE("one positive binary observation tilts the success probability up") {
  const Dataset data = make_data({{0.0}}, {0}, {1.0}, 2, OutcomeKind::binary);
  const auto spec = gp::GpModelSpec::defaults(2, gp::Link::logit);
  const auto latent = gp::sample_latent_binary(data, spec, {{0.0}}, 4000, 2);
  double p = 0.0;
  for (Eigen::Index m = 0; m < latent.f[0].cols(); ++m) p += expit(latent.f[0](0, m));
  CHECK(p / 4000.0 > 0.5);
}

TEST_CASE("binary posterior effects agree with a long Metropolis reference") {
  Rng rng(31);
  const std::size_t n = 12;
  CovariateSet xs;
  std::vector<int> d;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / (n - 1);
    xs.push_back({x});
    d.push_back(static_cast<int>(i % 2));
    y.push_back(uniform01(rng) < expit(0.5 * x + d.back() * x) ? 1.0 : 0.0);
  }
  const Dataset data = make_data(xs, d, y, 2, OutcomeKind::binary);
  const auto spec = gp::GpModelSpec::defaults(2, gp::Link::logit, gp::MaternKernelParams{1.0, 1.0});
  const auto draws = gp::fit_gp_binary(data, spec, xs, Policy::per_unit(xs, std::vector<int>(n, 0)), 4000, 12);

  // pCN reference over (f_0, f_1) at the training points
  Eigen::MatrixXd Kxx = gp::gram(xs, xs, spec.levels[0]);
  Kxx.diagonal().array() += spec.jitter * spec.levels[0].variance;
  const Eigen::MatrixXd L = Kxx.llt().matrixL();
  std::normal_distribution<double> z;
  auto prior = [&](Rng& r) {
    Eigen::VectorXd e(2 * n);
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = z(r);
    Eigen::VectorXd f(2 * n);
    f.head(n) = L * e.head(n);
    f.tail(n) = L * e.tail(n);
    return f;
  };
  auto loglik = [&](const Eigen::VectorXd& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = f(i) + (d[i] == 1 ? f(n + i) : 0.0);
      s += y[i] > 0.5 ? std::log(expit(eta)) : std::log(expit(-eta));
    }
    return s;
  };
  Rng mh(99);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * n);
  double ll = loglik(f);
  const double beta = 0.25;
  const int burn = 20000, iters = 400000;
  Eigen::VectorXd tau_sum = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < burn + iters; ++it) {
    const Eigen::VectorXd prop = std::sqrt(1 - beta * beta) * f + beta * prior(mh);
    const double lp = loglik(prop);
    if (std::log(uniform01(mh)) < lp - ll) {
      f = prop;
      ll = lp;
    }
    if (it >= burn)
      for (std::size_t i = 0; i < n; ++i) tau_sum(i) += expit(f(i) + f(n + i)) - expit(f(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (double v : draws.draws(i, 1)) mean += v;
    mean /= static_cast<double>(draws.n_draws());
    CHECK(std::abs(mean - tau_sum(i) / iters) < 0.05);
  }
}

TEST_CASE("fits are deterministic in the seed") {
  Rng rng(12);
  const auto xs = testing::random_points(20, 2, rng);
  std::vector<double> y(20);
  for (auto& v : y) v = uniform01(rng);
  const Dataset data = make_data(xs, testing::random_decisions(20, 2, rng), y, 2, OutcomeKind::continuous);
  auto spec = gp::GpModelSpec::defaults(2, gp::Link::identity);
  spec.burn_in = 30;
  const auto a = gp::fit_gp(data, spec, xs, Policy::linear(0, 0, -1), 100, 77);
  const auto b = gp::fit_gp(data, spec, xs, Policy::linear(0, 0, -1), 100, 77);
  const auto c = gp::fit_gp(data, spec, xs, Policy::linear(0, 0, -1), 100, 78);
  CHECK(a == b);
  CHECK_FALSE(a.raw() == c.raw());
}

TEST_CASE("draw files round trip exactly") {
  Rng rng(13);
  const auto d = testing::random_draws(7, 3, 11, rng);
  std::stringstream csv, bin;
  gp::write_draws_csv(csv, d);
  CHECK(gp::read_draws_csv(csv) == d);
  gp::write_draws_binary(bin, d);
  CHECK(gp::read_draws_binary(bin) == d);
}

TEST_CASE("model spec json round trip and validation") {
  auto spec = gp::GpModelSpec::defaults(3, gp::Link::identity, gp::MaternKernelParams{0.5, 2.0});
  const Json j = gp::spec_to_json(spec);
  CHECK(gp::spec_to_json(gp::spec_from_json(j, 3)) == j);
  Json bad = j;
  bad["unknown_key"] = 1;
  CHECK_THROWS_AS(gp::spec_from_json(bad, 3), Error);
  CHECK_THROWS_AS((gp::MaternKernelParams{-1.0, 1.0}.validate()), Error);
}
