#include <cmath>
#include <numbers>
#include <set>

#include "bsafe/error.hpp"
#include "bsafe/policy_opt.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace bsafe;
using policy_opt::kFeasibilityTolerance;

namespace {

risk::BenefitRiskTable binary_table(const std::vector<double>& b1, const std::vector<double>& r1,
                                    CovariateSet xs = {}) {
  const std::size_t n = b1.size();
  if (xs.empty())
    for (std::size_t i = 0; i < n; ++i) xs.push_back({static_cast<double>(i)});
  std::vector<double> b, r;
  for (std::size_t i = 0; i < n; ++i) {
    b.insert(b.end(), {0.0, b1[i]});
    r.insert(r.end(), {0.0, r1[i]});
  }
  return risk::BenefitRiskTable(2, b, r, EmpiricalCovariateDistribution(std::move(xs)), std::vector<int>(n, 0));
}

// Every labeling produced by an open half-plane, found by sweeping directions.
std::set<std::vector<int>> halfplane_labelings(const CovariateSet& xs, int directions) {
  std::set<std::vector<int>> out;
  const std::size_t n = xs.size();
  std::vector<std::pair<double, std::size_t>> proj(n);
  for (int s = 0; s < directions; ++s) {
    const double th = 2.0 * std::numbers::pi * (s + 0.5) / directions;
    for (std::size_t i = 0; i < n; ++i) proj[i] = {std::cos(th) * xs[i][0] + std::sin(th) * xs[i][1], i};
    std::sort(proj.begin(), proj.end());
    for (std::size_t cut = 0; cut <= n; ++cut) {
      std::vector<int> lab(n, 0);
      for (std::size_t q = cut; q < n; ++q) lab[proj[q].second] = 1;
      out.insert(lab);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("per-unit with a vacuous budget takes the argmax benefit") {
  Rng rng(1);
  const auto draws = testing::random_draws(25, 4, 30, rng);
  const EmpiricalCovariateDistribution dist(testing::random_points(25, 2, rng));
  const auto t = risk::summarize(draws, dist);
  const auto r = policy_opt::solve_per_unit(t, 1.0);
  for (std::size_t i = 0; i < 25; ++i) {
    double best = -1e300;
    for (int k = 0; k < 4; ++k) best = std::max(best, t.benefit(i, k));
    CHECK(t.benefit(i, r.decisions[i]) == best);
  }
  CHECK(r.certified);
}

TEST_CASE("per-unit with zero budget and risky alternatives returns the baseline") {
  const auto t = binary_table({1.0, 2.0, -1.0}, {0.1, 0.5, 0.9});
  const auto r = policy_opt::solve_per_unit(t, 0.0);
  CHECK(r.decisions == std::vector<int>{0, 0, 0});
  CHECK(r.posterior_value_gain == 0.0);
}

TEST_CASE("per-unit two-unit hand instance") {
  const auto t = binary_table({2.0, 1.0}, {0.0, 1.0});
  const auto r = policy_opt::solve_per_unit(t, 0.4);
  CHECK(r.decisions == std::vector<int>{1, 0});
  CHECK(r.posterior_value_gain == 1.0);
  CHECK(r.pacrisk == 0.0);
}

TEST_CASE("per-unit matches brute force over assignments evaluated on raw draws") {
  Rng rng(44);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + uniform_index(rng, 6);
    const int K = 2 + static_cast<int>(uniform_index(rng, 2));
    const auto draws = testing::random_draws(n, K, 5 + uniform_index(rng, 40), rng);
    const EmpiricalCovariateDistribution dist(testing::random_points(n, 2, rng));
    const auto t = risk::summarize(draws, dist);
    for (double eps : {0.0, 0.1, 0.3, 1.0}) {
      const auto r = policy_opt::solve_per_unit(t, eps);
      CHECK(r.feasible);
      CHECK(std::abs(r.posterior_value_gain - testing::brute_force_from_draws(draws, dist, eps)) <= 1e-12);
      CHECK(r.pacrisk == doctest::Approx(risk::pacrisk_direct(r.decisions, draws, dist)).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-unit is exact on weighted and larger instances") {
  Rng rng(45);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 9;
    const auto draws = testing::random_draws(n, 3, 20, rng);
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& v : w) sum += (v = 0.1 + uniform01(rng));
    for (auto& v : w) v /= sum;
    const EmpiricalCovariateDistribution dist(testing::random_points(n, 2, rng), w);
    const auto t = risk::summarize(draws, dist);
    for (double eps : {0.05, 0.2}) {
      const auto r = policy_opt::solve_per_unit(t, eps);
      CHECK(r.certified);
      CHECK(std::abs(r.posterior_value_gain - testing::brute_force_from_draws(draws, dist, eps)) <= 1e-12);
    }
  }
}

TEST_CASE("per-unit gains are nondecreasing in epsilon") {
  Rng rng(46);
  const auto draws = testing::random_draws(60, 3, 50, rng);
  const auto t = risk::summarize(draws, EmpiricalCovariateDistribution(testing::random_points(60, 2, rng)));
  double prev = -1e300;
  for (double eps : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4, 1.0}) {
    const auto r = policy_opt::solve_per_unit(t, eps);
    CHECK(r.certified);
    CHECK(r.posterior_value_gain >= prev - 1e-12);
    prev = r.posterior_value_gain;
  }
}

TEST_CASE("per-unit rejects a budget outside [0, 1]") {
  const auto t = binary_table({1.0}, {0.5});
  CHECK_THROWS_AS(policy_opt::solve_per_unit(t, 1.5), ValidationError);
  CHECK_THROWS_AS(policy_opt::solve_per_unit(t, -0.1), ValidationError);
}

TEST_CASE("linear class matches the best half-plane labeling") {
  Rng rng(50);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = rep < 10 ? 6 : 9;
    const auto xs = testing::random_points(n, 2, rng);
    std::vector<double> b1(n), r1(n);
    for (std::size_t i = 0; i < n; ++i) {
      b1[i] = 2.0 * uniform01(rng) - 0.7;
      r1[i] = std::round(uniform01(rng) * 20.0) / 20.0;
    }
    const auto t = binary_table(b1, r1, xs);
    const auto labelings = halfplane_labelings(xs, 400000);
    for (double eps : {0.0, 0.05, 0.15, 1.0}) {
      double best = -1e300;
      for (const auto& lab : labelings)
        if (risk::pacrisk(lab, t) <= eps + kFeasibilityTolerance) best = std::max(best, risk::posterior_value(lab, t));
      const auto r = policy_opt::solve_linear(t, eps);
      CHECK(r.feasible);
      CHECK(r.certified);
      CHECK(std::abs(r.posterior_value_gain - best) <= 1e-12);
      CHECK(r.policy.apply_all(xs) == r.decisions);
      CHECK(labelings.count(r.decisions) == 1);
    }
  }
}

TEST_CASE("linear class handles collinear and repeated points") {
  const CovariateSet xs{{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}, {0.5, 0.5}, {-0.5, 0.2}, {0.3, -0.8}};
  const auto t = binary_table({1.0, -2.0, 1.0, -2.0, 0.5, 0.5}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, xs);
  const auto r = policy_opt::solve_linear(t, 0.0);
  // best: (0,0) and the two off-diagonal points, cut off below the duplicated pair
  CHECK(r.posterior_value_gain == doctest::Approx(2.0 / 6.0));
  CHECK(r.policy.apply_all(xs) == r.decisions);
  // labels of the duplicated point agree
  CHECK(r.decisions[1] == r.decisions[3]);
}

TEST_CASE("linear class returns the baseline when nothing can be gained") {
  Rng rng(51);
  const auto xs = testing::random_points(10, 2, rng);
  const auto t = binary_table(std::vector<double>(10, 0.0), std::vector<double>(10, 0.3), xs);
  const auto r = policy_opt::solve_linear(t, 1.0);
  CHECK(r.posterior_value_gain == 0.0);
  CHECK(r.decisions == std::vector<int>(10, 0));

  std::vector<double> b(10, 1.0);
  const auto risky = binary_table(b, std::vector<double>(10, 0.2), xs);
  const auto z = policy_opt::solve_linear(risky, 0.0);
  CHECK(z.decisions == std::vector<int>(10, 0));
}

TEST_CASE("linear class prefers a supplied baseline rule on ties") {
  Rng rng(52);
  const auto xs = testing::random_points(12, 2, rng);
  const LinearThreshold rule{1.0, 0.0, -0.5};
  const auto base = Policy::linear(rule.a, rule.b, rule.c).apply_all(xs);
  // nothing to gain anywhere: every rule ties and the baseline changes no unit
  const risk::BenefitRiskTable t(2, std::vector<double>(24, 0.0), std::vector<double>(24, 0.0),
                                 EmpiricalCovariateDistribution(xs), base);
  policy_opt::LinearOptions opts;
  opts.extra_candidates.push_back(rule);
  const auto res = policy_opt::solve_linear(t, 0.0, opts);
  const auto& got = std::get<LinearThreshold>(res.policy.payload());
  CHECK(got.a == 1.0);
  CHECK(got.b == 0.0);
  CHECK(got.c == -0.5);
  CHECK(res.decisions == base);
}

TEST_CASE("linear class requires two covariates and two decisions") {
  const auto t = binary_table({1.0, 2.0}, {0.1, 0.1});
  CHECK_THROWS_AS(policy_opt::solve_linear(t, 0.5), ValidationError);
}

TEST_CASE("linear solver is identical across thread counts") {
  Rng rng(53);
  const auto draws = testing::random_draws(40, 2, 30, rng);
  const auto t = risk::summarize(draws, EmpiricalCovariateDistribution(testing::random_points(40, 2, rng)));
  policy_opt::LinearOptions one, four;
  four.threads = 4;
  const auto a = policy_opt::solve_linear(t, 0.1, one), b = policy_opt::solve_linear(t, 0.1, four);
  CHECK(policy_to_json(a.policy) == policy_to_json(b.policy));
  CHECK(a.posterior_value_gain == b.posterior_value_gain);
}

TEST_CASE("table pipeline with zero budget keeps the baseline tables") {
  Rng rng(60);
  auto inst = testing::reduced_instance(20, 40, rng);
  tables::ShortBurstConfig mcmc{20, 10, 10, 0.5, 1};
  for (auto scope : {policy_opt::TableScope::top_table_only, policy_opt::TableScope::all_tables}) {
    const auto r = policy_opt::solve_table_pipeline(inst.table, inst.pipeline, scope, 0.0, mcmc, 3);
    CHECK(r.decisions == inst.table.baseline_decisions());
    CHECK(r.posterior_value_gain == 0.0);
    CHECK(r.diagnostics.at("changed_cells") == 0);
  }
}

TEST_CASE("table pipeline reaches the enumerated optimum on the reduced instance") {
  Rng rng(61);
  const tables::ShortBurstConfig mcmc{50, 10, 20, 0.5, 1};
  int hits = 0;
  for (int rep = 0; rep < 10; ++rep) {
    auto inst = testing::reduced_instance(20, 40, rng);
    const auto r = policy_opt::solve_table_pipeline(inst.table, inst.pipeline, policy_opt::TableScope::top_table_only,
                                                    0.2, mcmc, static_cast<std::uint64_t>(rep));
    CHECK(r.feasible);
    CHECK(r.posterior_value_gain <= testing::reduced_optimum(inst, 0.2) + 1e-12);
    hits += std::abs(r.posterior_value_gain - testing::reduced_optimum(inst, 0.2)) <= 1e-12 ? 1 : 0;
  }
  CHECK(hits >= 8);
}

TEST_CASE("table pipeline gains grow with the budget on fixed draws") {
  Rng rng(62);
  auto inst = testing::reduced_instance(20, 40, rng);
  const tables::ShortBurstConfig mcmc{50, 10, 20, 0.5, 1};
  double prev = -1e300;
  for (double eps : {0.0, 0.1, 0.2, 0.5, 1.0}) {
    const double opt = testing::reduced_optimum(inst, eps);
    const auto r = policy_opt::solve_table_pipeline(inst.table, inst.pipeline,
                                                    policy_opt::TableScope::top_table_only, eps, mcmc, 5);
    CHECK(std::abs(r.posterior_value_gain - opt) <= 1e-12);
    CHECK(opt >= prev - 1e-12);
    prev = opt;
  }
}

TEST_CASE("result json carries the policy and diagnostics") {
  const auto t = binary_table({2.0, 1.0}, {0.0, 1.0});
  const Json j = policy_opt::result_to_json(policy_opt::solve_per_unit(t, 0.4));
  CHECK(j.at("posterior_value_gain") == 1.0);
  CHECK(j.contains("policy"));
  CHECK(j.at("diagnostics").contains("method"));
}
