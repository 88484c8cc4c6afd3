#include <cmath>
#include <sstream>

#include "bsafe/error.hpp"
#include "bsafe/sim.hpp"
#include "doctest.h"

using namespace bsafe;
using namespace bsafe::sim;

namespace {

class BothPositive : public DecisionRule {
 public:
  int decide(std::span<const double> x) const override { return x[0] > 0.0 && x[1] > 0.0 ? 1 : 0; }
  std::size_t dimension() const override { return 2; }
  Json to_json() const override { return Json{{"rule", "both_positive"}}; }
};

// Midpoint rule for E[X1 + X2 + 2|X1||X2| I(X1 > 0, X2 > 0)] over U(-1, 1)^2.
double quadrature_oracle(int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = -1.0 + (i + 0.5) * 2.0 / n, b = -1.0 + (j + 0.5) * 2.0 / n;
      s += a + b + (a > 0 && b > 0 ? 2.0 * a * b : 0.0);
    }
  return s / (static_cast<double>(n) * n);
}

}  // namespace

TEST_CASE("oracle effects in scenario I") {
  DgpSpec spec;
  const std::vector<double> a{0.5, 0.5}, b{-0.5, 0.5}, c{0.0, 0.7};
  CHECK(oracle_tau(spec, a, 1) == doctest::Approx(0.5));
  CHECK(oracle_tau(spec, b, 1) == doctest::Approx(-0.5));
  CHECK(oracle_tau(spec, c, 1) == 0.0);
  CHECK(oracle_tau(spec, a, 0) == 0.0);
}

TEST_CASE("scenario II assigns exactly the units with x1 above one half") {
  DgpSpec spec;
  spec.scenario = Scenario::II;
  spec.n = 500;
  Rng rng(3);
  const Dataset d = generate(spec, rng);
  std::size_t treated = 0, above = 0;
  for (const auto& u : d.units()) {
    treated += u.decision == 1;
    above += u.covariates[0] > 0.5;
    CHECK(u.decision == (u.covariates[0] > 0.5 ? 1 : 0));
  }
  CHECK(treated == above);
}

TEST_CASE("scenario I randomizes and binary outcomes are 0/1") {
  DgpSpec spec;
  spec.outcome = OutcomeKind::binary;
  spec.n = 2000;
  Rng rng(4);
  const Dataset d = generate(spec, rng);
  double treated = 0;
  for (const auto& u : d.units()) {
    treated += u.decision;
    CHECK((u.outcome == 0.0 || u.outcome == 1.0));
  }
  CHECK(std::abs(treated / 2000.0 - 0.5) < 0.05);
}

TEST_CASE("true values against analytic integrals") {
  DgpSpec spec;
  const std::size_t samples = 200000;
  const double base = true_value(baseline_policy(Scenario::I), spec, samples, 11);
  // sd of X1 + X2 is sqrt(2/3)
  CHECK(std::abs(base) < 3.0 * std::sqrt(2.0 / 3.0 / samples));
  const double oracle_integral = quadrature_oracle(2000);
  CHECK(oracle_integral == doctest::Approx(0.125).epsilon(1e-4));
  const Policy best = Policy::table_pipeline(std::make_shared<BothPositive>());
  CHECK(std::abs(true_value(best, spec, samples, 11) - oracle_integral) < 0.01);
  DgpSpec noisy = spec;
  noisy.sigma = 3.0;
  CHECK(true_value(best, noisy, samples, 11) == true_value(best, spec, samples, 11));
}

TEST_CASE("dgp validation") {
  DgpSpec spec;
  spec.n = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = DgpSpec{};
  spec.sigma = -1.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("small sweep is deterministic and consistent") {
  SweepConfig cfg;
  SweepCell cell;
  cell.dgp.n = 30;
  cfg.cells = {cell};
  cfg.epsilons = {0.0, 0.1, 1.0};
  cfg.replications = 4;
  cfg.draws = 200;
  cfg.burn_in = 50;
  cfg.mc_samples = 2000;
  const auto a = run_sweep(cfg, 5);
  const auto b = run_sweep(cfg, 5);
  REQUIRE(a.rows.size() == 12);
  std::ostringstream sa, sb;
  write_rows_csv(sa, a);
  write_rows_csv(sb, b);
  CHECK(sa.str() == sb.str());
  cfg.threads = 3;
  std::ostringstream sc;
  write_rows_csv(sc, run_sweep(cfg, 5));
  CHECK(sc.str() == sa.str());

  for (const auto& row : a.rows) {
    CHECK(row.error.empty());
    CHECK(row.pacrisk <= row.epsilon + 1e-12);
    if (row.is_baseline) CHECK(row.true_acrisk == 0.0);
  }
  const auto agg = a.aggregates();
  CHECK(agg.size() == 3);
  for (const auto& g : agg) CHECK(g.count == 4);
}
