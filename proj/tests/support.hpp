#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "bsafe/gp_posterior.hpp"
#include "bsafe/hes.hpp"
#include "bsafe/risk.hpp"
#include "bsafe/rng.hpp"

namespace bsafe::testing {

// Random tau draws with exact zeros in the baseline column.
inline gp::PosteriorDrawSet random_draws(std::size_t n, int k, std::size_t m, Rng& rng) {
  std::vector<int> base(n);
  for (auto& b : base) b = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k)));
  gp::PosteriorDrawSet d(n, k, m, base, 0);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = z(rng);
    for (int j = 0; j < k; ++j)
      for (std::size_t s = 0; s < m; ++s) d.at(i, j, s) = j == base[i] ? 0.0 : shift + z(rng);
  }
  return d;
}

inline CovariateSet random_points(std::size_t n, std::size_t p, Rng& rng) {
  CovariateSet xs(n, Covariates(p));
  for (auto& x : xs)
    for (auto& v : x) v = 2.0 * uniform01(rng) - 1.0;
  return xs;
}

inline std::vector<int> random_decisions(std::size_t n, int k, Rng& rng) {
  std::vector<int> d(n);
  for (auto& v : d) v = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k)));
  return d;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bsafe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Two-way 3x3 table with 3 outputs over n units with random integer scores;
// the baseline is min(i, j) and each unit's tau draws are centred on a
// random shift.
struct ReducedInstance {
  risk::BenefitRiskTable table;
  hes::HesPipeline pipeline;
};

inline ReducedInstance reduced_instance(std::size_t n, std::size_t m, Rng& rng) {
  auto base = tables::DecisionTable::from_function({3, 3}, 3, [](std::span<const int> s) { return std::min(s[0], s[1]); });
  hes::HesPipeline pipeline(2, {hes::Node{"top", "t", {"x1", "x2"}}}, {{"t", base}}, hes::Rounding::half_up, 3);
  CovariateSet xs;
  std::vector<int> baseline;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back({1.0 + static_cast<double>(uniform_index(rng, 3)), 1.0 + static_cast<double>(uniform_index(rng, 3))});
    baseline.push_back(static_cast<int>(std::min(xs.back()[0], xs.back()[1])) - 1);
  }
  gp::PosteriorDrawSet draws(n, 3, m, baseline, 0);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) {
      const double shift = 0.8 * z(rng);
      for (std::size_t s = 0; s < m; ++s) draws.at(i, k, s) = k == baseline[i] ? 0.0 : shift + z(rng);
    }
  return {risk::summarize(draws, EmpiricalCovariateDistribution(xs)), std::move(pipeline)};
}

// Best feasible posterior value over every monotone replacement of the table.
inline double reduced_optimum(const ReducedInstance& inst, double epsilon) {
  double best = -1e300;
  for (const auto& t : tables::enumerate_monotone_tables({3, 3}, 3)) {
    std::vector<int> d;
    for (const auto& x : inst.table.distribution().support())
      d.push_back(t({static_cast<int>(x[0]), static_cast<int>(x[1])}) - 1);
    if (risk::pacrisk(d, inst.table) <= epsilon + 1e-12) best = std::max(best, risk::posterior_value(d, inst.table));
  }
  return best;
}

}  // namespace bsafe::testing
