#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "bsafe/gp_posterior.hpp"
#include "bsafe/policy_opt.hpp"
#include "bsafe/risk.hpp"
#include "bsafe/tables.hpp"

// Independent reference computations shared by unit tests and the acceptance run.
namespace bsafe::testing {

using tables::DecisionTable;
using tables::GridPosetDag;
using tables::LinearExtensionState;

// Monotone iff every pair of comparable cells is ordered; checks all pairs.
inline bool monotone_all_pairs(const DecisionTable& t) {
  for (std::size_t i = 0; i < t.cell_count(); ++i)
    for (std::size_t j = 0; j < t.cell_count(); ++j) {
      const auto a = t.scores_of(i), b = t.scores_of(j);
      bool le = true;
      for (std::size_t k = 0; k < a.size(); ++k) le = le && a[k] <= b[k];
      if (le && t.at(i) > t.at(j)) return false;
    }
  return true;
}

inline std::size_t brute_force_count(const std::vector<int>& sizes, int outputs) {
  std::size_t cells = 1;
  for (int s : sizes) cells *= static_cast<std::size_t>(s);
  std::vector<int> v(cells, 1);
  std::size_t count = 0;
  for (;;) {
    count += monotone_all_pairs(DecisionTable(sizes, outputs, v)) ? 1 : 0;
    std::size_t pos = 0;
    while (pos < cells && ++v[pos] > outputs) v[pos++] = 1;
    if (pos == cells) break;
  }
  return count;
}

// Linear extensions of a DAG by filtering all permutations.
inline std::set<std::vector<std::size_t>> extensions(const GridPosetDag& dag) {
  std::vector<std::size_t> p(dag.vertex_count());
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::set<std::vector<std::size_t>> out;
  do {
    LinearExtensionState s{p, {}};
    if (is_valid(s, dag)) out.insert(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Upper tail of the chi-square distribution via the regularized gamma function.
inline double chi2_sf(double x, int df) {
  // series for the lower incomplete gamma
  const double a = df / 2.0, z = x / 2.0;
  double sum = 1.0 / a, term = sum;
  for (int n = 1; n < 1000; ++n) {
    term *= z / (a + n);
    sum += term;
  }
  const double lower = std::exp(-z + a * std::log(z) - std::lgamma(a)) * sum;
  return 1.0 - lower;
}

// Best gain over all K^n assignments with the risk evaluated from raw draws.
inline double brute_force_from_draws(const gp::PosteriorDrawSet& draws, const EmpiricalCovariateDistribution& dist,
                              double epsilon) {
  const std::size_t n = draws.n_units();
  const int K = draws.k_decisions();
  std::vector<int> d(n, 0);
  double best = -1e300;
  for (;;) {
    if (risk::pacrisk_direct(d, draws, dist) <= epsilon + policy_opt::kFeasibilityTolerance) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (double t : draws.draws(i, d[i])) mean += t;
        v += dist.weights()[i] * mean / static_cast<double>(draws.n_draws());
      }
      best = std::max(best, v);
    }
    std::size_t pos = 0;
    while (pos < n && ++d[pos] == K) d[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

}  // namespace bsafe::testing
