#include <algorithm>
#include <cmath>
#include <limits>

#include "bsafe/error.hpp"
#include "bsafe/policy_opt.hpp"

namespace bsafe::policy_opt {

namespace {

constexpr double kEnumerationLimit = 1e6;
constexpr double kDpCellLimit = 5e7;

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ValidationError("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
}

struct Totals {
  double value = 0.0;
  double risk = 0.0;
  std::size_t changed = 0;
};

Totals totals(const risk::BenefitRiskTable& t, const std::vector<int>& d) {
  Totals s;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s.value += t.weight(i) * t.benefit(i, d[i]);
    s.risk += t.weight(i) * t.risk(i, d[i]);
    s.changed += d[i] != t.baseline_decisions()[i] ? 1 : 0;
  }
  return s;
}

// Higher value wins; within tolerance fewer changed units; then the
// lexicographically smaller assignment.
bool preferred(const Totals& a, const std::vector<int>& da, const Totals& b, const std::vector<int>& db) {
  if (a.value > b.value + kFeasibilityTolerance) return true;
  if (a.value < b.value - kFeasibilityTolerance) return false;
  if (a.changed != b.changed) return a.changed < b.changed;
  return da < db;
}

OptimizationResult finish(const risk::BenefitRiskTable& t, std::vector<int> d, double epsilon, bool certified,
                          double gap, Json diagnostics) {
  const Totals s = totals(t, d);
  OptimizationResult r;
  r.policy = Policy::per_unit(t.distribution().support(), d);
  r.decisions = std::move(d);
  r.posterior_value_gain = s.value;
  r.pacrisk = s.risk;
  r.epsilon = epsilon;
  r.feasible = s.risk <= epsilon + kFeasibilityTolerance;
  r.certified = certified;
  r.duality_gap = gap;
  diagnostics["changed_units"] = s.changed;
  r.diagnostics = std::move(diagnostics);
  return r;
}

// Per-unit argmax of b - lambda r. Near-ties go to the lower risk, then the
// baseline, then the lowest decision index.
std::vector<int> relaxed(const risk::BenefitRiskTable& t, double lambda, double scale) {
  const std::size_t n = t.n_units();
  const int K = t.k_decisions();
  std::vector<int> d(n);
  const double tol = kFeasibilityTolerance * scale * (1.0 + lambda);
  for (std::size_t i = 0; i < n; ++i) {
    const int base = t.baseline_decisions()[i];
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) best = std::max(best, t.benefit(i, k) - lambda * t.risk(i, k));
    int pick = -1;
    for (int k = 0; k < K; ++k) {
      if (t.benefit(i, k) - lambda * t.risk(i, k) < best - tol) continue;
      if (pick < 0 || t.risk(i, k) < t.risk(i, pick) ||
          (t.risk(i, k) == t.risk(i, pick) && k == base && pick != base))
        pick = k;
    }
    d[i] = pick;
  }
  return d;
}

double dual_bound(const risk::BenefitRiskTable& t, double lambda, double epsilon) {
  double g = lambda * epsilon;
  for (std::size_t i = 0; i < t.n_units(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < t.k_decisions(); ++k) best = std::max(best, t.benefit(i, k) - lambda * t.risk(i, k));
    g += t.weight(i) * best;
  }
  return g;
}

// Repeatedly applies the single-unit change with the best value per unit of
// added risk that still fits the budget.
void greedy_repair(const risk::BenefitRiskTable& t, std::vector<int>& d, double epsilon) {
  Totals s = totals(t, d);
  for (;;) {
    std::size_t bi = 0;
    int bk = -1;
    double best_ratio = -1.0, best_gain = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double w = t.weight(i);
      for (int k = 0; k < t.k_decisions(); ++k) {
        const double dv = w * (t.benefit(i, k) - t.benefit(i, d[i]));
        const double dr = w * (t.risk(i, k) - t.risk(i, d[i]));
        if (dv <= kFeasibilityTolerance || s.risk + dr > epsilon + kFeasibilityTolerance) continue;
        const double ratio = dr > 0.0 ? dv / dr : std::numeric_limits<double>::infinity();
        if (bk < 0 || ratio > best_ratio || (ratio == best_ratio && dv > best_gain)) {
          bi = i;
          bk = k;
          best_ratio = ratio;
          best_gain = dv;
        }
      }
    }
    if (bk < 0) return;
    s.value += t.weight(bi) * (t.benefit(bi, bk) - t.benefit(bi, d[bi]));
    s.risk += t.weight(bi) * (t.risk(bi, bk) - t.risk(bi, d[bi]));
    d[bi] = bk;
  }
}

// Exact DP over integer risk counts when weights are uniform and every risk
// is a multiple of 1/M. Returns false when not applicable.
bool solve_dp(const risk::BenefitRiskTable& t, double epsilon, std::vector<int>& out) {
  if (!t.distribution().uniform() || !t.draw_count()) return false;
  const std::size_t n = t.n_units();
  const int K = t.k_decisions();
  const double M = static_cast<double>(*t.draw_count());
  std::vector<long> cnt(n * static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) {
      const double c = t.risk(i, k) * M;
      if (std::abs(c - std::round(c)) > 1e-9) return false;
      cnt[i * static_cast<std::size_t>(K) + k] = std::lround(c);
    }
  // sum_i r_i / n <= eps  <=>  sum_i count_i <= eps * n * M
  const auto cap = static_cast<long>(std::floor((epsilon + kFeasibilityTolerance) * static_cast<double>(n) * M));
  if (static_cast<double>(n) * static_cast<double>(cap + 1) * K > kDpCellLimit) return false;
  const auto C = static_cast<std::size_t>(cap + 1);
  struct Cell {
    double value = -std::numeric_limits<double>::infinity();
    long changed = 0;
  };
  // best[i][c]: units i..n-1 using exactly budget <= c
  std::vector<std::vector<Cell>> best(n + 1, std::vector<Cell>(C));
  std::vector<std::vector<int>> choice(n, std::vector<int>(C, -1));
  for (auto& c : best[n]) c = Cell{0.0, 0};
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = n; i-- > 0;) {
    const int base = t.baseline_decisions()[i];
    for (std::size_t c = 0; c < C; ++c) {
      Cell top;
      int pick = -1;
      for (int k = 0; k < K; ++k) {
        const long used = cnt[i * static_cast<std::size_t>(K) + k];
        if (used > static_cast<long>(c)) continue;
        const Cell& rest = best[i + 1][c - static_cast<std::size_t>(used)];
        const Cell cand{rest.value + w * t.benefit(i, k), rest.changed + (k != base ? 1 : 0)};
        const bool better = pick < 0 || cand.value > top.value + kFeasibilityTolerance ||
                            (cand.value >= top.value - kFeasibilityTolerance && cand.changed < top.changed);
        if (better) {
          top = cand;
          pick = k;
        }
      }
      best[i][c] = top;
      choice[i][c] = pick;
    }
  }
  out.assign(n, 0);
  std::size_t c = C - 1;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = choice[i][c];
    c -= static_cast<std::size_t>(cnt[i * static_cast<std::size_t>(K) + out[i]]);
  }
  return true;
}

}  // namespace

OptimizationResult solve_per_unit_brute_force(const risk::BenefitRiskTable& t, double epsilon) {
  check_epsilon(epsilon);
  const std::size_t n = t.n_units();
  const int K = t.k_decisions();
  if (std::pow(static_cast<double>(K), static_cast<double>(n)) > kEnumerationLimit)
    throw ValidationError("instance too large for exhaustive search");
  std::vector<int> d(n, 0), best = t.baseline_decisions();
  Totals best_s = totals(t, best);
  std::size_t visited = 0;
  for (;;) {
    ++visited;
    const Totals s = totals(t, d);
    if (s.risk <= epsilon + kFeasibilityTolerance && preferred(s, d, best_s, best)) {
      best = d;
      best_s = s;
    }
    bool carry = true;
    for (std::size_t pos = n; pos-- > 0 && carry;) {
      if (++d[pos] < K)
        carry = false;
      else
        d[pos] = 0;
    }
    if (carry) break;
  }
  return finish(t, std::move(best), epsilon, true, 0.0, Json{{"method", "enumeration"}, {"assignments", visited}});
}

OptimizationResult solve_per_unit(const risk::BenefitRiskTable& t, double epsilon) {
  check_epsilon(epsilon);
  const std::size_t n = t.n_units();
  const int K = t.k_decisions();
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) scale = std::max(scale, std::abs(t.benefit(i, k)));

  // Breakpoints of the piecewise-linear dual.
  std::vector<double> lambdas{0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < K; ++j) {
        const double db = t.benefit(i, k) - t.benefit(i, j), dr = t.risk(i, k) - t.risk(i, j);
        if (db > 0.0 && dr > 0.0) lambdas.push_back(db / dr);
      }
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  auto risk_at = [&](std::size_t idx) { return totals(t, relaxed(t, lambdas[idx], scale)).risk; };
  // smallest breakpoint whose low-risk relaxed solution is feasible; the
  // largest one selects minimum-risk decisions, which include the baseline
  std::size_t lo = 0, hi = lambdas.size() - 1;
  if (risk_at(hi) > epsilon + kFeasibilityTolerance) hi = lambdas.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (risk_at(mid) <= epsilon + kFeasibilityTolerance)
      hi = mid;
    else
      lo = mid + 1;
  }
  const double lambda = lo < lambdas.size() ? lambdas[lo] : lambdas.back();
  std::vector<int> d = lo < lambdas.size() ? relaxed(t, lambda, scale) : t.baseline_decisions();
  greedy_repair(t, d, epsilon);
  const Totals s = totals(t, d);
  const double bound = dual_bound(t, lambda, epsilon);
  const double gap = std::max(0.0, bound - s.value);
  Json diag{{"lambda", lambda}, {"breakpoints", lambdas.size()}, {"dual_bound", bound}};
  if (gap <= kFeasibilityTolerance * scale) {
    diag["method"] = "lagrangian";
    return finish(t, std::move(d), epsilon, true, gap, std::move(diag));
  }

  std::vector<int> exact;
  if (solve_dp(t, epsilon, exact)) {
    diag["method"] = "dynamic_program";
    return finish(t, std::move(exact), epsilon, true, 0.0, std::move(diag));
  }
  if (std::pow(static_cast<double>(K), static_cast<double>(n)) <= kEnumerationLimit) {
    auto r = solve_per_unit_brute_force(t, epsilon);
    diag["method"] = "enumeration";
    r.diagnostics.update(diag);
    return r;
  }
  diag["method"] = "lagrangian_approximate";
  return finish(t, std::move(d), epsilon, false, gap, std::move(diag));
}

}  // namespace bsafe::policy_opt
