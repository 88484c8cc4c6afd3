#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "bsafe/error.hpp"
#include "bsafe/kernels.hpp"
#include "bsafe/parallel.hpp"
#include "bsafe/policy_opt.hpp"

namespace bsafe::policy_opt {

namespace {

struct Score {
  double value = 0.0;
  double risk = 0.0;
  double changed = 0.0;
};

Score operator+(Score a, const Score& b) { return {a.value + b.value, a.risk + b.risk, a.changed + b.changed}; }
Score operator-(Score a, const Score& b) { return {a.value - b.value, a.risk - b.risk, a.changed - b.changed}; }

bool better(const Score& a, const Score& b) {
  if (a.value > b.value + kFeasibilityTolerance) return true;
  if (a.value < b.value - kFeasibilityTolerance) return false;
  return a.changed < b.changed - 0.5;
}

struct Problem {
  std::vector<double> x1, x2;
  std::vector<double> dg, dr, dc;  // per-unit change when switching from 0 to 1
  Score zero;                      // everyone on decision 0
  Score total;                     // sum of the per-unit changes
  double epsilon = 0.0;
  double tol = 0.0;                // on-line tolerance for unit normals
};

struct Best {
  std::optional<LinearThreshold> rule;
  std::vector<int> labels;
  Score score;
  std::size_t candidates = 0;
  std::size_t verify_failures = 0;
};

std::vector<int> labels_of(const Problem& p, const LinearThreshold& r) {
  std::vector<int> out(p.x1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (r.a * p.x1[i] + r.b * p.x2[i]) + r.c > 0.0 ? 1 : 0;
  return out;
}

Score score_of(const Problem& p, const std::vector<int>& labels) {
  Score s = p.zero;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) s = s + Score{p.dg[i], p.dr[i], p.dc[i]};
  return s;
}

// Scores a concrete rule exactly and keeps it if feasible and better. With
// `expected`, the rule must reproduce that labeling.
void offer(const Problem& p, Best& best, const LinearThreshold& r, const std::vector<int>* expected = nullptr) {
  auto labels = labels_of(p, r);
  if (expected && labels != *expected) {
    ++best.verify_failures;
    return;
  }
  const Score s = score_of(p, labels);
  if (s.risk > p.epsilon + kFeasibilityTolerance) return;
  if (!best.rule || better(s, best.score)) {
    best.rule = r;
    best.labels = std::move(labels);
    best.score = s;
  }
}

bool worth_building(const Problem& p, const Best& best, const Score& s) {
  return s.risk <= p.epsilon + kFeasibilityTolerance && (!best.rule || better(s, best.score));
}

struct LinePoint {
  std::size_t index;
  double t;  // coordinate along the line
};

// Line through points i and j with unit normal (a, b). Each side may take
// label 1, and the points on the line may be split at any gap along it; every
// such labeling is realized by a slight shift or rotation of the line.
void pair_candidates(const Problem& p, std::size_t i, std::size_t j, Best& best) {
  const std::size_t n = p.x1.size();
  const double ux = p.x1[j] - p.x1[i], uy = p.x2[j] - p.x2[i];
  const double len = std::hypot(ux, uy);
  if (len == 0.0) return;
  const double tx = ux / len, ty = uy / len;
  const double a = -ty, b = tx, c = -(a * p.x1[i] + b * p.x2[i]);
  const auto hs = kernels::halfplane_sums(p.x1, p.x2, a, b, c, p.tol, p.dg, p.dr, p.dc);

  std::vector<LinePoint> line;
  if (hs.on_line == 2) {
    line = {{i, tx * p.x1[i] + ty * p.x2[i]}, {j, tx * p.x1[j] + ty * p.x2[j]}};
  } else {
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs((a * p.x1[k] + b * p.x2[k]) + c) <= p.tol) line.push_back({k, tx * p.x1[k] + ty * p.x2[k]});
  }
  if (line.empty()) return;
  std::sort(line.begin(), line.end(), [](const LinePoint& u, const LinePoint& v) { return u.t < v.t; });
  // group coincident positions; prefix[g] sums the first g groups
  std::vector<std::size_t> group_end;
  std::vector<Score> prefix{Score{}};
  for (std::size_t k = 0; k < line.size(); ++k) {
    const std::size_t u = line[k].index;
    if (k > 0 && line[k].t - line[k - 1].t > p.tol) {
      group_end.push_back(k);
      prefix.push_back(prefix.back());
    }
    if (k == 0) prefix.push_back(Score{});
    prefix.back() = prefix.back() + Score{p.dg[u], p.dr[u], p.dc[u]};
  }
  group_end.push_back(line.size());
  const std::size_t G = group_end.size();
  const Score on = prefix.back();
  const Score positive{hs.s0, hs.s1, hs.s2};
  const Score negative = p.total - positive - on;

  for (int orient : {1, -1}) {
    const Score side = p.zero + (orient > 0 ? positive : negative);
    // prefix_ones: the first g groups take label 1, otherwise the last G - g do
    for (int prefix_ones : {1, 0}) {
      for (std::size_t g = 0; g <= G; ++g) {
        if (!prefix_ones && (g == 0 || g == G)) continue;  // same as the all/none cases above
        ++best.candidates;
        const Score sel = prefix_ones ? prefix[g] : on - prefix[g];
        const Score s = side + sel;
        if (!worth_building(p, best, s)) continue;

        // intended labeling
        std::vector<int> want(n);
        double delta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
          const double v = orient * ((a * p.x1[k] + b * p.x2[k]) + c);
          want[k] = v > p.tol ? 1 : 0;
          if (std::abs(v) > p.tol) delta = std::min(delta, std::abs(v));
        }
        if (!std::isfinite(delta)) delta = 1.0;
        for (std::size_t q = 0; q < line.size(); ++q) {
          const std::size_t grp =
              static_cast<std::size_t>(std::upper_bound(group_end.begin(), group_end.end(), q) - group_end.begin());
          want[line[q].index] = (grp < g) == (prefix_ones == 1) ? 1 : 0;
        }
        LinearThreshold r{orient * a, orient * b, orient * c};
        if (g == 0 || g == G) {
          const bool all_one = (g == G) == (prefix_ones == 1);
          r.c += all_one ? 0.5 * delta : -0.5 * delta;
        } else {
          const double split = 0.5 * (line[group_end[g - 1] - 1].t + line[group_end[g - 1]].t);
          double reach = 0.0;
          for (std::size_t k = 0; k < n; ++k) reach = std::max(reach, std::abs(tx * p.x1[k] + ty * p.x2[k] - split));
          // rotate about the split point; positive side of the turn gets label 1
          const double theta = 0.5 * delta / reach * (prefix_ones ? -1.0 : 1.0);
          r.a += theta * tx;
          r.b += theta * ty;
          r.c -= theta * split;
        }
        offer(p, best, r, &want);
      }
    }
  }
}

// Thresholds on one coordinate at midpoints between consecutive distinct values.
void axis_candidates(const Problem& p, Best& best) {
  for (int axis : {0, 1}) {
    std::vector<double> v = axis == 0 ? p.x1 : p.x2;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double mid = 0.5 * (v[k] + v[k + 1]);
      for (double sgn : {1.0, -1.0}) {
        ++best.candidates;
        offer(p, best, axis == 0 ? LinearThreshold{sgn, 0.0, -sgn * mid} : LinearThreshold{0.0, sgn, -sgn * mid});
      }
    }
  }
}

void merge(Best& into, Best&& from) {
  into.candidates += from.candidates;
  into.verify_failures += from.verify_failures;
  if (from.rule && (!into.rule || better(from.score, into.score))) {
    into.rule = from.rule;
    into.labels = std::move(from.labels);
    into.score = from.score;
  }
}

}  // namespace

OptimizationResult solve_linear(const risk::BenefitRiskTable& table, double epsilon, const LinearOptions& opts) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ValidationError("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
  if (table.k_decisions() != 2) throw ValidationError("linear policy class requires exactly two decisions");
  const auto& support = table.distribution().support();
  const std::size_t n = table.n_units();
  for (const auto& x : support)
    if (x.size() != 2)
      throw ValidationError("linear policy class requires exactly 2 covariates, got " + std::to_string(x.size()));

  Problem p;
  p.epsilon = epsilon;
  double extent = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = table.weight(i);
    const int base = table.baseline_decisions()[i];
    p.x1.push_back(support[i][0]);
    p.x2.push_back(support[i][1]);
    p.dg.push_back(w * (table.benefit(i, 1) - table.benefit(i, 0)));
    p.dr.push_back(w * (table.risk(i, 1) - table.risk(i, 0)));
    p.dc.push_back(base == 0 ? 1.0 : -1.0);
    p.zero = p.zero + Score{w * table.benefit(i, 0), w * table.risk(i, 0), base == 1 ? 1.0 : 0.0};
    p.total = p.total + Score{p.dg.back(), p.dr.back(), p.dc.back()};
    extent = std::max({extent, std::abs(support[i][0]), std::abs(support[i][1])});
  }
  p.tol = 1e-10 * (1.0 + extent);

  Best seed;
  offer(p, seed, LinearThreshold{0.0, 0.0, -1.0});
  offer(p, seed, LinearThreshold{0.0, 0.0, 1.0});
  for (const auto& r : opts.extra_candidates) offer(p, seed, r);
  seed.candidates += 2 + opts.extra_candidates.size();
  axis_candidates(p, seed);

  std::vector<Best> blocks(n);
  parallel_for(n, resolve_threads(opts.threads), [&](std::size_t i) {
    Best b;
    b.rule = seed.rule;
    b.labels = seed.labels;
    b.score = seed.score;
    for (std::size_t j = i + 1; j < n; ++j) pair_candidates(p, i, j, b);
    blocks[i] = std::move(b);
  });
  Best best = std::move(seed);
  for (auto& b : blocks) merge(best, std::move(b));

  OptimizationResult r;
  r.epsilon = epsilon;
  if (!best.rule) {
    // nothing feasible in the class; report the all-0 rule as infeasible
    best.rule = LinearThreshold{0.0, 0.0, -1.0};
    best.labels = labels_of(p, *best.rule);
    best.score = score_of(p, best.labels);
  }
  r.policy = Policy::linear(best.rule->a, best.rule->b, best.rule->c);
  r.decisions = best.labels;
  r.posterior_value_gain = best.score.value;
  r.pacrisk = best.score.risk;
  r.feasible = best.score.risk <= epsilon + kFeasibilityTolerance;
  r.certified = r.feasible && best.verify_failures == 0;
  r.diagnostics = Json{{"method", "exhaustive_lines"},
                       {"candidates", best.candidates},
                       {"verify_failures", best.verify_failures},
                       {"changed_units", static_cast<long>(std::lround(best.score.changed))},
                       {"kernel", kernels::to_string(kernels::active_isa())}};
  return r;
}

}  // namespace bsafe::policy_opt
