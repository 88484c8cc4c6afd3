#include <algorithm>
#include <cmath>

#include "bsafe/error.hpp"
#include "bsafe/gp_posterior.hpp"

namespace bsafe::gp {

void MaternKernelParams::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw ValidationError("Matern length scale must be positive, got " + std::to_string(length_scale));
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw ValidationError("Matern variance must be positive, got " + std::to_string(variance));
}

double matern32(std::span<const double> x1, std::span<const double> x2, const MaternKernelParams& params) {
  if (x1.size() != x2.size())
    throw ValidationError("matern32: dimension mismatch (" + std::to_string(x1.size()) + " vs " +
                          std::to_string(x2.size()) + ")");
  double sq = 0.0;
  for (std::size_t j = 0; j < x1.size(); ++j) {
    const double d = x1[j] - x2[j];
    sq += d * d;
  }
  if (!std::isfinite(sq)) throw ValidationError("matern32: non-finite input");
  const double r = std::sqrt(3.0) * std::sqrt(sq) / params.length_scale;
  return params.variance * (1.0 + r) * std::exp(-r);
}

Eigen::MatrixXd gram(const CovariateSet& a, const CovariateSet& b, const MaternKernelParams& params) {
  Eigen::MatrixXd g(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) g(i, j) = matern32(a[i], b[j], params);
  return g;
}

LipschitzBound probabilistic_lipschitz_bound(const MaternKernelParams& params, double mean_lipschitz,
                                             double threshold) {
  params.validate();
  if (!(threshold > 0.0)) throw ValidationError("Lipschitz threshold c2 must be positive");
  const double nu = MaternKernelParams::nu;
  const double c2sq = threshold * threshold;
  const double raw = params.variance * ((1.0 + 1.0 / (nu - 1.0)) / (c2sq * params.length_scale * params.length_scale) +
                                        mean_lipschitz * mean_lipschitz / c2sq);
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

}  // namespace bsafe::gp
