#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bsafe/gp_posterior.hpp"
#include "bsafe/rng.hpp"

namespace bsafe::gp::detail {

// Shared geometry of one fit: the deduplicated union of training and query
// points, and the prior factors needed for pathwise conditioning.
struct Design {
  CovariateSet points;                 // unique training and query points
  std::vector<Eigen::Index> train_at;  // union index of each observation
  std::vector<Eigen::Index> query_at;  // union index of each query point
  std::vector<int> decision;           // per observation
  Eigen::VectorXd y;
  int levels = 0;

  std::vector<Eigen::MatrixXd> prior_chol;  // lower factor of K_d(U, U) + jitter
  std::vector<Eigen::MatrixXd> cross;       // K_d(U, X) with columns d > D_j zeroed
  Eigen::MatrixXd observed_cov;             // Cov(eta) with eta_j = sum_{d<=D_j} f_d(x_j)
  Eigen::VectorXd observed_mean;
};

Design build_design(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query);

// One joint prior draw of every level at the union points (columns = levels).
Eigen::MatrixXd prior_draw(const Design& design, double prior_mean, Rng& rng);

// eta_j = sum_{d<=D_j} f_d(x_j) for a (points x levels) matrix of level values.
Eigen::VectorXd observed_sum(const Design& design, const Eigen::MatrixXd& f);

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng);

}  // namespace bsafe::gp::detail
