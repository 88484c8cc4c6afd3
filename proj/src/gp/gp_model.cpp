#include <algorithm>
#include <cmath>
#include <map>

#include "bsafe/error.hpp"
#include "gp/gp_internal.hpp"

namespace bsafe::gp {

GpModelSpec GpModelSpec::defaults(int k_decisions, Link link, MaternKernelParams params) {
  GpModelSpec spec;
  spec.levels.assign(static_cast<std::size_t>(k_decisions), params);
  spec.link = link;
  return spec;
}

void GpModelSpec::validate(int k_decisions, OutcomeKind kind) const {
  if (static_cast<int>(levels.size()) != k_decisions)
    throw ValidationError("GP spec has " + std::to_string(levels.size()) + " kernel levels but the data has " +
                          std::to_string(k_decisions) + " decisions");
  for (const auto& l : levels) l.validate();
  if (link == Link::identity && kind != OutcomeKind::continuous)
    throw ValidationError("identity link requires a continuous outcome");
  if (link == Link::logit && kind != OutcomeKind::binary) throw ValidationError("logit link requires a binary outcome");
  if (!(noise_prior.shape > 0.0) || !(noise_prior.scale > 0.0))
    throw ValidationError("inverse-gamma noise prior needs positive shape and scale");
  if (fixed_noise_variance && !(*fixed_noise_variance > 0.0))
    throw ValidationError("fixed noise variance must be positive");
  if (chains < 1) throw ValidationError("need at least one chain");
  if (burn_in < 0) throw ValidationError("burn-in must be nonnegative");
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be nonnegative");
  if (!std::isfinite(prior_mean)) throw ValidationError("prior mean must be finite");
  utility.validate(k_decisions, kind);
}

Json spec_to_json(const GpModelSpec& spec) {
  Json levels = Json::array();
  for (const auto& l : spec.levels) levels.push_back({{"length_scale", l.length_scale}, {"variance", l.variance}});
  Json j{{"levels", levels},
         {"prior_mean", spec.prior_mean},
         {"noise_prior", {{"shape", spec.noise_prior.shape}, {"scale", spec.noise_prior.scale}}},
         {"link", spec.link == Link::identity ? "identity" : "logit"},
         {"chains", spec.chains},
         {"burn_in", spec.burn_in},
         {"jitter", spec.jitter},
         {"utility", utility_to_json(spec.utility)}};
  j["noise_variance"] = spec.fixed_noise_variance ? Json(*spec.fixed_noise_variance) : Json(nullptr);
  return j;
}

GpModelSpec spec_from_json(const Json& j, int k_decisions) {
  static const std::vector<std::string> known = {"levels",  "length_scale", "variance", "prior_mean",
                                                 "noise_prior", "noise_variance", "link", "chains",
                                                 "burn_in", "jitter", "utility"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("unknown key '" + key + "' in model config");
  GpModelSpec spec;
  const std::string link = j.value("link", std::string("identity"));
  if (link == "identity")
    spec.link = Link::identity;
  else if (link == "logit")
    spec.link = Link::logit;
  else
    throw UsageError("unknown link '" + link + "'");
  if (j.contains("levels")) {
    for (const auto& l : j.at("levels"))
      spec.levels.push_back({l.value("length_scale", 1.0), l.value("variance", 4.0)});
  } else {
    MaternKernelParams p{j.value("length_scale", 1.0), j.value("variance", 4.0)};
    spec.levels.assign(static_cast<std::size_t>(k_decisions), p);
  }
  spec.prior_mean = j.value("prior_mean", 0.0);
  if (j.contains("noise_prior")) {
    spec.noise_prior.shape = j.at("noise_prior").value("shape", 1.0);
    spec.noise_prior.scale = j.at("noise_prior").value("scale", 1.0);
  }
  if (j.contains("noise_variance") && !j.at("noise_variance").is_null())
    spec.fixed_noise_variance = j.at("noise_variance").get<double>();
  spec.chains = j.value("chains", 2);
  spec.burn_in = j.value("burn_in", 500);
  spec.jitter = j.value("jitter", 1e-8);
  if (j.contains("utility")) spec.utility = utility_from_json(j.at("utility"));
  return spec;
}

PosteriorDrawSet::PosteriorDrawSet(std::size_t n_units, int k_decisions, std::size_t n_draws,
                                   std::vector<int> baseline_decisions, std::uint64_t seed)
    : n_units_(n_units), k_(k_decisions), m_(n_draws), baseline_(std::move(baseline_decisions)), seed_(seed) {
  if (m_ < 1) throw ValidationError("posterior draw set needs at least one draw");
  if (k_ < 1) throw ValidationError("posterior draw set needs at least one decision");
  if (baseline_.size() != n_units_) throw ValidationError("one baseline decision per unit required");
  for (int b : baseline_)
    if (b < 0 || b >= k_) throw ValidationError("baseline decision out of range");
  tau_.assign(n_units_ * static_cast<std::size_t>(k_) * m_, 0.0);
}

void PosteriorDrawSet::validate() const {
  for (double v : tau_)
    if (!std::isfinite(v)) throw NumericalError("posterior draw set contains non-finite entries");
  for (std::size_t i = 0; i < n_units_; ++i)
    for (double v : draws(i, baseline_[i]))
      if (v != 0.0) throw ValidationError("baseline column of unit " + std::to_string(i) + " is not zero");
}

PosteriorDrawSet effect_draws(const LatentDraws& latent, Link link, const UtilitySpec& utility,
                              const std::vector<int>& baseline_decisions, std::uint64_t seed) {
  const int K = static_cast<int>(latent.levels());
  const std::size_t n = latent.n_query();
  const std::size_t M = latent.n_draws();
  if (baseline_decisions.size() != n) throw ValidationError("one baseline decision per query point required");
  PosteriorDrawSet out(n, K, M, baseline_decisions, seed);
  std::vector<double> value(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < n; ++i) {
    const int base = baseline_decisions[i];
    for (std::size_t m = 0; m < M; ++m) {
      double cumulative = 0.0;
      for (int k = 0; k < K; ++k) {
        cumulative += latent.f[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
        if (link == Link::identity) {
          value[static_cast<std::size_t>(k)] = cumulative;
        } else {
          const double p = 1.0 / (1.0 + std::exp(-cumulative));
          value[static_cast<std::size_t>(k)] = utility.expected_binary(k, p);
        }
      }
      for (int k = 0; k < K; ++k)
        out.at(i, k, m) = value[static_cast<std::size_t>(k)] - value[static_cast<std::size_t>(base)];
    }
  }
  return out;
}

namespace {

PosteriorDrawSet finish(const LatentDraws& latent, const GpModelSpec& spec, const CovariateSet& query,
                        const Policy& baseline, std::uint64_t seed) {
  std::vector<int> base = baseline.apply_all(query);
  const int K = static_cast<int>(latent.levels());
  for (int b : base)
    if (b < 0 || b >= K) throw ValidationError("baseline policy returned decision outside 0.." + std::to_string(K - 1));
  PosteriorDrawSet out = effect_draws(latent, spec.link, spec.utility, base, seed);
  out.set_baseline_policy(baseline);
  out.validate();
  return out;
}

}  // namespace

PosteriorDrawSet fit_gp_continuous(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                                   const Policy& baseline, std::size_t n_draws, std::uint64_t seed) {
  return finish(sample_latent_continuous(data, spec, query, n_draws, seed), spec, query, baseline, seed);
}

PosteriorDrawSet fit_gp_binary(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                               const Policy& baseline, std::size_t n_draws, std::uint64_t seed) {
  return finish(sample_latent_binary(data, spec, query, n_draws, seed), spec, query, baseline, seed);
}

PosteriorDrawSet fit_gp(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query,
                        const Policy& baseline, std::size_t n_draws, std::uint64_t seed) {
  return data.outcome_kind() == OutcomeKind::continuous
             ? fit_gp_continuous(data, spec, query, baseline, n_draws, seed)
             : fit_gp_binary(data, spec, query, baseline, n_draws, seed);
}

namespace detail {

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = nd(rng);
  return z;
}

Design build_design(const Dataset& data, const GpModelSpec& spec, const CovariateSet& query) {
  const int K = data.k_decisions();
  spec.validate(K, data.outcome_kind());
  Design d;
  d.levels = K;
  std::map<Covariates, Eigen::Index> seen;
  auto intern = [&](const Covariates& x) {
    auto [it, inserted] = seen.emplace(x, static_cast<Eigen::Index>(d.points.size()));
    if (inserted) d.points.push_back(x);
    return it->second;
  };
  const std::size_t n = data.size();
  d.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    d.train_at.push_back(intern(data[j].covariates));
    d.decision.push_back(data[j].decision);
    d.y(static_cast<Eigen::Index>(j)) = data[j].outcome;
  }
  for (const auto& q : query) {
    if (n > 0 && q.size() != data.dimension())
      throw ValidationError("query point has " + std::to_string(q.size()) + " covariates, data has " +
                            std::to_string(data.dimension()));
    d.query_at.push_back(intern(q));
  }
  const auto U = static_cast<Eigen::Index>(d.points.size());
  const auto N = static_cast<Eigen::Index>(n);
  d.observed_cov = Eigen::MatrixXd::Zero(N, N);
  d.observed_mean.resize(N);
  for (Eigen::Index j = 0; j < N; ++j) d.observed_mean(j) = spec.prior_mean * (d.decision[j] + 1);

  for (int lvl = 0; lvl < K; ++lvl) {
    const auto& params = spec.levels[static_cast<std::size_t>(lvl)];
    Eigen::MatrixXd kuu = gram(d.points, d.points, params);
    Eigen::MatrixXd cross(U, N);
    for (Eigen::Index j = 0; j < N; ++j) {
      if (d.decision[j] >= lvl)
        cross.col(j) = kuu.col(d.train_at[j]);
      else
        cross.col(j).setZero();
    }
    for (Eigen::Index a = 0; a < N; ++a)
      for (Eigen::Index b = 0; b < N; ++b)
        if (d.decision[a] >= lvl && d.decision[b] >= lvl) d.observed_cov(a, b) += kuu(d.train_at[a], d.train_at[b]);
    kuu.diagonal().array() += spec.jitter * params.variance;
    Eigen::LLT<Eigen::MatrixXd> llt(kuu);
    if (llt.info() != Eigen::Success)
      throw NumericalError("kernel matrix of level " + std::to_string(lvl) + " is singular after jitter");
    d.prior_chol.push_back(llt.matrixL());
    d.cross.push_back(std::move(cross));
  }
  return d;
}

Eigen::MatrixXd prior_draw(const Design& design, double prior_mean, Rng& rng) {
  const auto U = static_cast<Eigen::Index>(design.points.size());
  Eigen::MatrixXd f(U, design.levels);
  for (int lvl = 0; lvl < design.levels; ++lvl) {
    Eigen::VectorXd z = standard_normal(U, rng);
    f.col(lvl) = design.prior_chol[static_cast<std::size_t>(lvl)].triangularView<Eigen::Lower>() * z;
    f.col(lvl).array() += prior_mean;
  }
  return f;
}

Eigen::VectorXd observed_sum(const Design& design, const Eigen::MatrixXd& f) {
  const auto N = static_cast<Eigen::Index>(design.train_at.size());
  Eigen::VectorXd eta(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    double s = 0.0;
    for (int lvl = 0; lvl <= design.decision[j]; ++lvl) s += f(design.train_at[j], lvl);
    eta(j) = s;
  }
  return eta;
}

}  // namespace detail

}  // namespace bsafe::gp
