#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "bsafe/error.hpp"
#include "bsafe/parallel.hpp"
#include "bsafe/policy_opt.hpp"
#include "bsafe/sim.hpp"

namespace bsafe::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void mean_se(const std::vector<double>& v, double& mean, double& se) {
  mean = se = kNaN;
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<ReplicationRow> run_replication(const SweepConfig& config, std::size_t cell, int rep, std::uint64_t seed,
                                            const CovariateSet& mc) {
  const SweepCell& sc = config.cells[cell];
  const auto c = static_cast<std::uint64_t>(cell), r = static_cast<std::uint64_t>(rep);
  std::vector<ReplicationRow> rows;
  for (double eps : config.epsilons) {
    ReplicationRow row;
    row.cell = cell;
    row.replication = rep;
    row.epsilon = eps;
    rows.push_back(row);
  }
  try {
    Rng data_rng = make_rng(seed, {c, r, 0});
    const Dataset data = generate(sc.dgp, data_rng);
    const Policy baseline = baseline_policy(sc.dgp.scenario);
    const gp::Link link = sc.dgp.outcome == OutcomeKind::continuous ? gp::Link::identity : gp::Link::logit;
    auto spec = gp::GpModelSpec::defaults(2, link, gp::MaternKernelParams{sc.length_scale, sc.sigma0sq});
    spec.chains = config.chains;
    spec.burn_in = config.burn_in;
    const CovariateSet xs = data.covariates();
    const auto draws = gp::fit_gp(data, spec, xs, baseline, config.draws, derive_seed(seed, {c, r, 1}));
    const EmpiricalCovariateDistribution dist(xs);
    const auto table = risk::summarize(draws, dist);
    const auto oracle = make_oracle(sc.dgp);
    policy_opt::LinearOptions opts;
    opts.extra_candidates.push_back(std::get<LinearThreshold>(baseline.payload()));
    for (auto& row : rows) {
      const auto res = policy_opt::solve_linear(table, row.epsilon, opts);
      row.posterior_gain = res.posterior_value_gain;
      row.pacrisk = res.pacrisk;
      row.true_value = true_value(res.policy, sc.dgp, mc);
      row.true_acrisk = risk::true_acrisk(res.policy, baseline, oracle, dist);
      row.is_baseline = res.decisions == table.baseline_decisions();
      row.rule = std::get<LinearThreshold>(res.policy.payload());
    }
  } catch (const Error& e) {
    for (auto& row : rows) {
      row.error = e.what();
      row.posterior_gain = row.pacrisk = row.true_value = row.true_acrisk = kNaN;
    }
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch == '\n' ? ' ' : ch);
  return out + "\"";
}

std::string cell_label(const SweepCell& c) {
  std::ostringstream s;
  s << "scenario=" << to_string(c.dgp.scenario) << ";outcome=" << to_string(c.dgp.outcome) << ";n=" << c.dgp.n;
  if (c.dgp.outcome == OutcomeKind::continuous)
    s << ";sigma=" << c.dgp.sigma;
  else
    s << ";gamma=" << c.dgp.gamma;
  s << ";l=" << c.length_scale << ";sigma0sq=" << c.sigma0sq;
  return s.str();
}

}  // namespace

void SweepConfig::validate() const {
  if (cells.empty()) throw ValidationError("sweep needs at least one configuration");
  if (epsilons.empty()) throw ValidationError("sweep needs at least one epsilon");
  for (double e : epsilons)
    if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("epsilon must lie in [0, 1], got " + std::to_string(e));
  for (const auto& c : cells) {
    c.dgp.validate();
    gp::MaternKernelParams{c.length_scale, c.sigma0sq}.validate();
  }
  if (replications < 1) throw ValidationError("need at least one replication");
  if (draws < 1) throw ValidationError("need at least one posterior draw");
  if (burn_in < 0 || chains < 1) throw ValidationError("invalid sampler settings");
  if (mc_samples < 1) throw ValidationError("need at least one Monte Carlo sample");
}

Json sweep_config_to_json(const SweepConfig& c) {
  Json cells = Json::array();
  for (const auto& cell : c.cells) {
    Json j = dgp_to_json(cell.dgp);
    j["length_scale"] = cell.length_scale;
    j["sigma0sq"] = cell.sigma0sq;
    cells.push_back(j);
  }
  return Json{{"cells", cells},         {"epsilons", c.epsilons},   {"replications", c.replications},
              {"draws", c.draws},       {"burn_in", c.burn_in},     {"chains", c.chains},
              {"mc_samples", c.mc_samples}};
}

ReplicationReport run_sweep(const SweepConfig& config, std::uint64_t seed) {
  config.validate();
  Rng mc_rng = make_rng(seed, {~std::uint64_t{0}});
  const CovariateSet mc = draw_covariates(config.mc_samples, mc_rng);
  const std::size_t reps = static_cast<std::size_t>(config.replications);
  const std::size_t jobs = config.cells.size() * reps;
  std::vector<std::vector<ReplicationRow>> out(jobs);
  parallel_for(jobs, resolve_threads(config.threads), [&](std::size_t job) {
    out[job] = run_replication(config, job / reps, static_cast<int>(job % reps), seed, mc);
  });
  ReplicationReport report;
  report.config = config;
  report.seed = seed;
  for (auto& block : out)
    for (auto& row : block) report.rows.push_back(std::move(row));
  return report;
}

std::vector<const ReplicationRow*> ReplicationReport::select(std::size_t cell, double epsilon) const {
  std::vector<const ReplicationRow*> out;
  for (const auto& r : rows)
    if (r.cell == cell && r.epsilon == epsilon) out.push_back(&r);
  return out;
}

std::vector<Aggregate> ReplicationReport::aggregates() const {
  std::vector<Aggregate> out;
  for (std::size_t c = 0; c < config.cells.size(); ++c)
    for (double eps : config.epsilons) {
      Aggregate a;
      a.cell = c;
      a.epsilon = eps;
      std::vector<double> value, acrisk, gain;
      for (const auto* r : select(c, eps)) {
        if (!r->error.empty()) {
          ++a.failures;
          continue;
        }
        value.push_back(r->true_value);
        acrisk.push_back(r->true_acrisk);
        gain.push_back(r->posterior_gain);
      }
      a.count = value.size();
      double se_gain = 0.0;
      mean_se(value, a.mean_value, a.se_value);
      mean_se(acrisk, a.mean_acrisk, a.se_acrisk);
      mean_se(gain, a.mean_gain, se_gain);
      a.q90_acrisk = quantile(acrisk, 0.9);
      out.push_back(a);
    }
  return out;
}

void write_rows_csv(std::ostream& out, const ReplicationReport& r) {
  out << "cell,replication,epsilon,posterior_gain,pacrisk,true_value,true_acrisk,is_baseline,a,b,c,error\n";
  out << std::setprecision(17);
  for (const auto& row : r.rows)
    out << row.cell << ',' << row.replication << ',' << row.epsilon << ',' << row.posterior_gain << ','
        << row.pacrisk << ',' << row.true_value << ',' << row.true_acrisk << ',' << (row.is_baseline ? 1 : 0) << ','
        << row.rule.a << ',' << row.rule.b << ',' << row.rule.c << ',' << csv_field(row.error) << '\n';
}

void write_aggregates_csv(std::ostream& out, const ReplicationReport& r) {
  out << "cell,config,epsilon,count,failures,mean_value,se_value,mean_acrisk,se_acrisk,q90_acrisk,mean_posterior_gain\n";
  out << std::setprecision(17);
  for (const auto& a : r.aggregates())
    out << a.cell << ',' << csv_field(cell_label(r.config.cells[a.cell])) << ',' << a.epsilon << ',' << a.count << ','
        << a.failures << ',' << a.mean_value << ',' << a.se_value << ',' << a.mean_acrisk << ',' << a.se_acrisk << ','
        << a.q90_acrisk << ',' << a.mean_gain << '\n';
}

void write_plot_data(const std::filesystem::path& dir, const ReplicationReport& r) {
  std::filesystem::create_directories(dir);
  const auto aggs = r.aggregates();
  struct Series {
    const char* file;
    double Aggregate::*y;
    double Aggregate::*se;
  };
  const Series series[] = {{"value_vs_epsilon.csv", &Aggregate::mean_value, &Aggregate::se_value},
                           {"acrisk_vs_epsilon.csv", &Aggregate::mean_acrisk, &Aggregate::se_acrisk},
                           {"acrisk_q90_vs_epsilon.csv", &Aggregate::q90_acrisk, nullptr}};
  for (const auto& s : series) {
    std::ofstream f(dir / s.file);
    if (!f) throw ValidationError("cannot write " + (dir / s.file).string());
    f << "series,epsilon,y" << (s.se ? ",se" : "") << '\n' << std::setprecision(17);
    for (const auto& a : aggs) {
      f << csv_field(cell_label(r.config.cells[a.cell])) << ',' << a.epsilon << ',' << a.*(s.y);
      if (s.se) f << ',' << a.*(s.se);
      f << '\n';
    }
  }
}

}  // namespace bsafe::sim
