#include "bsafe/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "bsafe/error.hpp"
#include "bsafe/gp_posterior.hpp"
#include "bsafe/hes.hpp"
#include "bsafe/parallel.hpp"
#include "bsafe/policy_opt.hpp"
#include "bsafe/risk.hpp"
#include "bsafe/sim.hpp"
#include "bsafe/tables.hpp"
#include "cli/config.hpp"

namespace bsafe::cli {

namespace {

namespace fs = std::filesystem;
using Kind = Overrides::Kind;

constexpr std::uint64_t kDefaultSeed = 1;

std::string default_pipeline() { return std::string(BSAFE_CONFIG_DIR) + "/hes/wiring.json"; }

// Flags shared by every command.
struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config or run.json of an earlier run");
    app->add_option("--out", out, "output directory (default ./out/)");
    seed_opt = app->add_option("--seed", seed, "master seed");
    app->add_option("--threads", threads, "worker threads, 0 = all cores");
  }
};

struct Run {
  std::string command;
  std::uint64_t seed = kDefaultSeed;
  Json config;

  Json record() const { return Json{{"version", kVersion}, {"command", command}, {"seed", seed}, {"config", config}}; }
};

// Defaults, then the --config file, then flags.
Run resolve(const std::string& command, Json defaults, const Common& common, const Overrides& flags) {
  Run run{command, kDefaultSeed, std::move(defaults)};
  if (!common.config.empty()) {
    std::optional<std::uint64_t> seed;
    const Json section = section_from_file(common.config, command, seed);
    merge_known(run.config, section, command + " config");
    if (seed) run.seed = *seed;
  }
  flags.apply(run.config);
  if (common.seed_opt->count() > 0) run.seed = common.seed;
  return run;
}

fs::path output_dir(const Common& common, std::ostream& out) {
  fs::path dir = common.out;
  if (common.out.empty()) {
    dir = "out";
    out << "no --out given; writing to ./out/\n";
  }
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  return f;
}

void csv_preamble(std::ostream& f, const Run& run) { f << "# " << run.record().dump() << '\n'; }

void write_json(const fs::path& path, const Json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_run(const fs::path& dir, const Run& run) { write_json(dir / "run.json", run.record()); }

std::vector<double> epsilons_of(const Json& cfg) {
  std::vector<double> eps;
  if (cfg.contains("epsilon_grid") && !cfg.at("epsilon_grid").is_null())
    eps = cfg.at("epsilon_grid").get<std::vector<double>>();
  else
    eps.push_back(cfg.at("epsilon").get<double>());
  if (eps.empty()) throw ValidationError("epsilon grid is empty");
  for (double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("epsilon must lie in [0, 1], got " + std::to_string(e));
  return eps;
}

std::vector<std::string> split_names(const Json& v) {
  if (v.is_array()) return v.get<std::vector<std::string>>();
  std::vector<std::string> out;
  std::istringstream in(v.get<std::string>());
  std::string s;
  while (std::getline(in, s, ','))
    if (!s.empty()) out.push_back(s);
  return out;
}

DatasetSchema schema_of(Json& s, int k) {
  DatasetSchema schema;
  s["covariates"] = split_names(s.at("covariates"));
  schema.covariates = s.at("covariates").get<std::vector<std::string>>();
  schema.decision = s.at("decision").get<std::string>();
  schema.outcome = s.at("outcome").get<std::string>();
  schema.k_decisions = k;
  schema.outcome_kind = outcome_kind_from_string(s.at("outcome_kind").get<std::string>());
  return schema;
}

gp::GpModelSpec model_of(Json& cfg, int k, OutcomeKind kind) {
  const gp::Link link = kind == OutcomeKind::continuous ? gp::Link::identity : gp::Link::logit;
  gp::GpModelSpec spec = gp::GpModelSpec::defaults(k, link);
  if (!cfg.at("model").is_null()) {
    Json m = cfg.at("model");
    if (!m.contains("link")) m["link"] = link == gp::Link::identity ? "identity" : "logit";
    spec = gp::spec_from_json(m, k);
  }
  spec.validate(k, kind);
  cfg["model"] = gp::spec_to_json(spec);
  return spec;
}

tables::ShortBurstConfig mcmc_of(const Json& cfg, int threads) {
  auto c = tables::burst_config_from_json(cfg.at("mcmc"));
  c.threads = resolve_threads(threads);
  c.validate();
  return c;
}

void add_mcmc_flags(CLI::App* app, Overrides& flags) {
  flags.add(app, "--bursts", "mcmc.bursts", Kind::integer, "short-burst bursts per restart");
  flags.add(app, "--burst-length", "mcmc.burst_length", Kind::integer, "chain steps per burst");
  flags.add(app, "--restarts", "mcmc.restarts", Kind::integer, "independent restarts");
  flags.add(app, "--sort-move-probability", "mcmc.sort_move_probability", Kind::real, "share of sort moves");
}

void add_schema_flags(CLI::App* app, Overrides& flags) {
  flags.add(app, "--covariates", "schema.covariates", Kind::text, "comma-separated covariate columns");
  flags.add(app, "--decision-column", "schema.decision", Kind::text, "decision column");
  flags.add(app, "--outcome-column", "schema.outcome", Kind::text, "outcome column");
  flags.add(app, "--outcome-kind", "schema.outcome_kind", Kind::text, "continuous or binary");
}

Json schema_defaults() {
  return Json{{"covariates", Json::array()}, {"decision", "d"}, {"outcome", "y"}, {"outcome_kind", "continuous"}};
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
  Common common;
  Overrides flags;

  void attach(CLI::App* app) {
    common.attach(app);
    flags.add(app, "--scenario", "scenario", Kind::text, "I or II");
    flags.add(app, "--outcome", "outcome", Kind::text, "continuous or binary");
    flags.add(app, "--n", "n", Kind::integer, "sample size");
    flags.add(app, "--sigma", "sigma", Kind::real, "noise sd (continuous)");
    flags.add(app, "--gamma", "gamma", Kind::real, "effect scale (binary)");
    flags.add(app, "--epsilon-grid", "epsilon_grid", Kind::real_list, "comma-separated risk budgets");
    flags.add(app, "--l", "length_scale", Kind::real, "kernel length scale");
    flags.add(app, "--sigma0sq", "sigma0sq", Kind::real, "kernel variance");
    flags.add(app, "--reps", "reps", Kind::integer, "replications");
    flags.add(app, "--draws", "draws", Kind::integer, "posterior draws");
    flags.add(app, "--burn-in", "burn_in", Kind::integer, "burn-in per chain");
    flags.add(app, "--chains", "chains", Kind::integer, "sampler chains");
    flags.add(app, "--mc-samples", "mc_samples", Kind::integer, "covariate draws for true values");
    flags.add(app, "--plot-data", "plot_data", Kind::flag, "write the series behind each plot");
  }

  int operator()(std::ostream& out) {
    Json defaults{{"scenario", "I"},      {"outcome", "continuous"},
                  {"n", 50},              {"sigma", nullptr},
                  {"gamma", nullptr},     {"epsilon_grid", {0.0, 0.01, 0.05, 0.1, 0.2, 1.0}},
                  {"length_scale", 1.0},  {"sigma0sq", 4.0},
                  {"reps", 200},          {"draws", 1000},
                  {"burn_in", 500},       {"chains", 2},
                  {"mc_samples", 100000}, {"plot_data", false}};
    Run run = resolve("simulate", std::move(defaults), common, flags);
    Json& c = run.config;
    sim::SweepCell cell;
    cell.dgp.scenario = sim::scenario_from_string(c.at("scenario").get<std::string>());
    cell.dgp.outcome = outcome_kind_from_string(c.at("outcome").get<std::string>());
    if (cell.dgp.outcome == OutcomeKind::continuous) {
      if (!c.at("gamma").is_null()) throw UsageError("--gamma applies to binary outcomes only");
      if (c.at("sigma").is_null()) c["sigma"] = 1.0;
      cell.dgp.sigma = c.at("sigma").get<double>();
      c.erase("gamma");
    } else {
      if (!c.at("sigma").is_null()) throw UsageError("--sigma applies to continuous outcomes only");
      if (c.at("gamma").is_null()) c["gamma"] = 1.0;
      cell.dgp.gamma = c.at("gamma").get<double>();
      c.erase("sigma");
    }
    cell.dgp.n = c.at("n").get<std::size_t>();
    cell.length_scale = c.at("length_scale").get<double>();
    cell.sigma0sq = c.at("sigma0sq").get<double>();
    sim::SweepConfig sweep;
    sweep.cells.push_back(cell);
    sweep.epsilons = c.at("epsilon_grid").get<std::vector<double>>();
    sweep.replications = c.at("reps").get<int>();
    sweep.draws = c.at("draws").get<std::size_t>();
    sweep.burn_in = c.at("burn_in").get<int>();
    sweep.chains = c.at("chains").get<int>();
    sweep.mc_samples = c.at("mc_samples").get<std::size_t>();
    sweep.threads = common.threads;
    sweep.validate();

    const fs::path dir = output_dir(common, out);
    const auto report = sim::run_sweep(sweep, run.seed);
    {
      auto f = open_out(dir / "rows.csv");
      csv_preamble(f, run);
      sim::write_rows_csv(f, report);
    }
    {
      auto f = open_out(dir / "aggregate.csv");
      csv_preamble(f, run);
      sim::write_aggregates_csv(f, report);
    }
    if (c.at("plot_data").get<bool>()) {
      sim::write_plot_data(dir / "plot", report);
      for (const char* name : {"value_vs_epsilon.csv", "acrisk_vs_epsilon.csv", "acrisk_q90_vs_epsilon.csv"}) {
        // prepend the run record
        std::ifstream in(dir / "plot" / name);
        std::stringstream body;
        body << in.rdbuf();
        in.close();
        auto f = open_out(dir / "plot" / name);
        csv_preamble(f, run);
        f << body.str();
      }
    }
    write_run(dir, run);
    std::size_t failures = 0;
    for (const auto& r : report.rows) failures += r.error.empty() ? 0 : 1;
    out << "wrote " << report.rows.size() << " rows to " << (dir / "rows.csv").string() << '\n';
    if (failures) out << failures << " rows recorded estimator failures\n";
    for (const auto& a : report.aggregates())
      out << "epsilon=" << fmt(a.epsilon) << " mean_value=" << fmt(a.mean_value) << " mean_acrisk=" << fmt(a.mean_acrisk)
          << " q90_acrisk=" << fmt(a.q90_acrisk) << '\n';
    return 0;
  }
};

struct LearnCmd {
  Common common;
  Overrides flags;

  void attach(CLI::App* app) {
    common.attach(app);
    flags.add(app, "--data", "data", Kind::text, "dataset CSV");
    flags.add(app, "--schema", "schema_json", Kind::text, "schema as a JSON file or inline JSON");
    add_schema_flags(app, flags);
    flags.add(app, "--k", "schema.k", Kind::integer, "number of decisions");
    flags.add(app, "--policy-class", "policy_class", Kind::text, "per_unit, linear or table");
    flags.add(app, "--epsilon", "epsilon", Kind::real, "risk budget");
    flags.add(app, "--epsilon-grid", "epsilon_grid", Kind::real_list, "comma-separated risk budgets");
    flags.add(app, "--draws", "draws", Kind::integer, "posterior draws");
    flags.add(app, "--baseline-decision", "baseline.decision", Kind::integer, "constant baseline decision");
    flags.add(app, "--pipeline", "pipeline", Kind::text, "pipeline wiring (table class)");
    flags.add(app, "--which", "which", Kind::text, "top or all (table class)");
    add_mcmc_flags(app, flags);
  }

  int operator()(std::ostream& out) {
    Json schema_init = schema_defaults();
    schema_init["k"] = 2;
    Json defaults{{"data", nullptr},
                  {"schema", schema_init},
                  {"policy_class", "per_unit"},
                  {"epsilon", 0.1},
                  {"epsilon_grid", nullptr},
                  {"draws", 1000},
                  {"model", nullptr},
                  {"baseline", {{"decision", 0}}},
                  {"pipeline", nullptr},
                  {"which", "top"},
                  {"mcmc", tables::config_to_json(tables::ShortBurstConfig{})},
                  {"schema_json", nullptr}};
    Run run = resolve("learn", std::move(defaults), common, flags);
    Json& c = run.config;
    if (!c.at("schema_json").is_null()) {
      const std::string s = c.at("schema_json").get<std::string>();
      Json given;
      if (!s.empty() && s.front() == '{') {
        try {
          given = Json::parse(s);
        } catch (const Json::parse_error& e) {
          throw UsageError(std::string("--schema: ") + e.what());
        }
      } else {
        given = load_json_file(s);
      }
      merge_known(c["schema"], given, "schema");
      // explicit column flags still win
      flags.apply(c);
    }
    c.erase("schema_json");
    if (c.at("data").is_null()) throw UsageError("learn needs --data");

    const std::string cls = c.at("policy_class").get<std::string>();
    if (cls != "per_unit" && cls != "linear" && cls != "table")
      throw UsageError("unknown policy class '" + cls + "' (expected per_unit, linear or table)");
    std::optional<hes::HesPipeline> pipeline;
    int k = c.at("schema").at("k").get<int>();
    if (cls == "table") {
      if (c.at("pipeline").is_null()) c["pipeline"] = default_pipeline();
      pipeline = hes::load_pipeline(c.at("pipeline").get<std::string>());
      if (flags.given("schema.k") && k != pipeline->output_levels())
        throw ValidationError("--k must equal the pipeline's output levels");
      k = pipeline->output_levels();
      c["schema"]["k"] = k;
      c["baseline"] = Json{{"pipeline", c.at("pipeline")}};
    } else {
      c.erase("pipeline");
      c.erase("which");
      c.erase("mcmc");
    }
    const DatasetSchema schema = schema_of(c["schema"], k);
    const auto eps = epsilons_of(c);
    if (c.at("epsilon_grid").is_null())
      c.erase("epsilon_grid");
    else
      c.erase("epsilon");
    const gp::GpModelSpec spec = model_of(c, k, schema.outcome_kind);
    const std::size_t draws_m = c.at("draws").get<std::size_t>();

    const Dataset data = load_dataset(c.at("data").get<std::string>(), schema);
    const CovariateSet xs = data.covariates();
    Policy baseline = Policy::linear(0.0, 0.0, -1.0);
    if (pipeline) {
      baseline = hes::pipeline_policy(*pipeline);
    } else {
      const Json& b = c.at("baseline");
      if (b.contains("policy")) {
        baseline = policy_from_json(b.at("policy"), hes::load_pipeline_rule);
      } else {
        const int d = b.at("decision").get<int>();
        if (d < 0 || d >= k) throw ValidationError("baseline decision out of range");
        baseline = Policy::per_unit(xs, std::vector<int>(xs.size(), d));
      }
    }
    const fs::path dir = output_dir(common, out);
    const auto draws = gp::fit_gp(data, spec, xs, baseline, draws_m, derive_seed(run.seed, {1}));
    const EmpiricalCovariateDistribution dist(xs);
    const auto table = risk::summarize(draws, dist);

    Json results = Json::array();
    for (double e : eps) {
      policy_opt::OptimizationResult r;
      if (cls == "per_unit") {
        r = policy_opt::solve_per_unit(table, e);
      } else if (cls == "linear") {
        policy_opt::LinearOptions opts;
        opts.threads = resolve_threads(common.threads);
        if (const auto* lt = std::get_if<LinearThreshold>(&baseline.payload())) opts.extra_candidates.push_back(*lt);
        r = policy_opt::solve_linear(table, e, opts);
      } else {
        r = policy_opt::solve_table_pipeline(table, *pipeline,
                                             policy_opt::table_scope_from_string(c.at("which").get<std::string>()), e,
                                             mcmc_of(c, common.threads), derive_seed(run.seed, {2}));
      }
      out << "epsilon=" << fmt(e) << " posterior_value_gain=" << fmt(r.posterior_value_gain)
          << " pacrisk=" << fmt(r.pacrisk) << (r.feasible ? "" : " (infeasible)") << '\n';
      results.push_back(policy_opt::result_to_json(r));
    }
    Json doc{{"run", run.record()}};
    if (eps.size() == 1)
      doc["result"] = results.at(0);
    else
      doc["results"] = results;
    write_json(dir / "policy.json", doc);
    {
      auto f = open_out(dir / "benefit_risk.csv");
      csv_preamble(f, run);
      risk::write_table_csv(f, table);
    }
    write_run(dir, run);
    out << "wrote " << (dir / "policy.json").string() << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------------------

CovariateSet input_rows(const Json& c, const hes::HesPipeline& p) {
  if (c.at("input").is_null()) throw UsageError("--input is required");
  auto rows = read_numeric_csv(c.at("input").get<std::string>());
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != static_cast<std::size_t>(p.n_inputs()))
      throw ValidationError("input row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                            " scores, expected " + std::to_string(p.n_inputs()));
  return rows;
}

struct HesEvalCmd {
  Common common;
  Overrides flags;

  void attach(CLI::App* app) {
    common.attach(app);
    flags.add(app, "--pipeline", "pipeline", Kind::text, "pipeline wiring JSON");
    flags.add(app, "--input", "input", Kind::text, "CSV of raw sub-model scores");
  }

  int operator()(std::ostream& out) {
    Run run = resolve("hes eval", Json{{"pipeline", default_pipeline()}, {"input", nullptr}}, common, flags);
    const auto p = hes::load_pipeline(run.config.at("pipeline").get<std::string>());
    const auto rows = input_rows(run.config, p);
    const fs::path dir = output_dir(common, out);
    auto f = open_out(dir / "scores.csv");
    csv_preamble(f, run);
    f << "row,score\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int s = p.evaluate(rows[i]);
      f << i + 1 << ',' << s << '\n';
      out << s << '\n';
    }
    write_run(dir, run);
    return 0;
  }
};

struct HesOptimizeCmd {
  Common common;
  Overrides flags;

  void attach(CLI::App* app) {
    common.attach(app);
    flags.add(app, "--pipeline", "pipeline", Kind::text, "pipeline wiring JSON");
    flags.add(app, "--data", "data", Kind::text, "dataset CSV: sub-model scores, decision, outcome");
    add_schema_flags(app, flags);
    flags.add(app, "--which", "which", Kind::text, "top or all");
    flags.add(app, "--epsilon", "epsilon", Kind::real, "risk budget");
    flags.add(app, "--draws", "draws", Kind::integer, "posterior draws");
    add_mcmc_flags(app, flags);
  }

  int operator()(std::ostream& out) {
    Json defaults{{"pipeline", default_pipeline()},
                  {"data", nullptr},
                  {"schema", schema_defaults()},
                  {"which", "top"},
                  {"epsilon", 0.1},
                  {"draws", 1000},
                  {"model", nullptr},
                  {"mcmc", tables::config_to_json(tables::ShortBurstConfig{})}};
    Run run = resolve("hes optimize", std::move(defaults), common, flags);
    Json& c = run.config;
    if (c.at("data").is_null()) throw UsageError("hes optimize needs --data");
    const auto p = hes::load_pipeline(c.at("pipeline").get<std::string>());
    const int k = p.output_levels();
    const DatasetSchema schema = schema_of(c["schema"], k);
    const double eps = epsilons_of(c).front();
    const auto scope = policy_opt::table_scope_from_string(c.at("which").get<std::string>());
    const gp::GpModelSpec spec = model_of(c, k, schema.outcome_kind);
    const auto mcmc = mcmc_of(c, common.threads);

    const Dataset data = load_dataset(c.at("data").get<std::string>(), schema);
    const CovariateSet xs = data.covariates();
    const Policy baseline = hes::pipeline_policy(p);
    const fs::path dir = output_dir(common, out);
    const auto draws = gp::fit_gp(data, spec, xs, baseline, c.at("draws").get<std::size_t>(), derive_seed(run.seed, {1}));
    const auto table = risk::summarize(draws, EmpiricalCovariateDistribution(xs));
    const auto r = policy_opt::solve_table_pipeline(table, p, scope, eps, mcmc, derive_seed(run.seed, {2}));

    const auto& learned = std::get<std::shared_ptr<const DecisionRule>>(r.policy.payload());
    const auto& lp = dynamic_cast<const hes::PipelineRule&>(*learned).pipeline();
    write_json(dir / "result.json", Json{{"run", run.record()}, {"result", policy_opt::result_to_json(r)}});
    Json pj = lp.to_json();
    pj["run"] = run.record();
    write_json(dir / "learned_pipeline.json", pj);
    fs::create_directories(dir / "tables");
    for (const auto& [name, t] : lp.tables()) {
      auto f = open_out(dir / "tables" / (name + ".txt"));
      csv_preamble(f, run);
      tables::write_table_text(f, t);
    }
    write_run(dir, run);
    out << "posterior_value_gain=" << fmt(r.posterior_value_gain) << " pacrisk=" << fmt(r.pacrisk)
        << " changed_cells=" << r.diagnostics.at("changed_cells").get<std::size_t>() << '\n';
    for (const auto& [name, t] : lp.tables()) {
      out << "table " << name << ":\n";
      tables::write_table_text(out, t);
    }
    return 0;
  }
};

std::vector<std::string> sink_axis_names(const hes::HesPipeline& p) { return p.sink().inputs; }

struct HesPdCmd {
  Common common;
  Overrides flags;
  bool importance = false;

  void attach(CLI::App* app) {
    common.attach(app);
    flags.add(app, "--pipeline", "pipeline", Kind::text, "baseline pipeline wiring JSON");
    flags.add(app, "--learned", "learned", Kind::text, "learned pipeline JSON from hes optimize");
    flags.add(app, "--input", "input", Kind::text, "CSV of raw sub-model scores");
  }

  int operator()(std::ostream& out) {
    const std::string command = importance ? "hes pd-importance" : "hes pd";
    Run run = resolve(command, Json{{"pipeline", default_pipeline()}, {"learned", nullptr}, {"input", nullptr}}, common,
                      flags);
    const Json& c = run.config;
    std::vector<std::pair<std::string, hes::HesPipeline>> pipes;
    pipes.emplace_back("baseline", hes::load_pipeline(c.at("pipeline").get<std::string>()));
    if (!c.at("learned").is_null()) pipes.emplace_back("learned", hes::load_pipeline(c.at("learned").get<std::string>()));
    const auto rows = input_rows(c, pipes.front().second);
    const fs::path dir = output_dir(common, out);
    std::ostringstream body;
    body << std::setprecision(17);
    if (!importance) {
      body << "policy,axis,input,value,pd\n";
      for (const auto& [label, p] : pipes) {
        const auto sr = hes::sink_rows(p, rows);
        const auto names = sink_axis_names(p);
        for (std::size_t a = 0; a < p.sink_table().arity(); ++a) {
          const auto curve = hes::pd_curve(p.sink_table(), sr, a);
          for (std::size_t v = 0; v < curve.size(); ++v)
            body << label << ',' << a + 1 << ',' << names[a] << ',' << v + 1 << ',' << curve[v] << '\n';
        }
      }
      auto f = open_out(dir / "pd.csv");
      csv_preamble(f, run);
      f << body.str();
      if (pipes.size() == 2) {
        const auto rel = hes::pd_relative_change(pipes[0].second, pipes[1].second, rows);
        auto g = open_out(dir / "relative_change.csv");
        csv_preamble(g, run);
        g << "axis,input,value,relative_change\n" << std::setprecision(17);
        const auto names = sink_axis_names(pipes[0].second);
        for (std::size_t a = 0; a < rel.size(); ++a)
          for (std::size_t v = 0; v < rel[a].size(); ++v)
            g << a + 1 << ',' << names[a] << ',' << v + 1 << ',' << rel[a][v] << '\n';
      }
    } else {
      body << "policy,group,input,importance,scaled,degenerate\n";
      for (const auto& [label, p] : pipes) {
        const auto sr = hes::sink_rows(p, rows);
        const auto names = sink_axis_names(p);
        std::vector<double> top;
        for (std::size_t a = 0; a < p.sink_table().arity(); ++a) top.push_back(hes::pd_importance(p.sink_table(), sr, a));
        const auto top_s = hes::scale_importances(top);
        for (std::size_t a = 0; a < top.size(); ++a)
          body << label << ",top," << names[a] << ',' << top[a] << ',' << top_s.values[a] << ','
               << (top_s.degenerate ? 1 : 0) << '\n';
        std::vector<double> sub;
        for (int i = 1; i <= p.n_inputs(); ++i) sub.push_back(hes::submodel_pd_importance(p, rows, i));
        const auto sub_s = hes::scale_importances(sub);
        for (std::size_t i = 0; i < sub.size(); ++i)
          body << label << ",submodel,x" << i + 1 << ',' << sub[i] << ',' << sub_s.values[i] << ','
               << (sub_s.degenerate ? 1 : 0) << '\n';
      }
      auto f = open_out(dir / "importance.csv");
      csv_preamble(f, run);
      f << body.str();
    }
    write_run(dir, run);
    out << body.str();
    return 0;
  }
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const Json::type_error*>(&e) || dynamic_cast<const Json::out_of_range*>(&e)) return 2;
  return 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safe policy learning with posterior risk constraints", "bsafe"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateCmd simulate;
  LearnCmd learn;
  HesEvalCmd hes_eval;
  HesOptimizeCmd hes_optimize;
  HesPdCmd hes_pd, hes_importance;
  hes_importance.importance = true;

  auto* sim_app = app.add_subcommand("simulate", "run the simulation sweep");
  simulate.attach(sim_app);
  auto* learn_app = app.add_subcommand("learn", "learn a policy from data");
  learn.attach(learn_app);
  auto* hes_app = app.add_subcommand("hes", "hierarchical decision-table pipeline");
  hes_app->require_subcommand(1);
  auto* eval_app = hes_app->add_subcommand("eval", "evaluate the pipeline on raw scores");
  hes_eval.attach(eval_app);
  auto* opt_app = hes_app->add_subcommand("optimize", "learn pipeline tables under a risk budget");
  hes_optimize.attach(opt_app);
  auto* pd_app = hes_app->add_subcommand("pd", "partial dependence of the top table");
  hes_pd.attach(pd_app);
  auto* imp_app = hes_app->add_subcommand("pd-importance", "scaled partial-dependence importance");
  hes_importance.attach(imp_app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }

  try {
    if (sim_app->parsed()) return simulate(out);
    if (learn_app->parsed()) return learn(out);
    if (eval_app->parsed()) return hes_eval(out);
    if (opt_app->parsed()) return hes_optimize(out);
    if (pd_app->parsed()) return hes_pd(out);
    if (imp_app->parsed()) return hes_importance(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  err << "error: no command given\n";
  return 2;
}

}  // namespace bsafe::cli
