#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcsde/analysis.hpp"
#include "tcsde/config.hpp"
#include "tcsde/data.hpp"
#include "tcsde/mlpmmh.hpp"
#include "tcsde/studies.hpp"
#include "tcsde/umsa.hpp"

using nlohmann::json;
using namespace tcsde;

namespace {

constexpr int report_schema_version = 1;

struct Common {
  std::string config_path;
  std::optional<unsigned long long> seed;
  std::size_t threads = 1;
  std::string out;
  bool omit_timing = false;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = load_config_file(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

json base_report(const std::string& command, const RunConfig& cfg, const Common& c) {
  json r;
  r["schema_version"] = report_schema_version;
  r["command"] = command;
  r["seed"] = cfg.seed;
  r["threads"] = c.threads;
  r["config"] = to_json(cfg);
  return r;
}

/// report.json -> report_<suffix>.csv
std::string sibling(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_" + suffix + ".csv")).string();
}

void write_json(const json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cli", "cannot write '" + path + "'");
  f << doc.dump(2) << "\n";
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path) {
    if (path.empty() || path == "-") return;
    f_.open(path, std::ios::binary);
    if (!f_) throw IoError("cli", "cannot write '" + path + "'");
    row(header);
  }
  template <class... Ts>
  void values(const Ts&... xs) {
    if (!f_.is_open()) return;
    std::vector<std::string> cells;
    (cells.push_back(cell(xs)), ...);
    row(cells);
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double x) { return format_double(x); }
  template <class T>
  static std::string cell(const T& x) {
    return std::to_string(x);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
    f_ << "\n";
  }
  std::string path_;
  std::ofstream f_;
};

json fit_json(const RegressionFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"slope_se", f.slope_se}};
}

json stats_json(const SeriesStats& s) {
  json q = json::object();
  for (std::size_t i = 0; i < s.quantiles.size(); ++i)
    q[format_double(SeriesStats::quantile_levels[i])] = s.quantiles[i];
  return {{"count", s.count}, {"mean", s.mean},         {"std_dev", s.std_dev},
          {"skewness", s.skewness}, {"kurtosis", s.kurtosis}, {"quantiles", q}};
}

json acf_json(const AcfReport& a) {
  return {{"values", a.values}, {"band", a.band}, {"lags_above_band", a.count_above_band()}};
}

std::vector<double> theta_vec(const BlackScholesModel::Params& p) { return {p.v.begin(), p.v.end()}; }

/// Observations from --input, or a synthetic dataset generated from the config.
Dataset load_or_simulate(const std::string& input, const RunConfig& cfg) {
  if (!input.empty()) return read_dataset(input);
  return generate_synthetic(cfg.constants(), BlackScholesModel::theta(cfg.mu_true, cfg.nu2_true),
                            cfg.data_level, cfg.seed, cfg.op_time_step);
}

/// Estimator streams are kept apart from the data-generation streams (seed, 0|1).
RngStream estimator_stream(const RunConfig& cfg) { return RngStream(cfg.seed, 2); }

ModelConstants constants_for(const RunConfig& cfg, const Dataset& d) {
  ModelConstants c = cfg.constants();
  c.T = d.observations.size();
  return c;
}

// ----------------------------------------------------------------------------

int run_simulate(const Common& c) {
  const auto cfg = resolve(c);
  auto d = generate_synthetic(cfg.constants(), BlackScholesModel::theta(cfg.mu_true, cfg.nu2_true),
                              cfg.data_level, cfg.seed, cfg.op_time_step);
  d.metadata["config"] = to_json(cfg);
  if (c.out.empty()) throw InvalidParameter("cli", "simulate needs --out");
  write_dataset(d, c.out);
  std::cerr << "wrote " << d.observations.size() << " observations to " << c.out << "\n";
  return 0;
}

struct IngestArgs {
  std::string input;
  PriceIngestOptions opts;
  bool levels = false;
};

PriceIngestOptions ingest_options(const RunConfig& cfg, const IngestArgs& a, bool window_given) {
  PriceIngestOptions o = a.opts;
  if (o.date_col.empty()) o.date_col = cfg.date_col;
  if (o.close_col.empty()) o.close_col = cfg.close_col;
  if (!window_given) {
    o.start = cfg.window_start;
    o.end = cfg.window_end;
  }
  return o;
}

int run_ingest(const Common& c, const IngestArgs& a, bool window_given) {
  const auto cfg = resolve(c);
  const auto series = ingest_prices_file(a.input, ingest_options(cfg, a, window_given));
  auto d = a.levels ? to_levels(series, cfg.observe_log) : to_returns(series);
  d.metadata["source"] = std::filesystem::path(a.input).filename().string();
  d.metadata["prices"] = series.closes.size();
  if (c.out.empty()) throw InvalidParameter("cli", "ingest needs --out");
  write_dataset(d, c.out);
  std::cerr << "wrote " << d.observations.size() << " values to " << c.out << "\n";
  return 0;
}

int run_analyze(const Common& c, const std::string& input, std::size_t lags) {
  const auto cfg = resolve(c);
  const auto d = read_dataset(input);
  const auto& y = d.observations.y;
  const auto stats = summary(y);
  const auto acf = acf_abs(y, lags ? lags : cfg.acf_lags);
  json r = base_report("analyze", cfg, c);
  r["input"] = input;
  r["summary"] = stats_json(stats);
  r["acf_abs"] = acf_json(acf);
  write_json(r, c.out);
  CsvWriter csv(c.out.empty() ? "" : sibling(c.out, "acf"), {"lag", "acf", "band"});
  for (std::size_t h = 0; h < acf.lags.size(); ++h) csv.values(acf.lags[h], acf.values[h], acf.band);
  return 0;
}

int run_score_estimate(const Common& c, const std::string& input, std::size_t replicates) {
  const auto cfg = resolve(c);
  const auto d = load_or_simulate(input, cfg);
  const BlackScholesModel model(constants_for(cfg, d));
  const std::size_t M = replicates ? replicates : cfg.replicates;
  const auto est = umsa_estimate(model, cfg.estimator(), d.observations, M, estimator_stream(cfg), c.threads);

  json r = base_report("score-estimate", cfg, c);
  r["replicates"] = M;
  r["observations"] = d.observations.size();
  if (d.truth) r["truth"] = *d.truth;
  r["theta_hat"] = theta_vec(est.mean);
  json draws = json::array();
  std::uint64_t total_cost = 0;
  for (const auto& x : est.draws) {
    json j{{"l", x.level}, {"p", x.horizon}, {"probability", x.probability},
           {"theta_hat", theta_vec(x.theta_hat)}, {"cost_ops", x.cost_ops}};
    if (!c.omit_timing) j["wall_ns"] = x.wall_ns;
    draws.push_back(j);
    total_cost += x.cost_ops;
  }
  r["cost_ops"] = total_cost;
  r["draws"] = draws;
  write_json(r, c.out);
  CsvWriter csv(c.out.empty() ? "" : sibling(c.out, "draws"), {"l", "p", "probability", "mu", "nu2", "cost_ops"});
  for (const auto& x : est.draws)
    csv.values(x.level, x.horizon, x.probability, x.theta_hat[0], x.theta_hat[1], x.cost_ops);
  return 0;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_double(item);
    if (!v) throw InvalidParameter("cli", "not a number: '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::size_t> parse_iters(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_double(item);
    if (!v || *v < 1.0 || *v != std::floor(*v))
      throw InvalidParameter("cli", "--iters entries must be positive integers: '" + item + "'");
    out.push_back(static_cast<std::size_t>(*v));
  }
  if (out.empty()) throw InvalidParameter("cli", "--iters is empty");
  return out;
}

struct BayesArgs {
  std::string input;
  std::optional<double> epsilon;
  std::optional<int> levels;
  std::string iters;
};

json bayes_report_levels(const std::vector<LevelChain<BlackScholesModel::Params>>& chains, double burn_in) {
  json levels = json::array();
  for (const auto& ch : chains) {
    std::vector<double> partial;
    for (std::size_t i = 0; i < BlackScholesModel::Params::size(); ++i) {
      if (ch.level == 0) {
        partial.push_back(chain_mean(ch, burn_in)[i]);
      } else {
        const auto [f, cc] = level_correction_terms<BlackScholesModel::Params>(
            ch, [i](const BlackScholesModel::Params& th) { return th[i]; }, burn_in);
        partial.push_back(f - cc);
      }
    }
    levels.push_back({{"l", ch.level},
                      {"iters", ch.thetas.size() - 1},
                      {"acc_rate", ch.stats.acceptance_rate()},
                      {"failed_proposals", ch.stats.failed},
                      {"cost_ops", ch.stats.cost.fine_steps},
                      {"partial_estimates", partial}});
  }
  return levels;
}

int run_bayes_estimate(const Common& c, const BayesArgs& a) {
  const auto cfg = resolve(c);
  const auto d = load_or_simulate(a.input, cfg);
  const BlackScholesModel model(constants_for(cfg, d));
  std::vector<std::size_t> iterations;
  double epsilon = cfg.epsilon;
  if (a.levels) {
    iterations = parse_iters(a.iters);
    if (iterations.size() != static_cast<std::size_t>(*a.levels) + 1)
      throw InvalidParameter("cli", "--iters needs L+1 entries for --levels L");
  } else {
    if (a.epsilon) epsilon = *a.epsilon;
    iterations = allocate(epsilon, cfg.ml_level_cap, cfg.ml_c, cfg.ml_floor).iterations;
  }
  const auto chains = ml_run(model, cfg.prior(), cfg.ml(), iterations, d.observations, estimator_stream(cfg),
                             c.threads);
  json r = base_report("bayes-estimate", cfg, c);
  if (!a.levels) r["epsilon"] = epsilon;
  r["iterations"] = iterations;
  if (d.truth) r["truth"] = *d.truth;
  r["levels"] = bayes_report_levels(chains, cfg.burn_in);
  r["posterior_mean"] = theta_vec(ml_posterior_mean(chains, cfg.burn_in));
  std::uint64_t cost = 0;
  for (const auto& ch : chains) cost += ch.stats.cost.fine_steps;
  r["cost_ops"] = cost;
  write_json(r, c.out);
  CsvWriter csv(c.out.empty() ? "" : sibling(c.out, "levels"),
                {"l", "iters", "acc_rate", "cost_ops", "partial_mu", "partial_nu2"});
  for (const auto& lv : r["levels"])
    csv.values(lv["l"].get<int>(), lv["iters"].get<std::size_t>(), lv["acc_rate"].get<double>(),
               lv["cost_ops"].get<std::uint64_t>(), lv["partial_estimates"][0].get<double>(),
               lv["partial_estimates"][1].get<double>());
  return 0;
}

int run_mse_study(const Common& c, const std::string& input) {
  const auto cfg = resolve(c);
  const auto d = load_or_simulate(input, cfg);
  const BlackScholesModel model(constants_for(cfg, d));
  std::vector<std::size_t> Ms;
  for (double m : cfg.mse_m) Ms.push_back(static_cast<std::size_t>(m));
  const auto study = mse_study(model, cfg.estimator(), d.observations, Ms, cfg.study_replicates,
                               estimator_stream(cfg), c.threads);
  json r = base_report("mse-study", cfg, c);
  r["reference"] = study.reference;
  if (d.truth) r["truth"] = *d.truth;
  json rows = json::array();
  CsvWriter csv(c.out.empty() ? "" : sibling(c.out, "points"), {"M", "mse_mu", "mse_nu2", "cost_ops", "cpu_seconds"});
  for (const auto& row : study.rows) {
    json j{{"M", row.M}, {"mse", row.mse}, {"cost_ops", row.cost_ops}};
    if (!c.omit_timing) j["cpu_seconds"] = row.cpu_seconds;
    rows.push_back(j);
    csv.values(row.M, row.mse[0], row.mse[1], row.cost_ops, c.omit_timing ? 0.0 : row.cpu_seconds);
  }
  r["rows"] = rows;
  r["slope_vs_M"] = {fit_json(study.slope_vs_m[0]), fit_json(study.slope_vs_m[1])};
  r["slope_vs_cost"] = {fit_json(study.slope_vs_cost[0]), fit_json(study.slope_vs_cost[1])};
  write_json(r, c.out);
  return 0;
}

int run_complexity_study(const Common& c, const std::string& input) {
  const auto cfg = resolve(c);
  const auto d = load_or_simulate(input, cfg);
  const BlackScholesModel model(constants_for(cfg, d));
  ComplexitySettings s;
  s.epsilons = cfg.epsilons;
  s.replicates = cfg.study_replicates;
  s.c = cfg.ml_c;
  s.floor_iters = cfg.ml_floor;
  s.level_cap = cfg.ml_level_cap;
  s.burn_in = cfg.burn_in;
  const auto study = complexity_study(model, cfg.prior(), cfg.ml(), d.observations, s, estimator_stream(cfg),
                                      c.threads);
  json r = base_report("complexity-study", cfg, c);
  r["reference"] = study.reference;
  json pts = json::array();
  CsvWriter csv(c.out.empty() ? "" : sibling(c.out, "points"),
                {"method", "epsilon", "L", "mse_mu", "mse_nu2", "cost_ops", "acc_rate"});
  for (const auto& p : study.points) {
    pts.push_back({{"method", p.method},
                   {"epsilon", p.epsilon},
                   {"L", p.L},
                   {"iterations", p.iterations},
                   {"mse", p.mse},
                   {"cost_ops", p.cost_ops},
                   {"acc_rate", p.acceptance}});
    csv.values(p.method, p.epsilon, p.L, p.mse[0], p.mse[1], p.cost_ops, p.acceptance);
  }
  r["points"] = pts;
  json fits = json::array();
  for (std::size_t i = 0; i < study.ml_cost_vs_mse.size(); ++i)
    fits.push_back({{"ml_cost_vs_mse", fit_json(study.ml_cost_vs_mse[i])},
                    {"sl_cost_vs_mse", fit_json(study.sl_cost_vs_mse[i])},
                    {"matched_cost_ratio", study.matched_cost_ratio[i]}});
  r["fits"] = fits;
  write_json(r, c.out);
  return 0;
}

struct ReplicateArgs {
  std::string experiment = "table1";
  IngestArgs ingest;
  std::string theta;  // "mu,nu2" skips estimation
};

int run_replicate(const Common& c, const ReplicateArgs& a, bool window_given) {
  auto cfg = resolve(c);
  if (a.ingest.input.empty()) throw InvalidParameter("cli", "replicate needs --input with the price CSV");
  const auto series = ingest_prices_file(a.ingest.input, ingest_options(cfg, a.ingest, window_given));
  const auto returns = to_returns(series);
  const auto levels = to_levels(series, cfg.observe_log);

  // the state starts at the first observed level; the filter sees the rest
  Observations obs{std::vector<double>(levels.observations.y.begin() + 1, levels.observations.y.end())};
  ModelConstants mc = cfg.constants();
  mc.x0 = levels.observations.y.front();
  mc.T = obs.size();
  const BlackScholesModel model(mc);

  json r = base_report("replicate", cfg, c);
  r["experiment"] = a.experiment;
  r["prices"] = series.closes.size();
  r["first_date"] = series.dates.front();
  r["last_date"] = series.dates.back();
  r["real_summary"] = stats_json(summary(returns.observations.y));

  std::vector<std::pair<std::string, BlackScholesModel::Params>> fitted;
  if (!a.theta.empty()) {
    const auto v = parse_doubles(a.theta);
    fitted.push_back({"given", BlackScholesModel::theta(v.at(0), v.at(1))});
  } else {
    auto ecfg = cfg.estimator();
    ecfg.theta0 = {cfg.mu0, cfg.nu2_0};
    const auto score = umsa_estimate(model, ecfg, obs, cfg.replicates, estimator_stream(cfg), c.threads);
    const auto alloc = allocate(cfg.epsilon, cfg.ml_level_cap, cfg.ml_c, cfg.ml_floor);
    const auto chains = ml_run(model, cfg.prior(), cfg.ml(), alloc.iterations, obs,
                               estimator_stream(cfg).substream(1u << 20), c.threads);
    fitted.push_back({"score_based", score.mean});
    fitted.push_back({"bayesian", ml_posterior_mean(chains, cfg.burn_in)});
    r["bayes_levels"] = bayes_report_levels(chains, cfg.burn_in);
  }

  json table = json::array();
  std::cout << "method        mu          nu2\n";
  for (const auto& [name, th] : fitted) {
    table.push_back({{"method", name}, {"mu", th[0]}, {"nu2", th[1]}});
    std::cout << name << "  " << format_double(th[0]) << "  " << format_double(th[1]) << "\n";
  }
  r["estimates"] = table;

  if (a.experiment == "table2" || a.experiment == "acf") {
    ModelConstants sim = cfg.constants();
    const BlackScholesModel sim_model(sim);
    json sims = json::array();
    CsvWriter csv(c.out.empty() ? "" : sibling(c.out, "acf"), {"series", "lag", "acf", "band"});
    const auto real_acf = acf_abs(returns.observations.y, cfg.acf_lags);
    for (std::size_t h = 0; h < real_acf.lags.size(); ++h)
      csv.values(std::string("real"), real_acf.lags[h], real_acf.values[h], real_acf.band);
    r["real_acf_abs"] = acf_json(real_acf);
    for (std::size_t f = 0; f < fitted.size(); ++f) {
      const auto series_set =
          simulate_return_series(sim_model, fitted[f].second, cfg.ml_level_cap, returns.observations.size(),
                                 cfg.acf_simulations, cfg.clock(), RngStream(cfg.seed, 3).substream(f));
      json per = json::array();
      for (std::size_t s = 0; s < series_set.size(); ++s) {
        const auto acf = acf_abs(series_set[s], cfg.acf_lags);
        per.push_back({{"summary", stats_json(summary(series_set[s]))}, {"acf_abs", acf_json(acf)}});
        if (s == 0)
          for (std::size_t h = 0; h < acf.lags.size(); ++h)
            csv.values(fitted[f].first, acf.lags[h], acf.values[h], acf.band);
      }
      sims.push_back({{"method", fitted[f].first}, {"simulations", per}});
    }
    r["simulated"] = sims;
  } else if (a.experiment != "table1") {
    throw InvalidParameter("cli", "unknown experiment '" + a.experiment + "' (table1 | table2 | acf)");
  }
  write_json(r, c.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and parameter estimation for time-changed SDEs"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON configuration file");
    sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", common.out, "Output path");
    sub->add_flag("--omit-timing", common.omit_timing, "Leave wall-clock fields out of reports");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_common(simulate);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Convert a price CSV into returns");
  add_common(ingest);
  ingest->add_option("--input", ingest_args.input, "Price CSV")->required();
  ingest->add_option("--date-col", ingest_args.opts.date_col, "Date column name");
  ingest->add_option("--close-col", ingest_args.opts.close_col, "Close column name");
  auto* start_opt = ingest->add_option("--start", ingest_args.opts.start, "First date kept (YYYY-MM-DD)");
  auto* end_opt = ingest->add_option("--end", ingest_args.opts.end, "Last date kept (YYYY-MM-DD)");
  ingest->add_flag("--levels", ingest_args.levels, "Write (log-)price levels instead of returns");
  ingest_args.opts.date_col.clear();
  ingest_args.opts.close_col.clear();

  std::string analyze_input;
  std::size_t acf_lags = 0;
  auto* analyze = app.add_subcommand("analyze", "Summary statistics and ACF of a series");
  add_common(analyze);
  analyze->add_option("--input", analyze_input, "Dataset CSV")->required();
  analyze->add_option("--acf-lags", acf_lags, "Maximum ACF lag");

  std::string score_input;
  std::size_t score_reps = 0;
  auto* score = app.add_subcommand("score-estimate", "Randomized score-based estimator");
  add_common(score);
  score->add_option("--input", score_input, "Dataset CSV (default: simulate from the config)");
  score->add_option("--replicates", score_reps, "Number of independent draws M");

  BayesArgs bayes_args;
  auto* bayes = app.add_subcommand("bayes-estimate", "Multilevel PMMH posterior mean");
  add_common(bayes);
  bayes->add_option("--input", bayes_args.input, "Dataset CSV (default: simulate from the config)");
  auto* eps_opt = bayes->add_option("--epsilon", bayes_args.epsilon, "Target tolerance");
  auto* lev_opt = bayes->add_option("--levels", bayes_args.levels, "Finest level L");
  auto* iters_opt = bayes->add_option("--iters", bayes_args.iters, "Comma-separated N_0..N_L");
  eps_opt->excludes(lev_opt);
  lev_opt->needs(iters_opt);
  iters_opt->needs(lev_opt);

  std::string mse_input;
  auto* mse_cmd = app.add_subcommand("mse-study", "MSE of the score-based estimator against M");
  add_common(mse_cmd);
  mse_cmd->add_option("--input", mse_input, "Dataset CSV (default: simulate from the config)");

  std::string cx_input;
  auto* cx = app.add_subcommand("complexity-study", "ML vs SL PMMH cost against MSE");
  add_common(cx);
  cx->add_option("--input", cx_input, "Dataset CSV (default: simulate from the config)");

  ReplicateArgs rep_args;
  auto* rep = app.add_subcommand("replicate", "Real-data estimates, statistics and ACF");
  add_common(rep);
  rep->add_option("--experiment", rep_args.experiment, "table1 | table2 | acf");
  rep->add_option("--input", rep_args.ingest.input, "Price CSV");
  rep->add_option("--date-col", rep_args.ingest.opts.date_col, "Date column name");
  rep->add_option("--close-col", rep_args.ingest.opts.close_col, "Close column name");
  auto* rstart = rep->add_option("--start", rep_args.ingest.opts.start, "First date kept");
  auto* rend = rep->add_option("--end", rep_args.ingest.opts.end, "Last date kept");
  rep->add_option("--theta", rep_args.theta, "Use 'mu,nu2' instead of estimating");
  rep_args.ingest.opts.date_col.clear();
  rep_args.ingest.opts.close_col.clear();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return run_simulate(common);
    if (*ingest) return run_ingest(common, ingest_args, start_opt->count() + end_opt->count() > 0);
    if (*analyze) return run_analyze(common, analyze_input, acf_lags);
    if (*score) return run_score_estimate(common, score_input, score_reps);
    if (*bayes) return run_bayes_estimate(common, bayes_args);
    if (*mse_cmd) return run_mse_study(common, mse_input);
    if (*cx) return run_complexity_study(common, cx_input);
    if (*rep) return run_replicate(common, rep_args, rstart->count() + rend->count() > 0);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& v : e.violations) std::cerr << "  - " << v << "\n";
    return static_cast<int>(e.category());
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
