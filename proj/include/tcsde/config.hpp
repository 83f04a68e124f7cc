#pragma once

// Flat key/value run configuration: JSON document in, every key checked
// against a registry, environment overrides under the TCSDE_ prefix, and
// conversion into the model, UMSA and PMMH settings.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tcsde/error.hpp"
#include "tcsde/mlpmmh.hpp"
#include "tcsde/model.hpp"
#include "tcsde/smc.hpp"
#include "tcsde/subordinator.hpp"
#include "tcsde/umsa.hpp"

namespace tcsde {

inline constexpr int config_schema_version = 1;
inline constexpr const char* env_prefix = "TCSDE_";

struct RunConfig {
  int schema_version = config_schema_version;
  unsigned long long seed = 1;

  // model constants
  double alpha = 0.75;
  double sigma0 = 1.0;
  double x0 = 1.0;
  std::size_t T = 100;
  double init_log_var = 1e-4;
  double op_time_step = 0.1;  // operational-time step as a fraction of Delta_l
  bool observe_log = true;

  // synthetic data
  double mu_true = 0.10;
  double nu2_true = 0.10;
  int data_level = 8;

  // shared estimator settings
  std::size_t particles = 100;
  std::string resampling = "multinomial";
  double mu0 = 0.0;
  double nu2_0 = 1.0;
  double nu2_floor = 1e-6;
  // projection box for score-based iterates: |mu| <= mu_max, nu2 <= nu2_max
  double mu_max = 1e6;
  double nu2_max = 1e6;

  // score-based estimator
  std::string mutation = "cpf";
  int l_min = 3;
  int l_max = 8;
  double level_rate = 1.5;
  int p_min = 0;
  int p_cap = 5;
  int level_cap = 8;
  int p_tail_max = 7;
  std::size_t horizon_base = 5;
  // per-observation gains: the schedule uses step_gain / T
  double step_gain_mu = 2.5;
  double step_gain_nu2 = 1.25;
  double step_offset = 10.0;
  double step_exponent = 0.8;
  double divergence_bound = 1e6;
  std::size_t replicates = 32;

  // Bayesian estimator
  double prior_mu_mean = 0.0;
  double prior_mu_var = 1.0;
  double prior_nu2_mean = 1.0;
  double prior_nu2_var = 1.0;
  double proposal_var = 0.1;
  double burn_in = 0.2;
  double ml_c = 1.0;
  std::size_t ml_floor = 100;
  int ml_level_cap = 8;
  double epsilon = 0.125;

  // studies
  std::vector<double> mse_m{2, 4, 8, 16, 32};
  std::size_t study_replicates = 50;
  std::vector<double> epsilons{0.25, 0.125, 0.0625};

  // real data
  std::string date_col = "Date";
  std::string close_col = "Close";
  std::string window_start = "2021-11-01";
  std::string window_end = "2022-10-31";
  std::size_t acf_lags = 20;
  std::size_t acf_simulations = 20;

  ModelConstants constants() const {
    ModelConstants c;
    c.alpha = alpha;
    c.sigma0 = sigma0;
    c.x0 = x0;
    c.T = T;
    c.init_log_var = init_log_var;
    return c;
  }

  ClockSpec clock() const { return ClockSpec{Subordinator::Kind::stable, alpha, op_time_step}; }

  ResamplingScheme resampling_scheme() const {
    return resampling == "systematic" ? ResamplingScheme::systematic : ResamplingScheme::multinomial;
  }

  EstimatorConfig estimator() const {
    EstimatorConfig e;
    e.l_min = l_min;
    e.l_max = l_max;
    e.level_rate = level_rate;
    e.p_min = p_min;
    e.p_cap = p_cap;
    e.level_cap = level_cap;
    e.p_tail_max = p_tail_max;
    e.horizon_base = horizon_base;
    e.schedule.gains = {step_gain_mu / static_cast<double>(T), step_gain_nu2 / static_cast<double>(T)};
    e.schedule.offset = step_offset;
    e.schedule.exponent = step_exponent;
    e.particles = particles;
    e.theta0 = {mu0, nu2_0};
    e.lower = {-mu_max, nu2_floor};
    e.upper = {mu_max, nu2_max};
    e.divergence_bound = divergence_bound;
    e.mutation = mutation == "prior" ? Mutation::prior : Mutation::cpf;
    e.clock = clock();
    e.resampling = resampling_scheme();
    return e;
  }

  Prior prior() const { return Prior{{prior_mu_mean, prior_nu2_mean}, {prior_mu_var, prior_nu2_var}}; }

  MlConfig ml() const {
    MlConfig m;
    m.pmmh.particles = particles;
    m.pmmh.proposal_sd = {std::sqrt(proposal_var), std::sqrt(proposal_var)};
    m.pmmh.lower = {-std::numeric_limits<double>::infinity(), nu2_floor};
    m.pmmh.resampling = resampling_scheme();
    m.theta0 = {mu0, nu2_0};
    m.burn_in = burn_in;
    m.clock = clock();
    return m;
  }
};

namespace detail {

using FieldPtr =
    std::variant<int RunConfig::*, unsigned long long RunConfig::*, std::size_t RunConfig::*,
                 double RunConfig::*, bool RunConfig::*, std::string RunConfig::*,
                 std::vector<double> RunConfig::*>;

inline const std::map<std::string, FieldPtr>& config_fields() {
  static const std::map<std::string, FieldPtr> fields{
      {"schema_version", &RunConfig::schema_version},
      {"seed", &RunConfig::seed},
      {"alpha", &RunConfig::alpha},
      {"sigma0", &RunConfig::sigma0},
      {"x0", &RunConfig::x0},
      {"T", &RunConfig::T},
      {"init_log_var", &RunConfig::init_log_var},
      {"op_time_step", &RunConfig::op_time_step},
      {"observe_log", &RunConfig::observe_log},
      {"mu_true", &RunConfig::mu_true},
      {"nu2_true", &RunConfig::nu2_true},
      {"data_level", &RunConfig::data_level},
      {"particles", &RunConfig::particles},
      {"resampling", &RunConfig::resampling},
      {"mu0", &RunConfig::mu0},
      {"nu2_0", &RunConfig::nu2_0},
      {"nu2_floor", &RunConfig::nu2_floor},
      {"mu_max", &RunConfig::mu_max},
      {"nu2_max", &RunConfig::nu2_max},
      {"mutation", &RunConfig::mutation},
      {"l_min", &RunConfig::l_min},
      {"l_max", &RunConfig::l_max},
      {"level_rate", &RunConfig::level_rate},
      {"p_min", &RunConfig::p_min},
      {"p_cap", &RunConfig::p_cap},
      {"level_cap", &RunConfig::level_cap},
      {"p_tail_max", &RunConfig::p_tail_max},
      {"horizon_base", &RunConfig::horizon_base},
      {"step_gain_mu", &RunConfig::step_gain_mu},
      {"step_gain_nu2", &RunConfig::step_gain_nu2},
      {"step_offset", &RunConfig::step_offset},
      {"step_exponent", &RunConfig::step_exponent},
      {"divergence_bound", &RunConfig::divergence_bound},
      {"replicates", &RunConfig::replicates},
      {"prior_mu_mean", &RunConfig::prior_mu_mean},
      {"prior_mu_var", &RunConfig::prior_mu_var},
      {"prior_nu2_mean", &RunConfig::prior_nu2_mean},
      {"prior_nu2_var", &RunConfig::prior_nu2_var},
      {"proposal_var", &RunConfig::proposal_var},
      {"burn_in", &RunConfig::burn_in},
      {"ml_c", &RunConfig::ml_c},
      {"ml_floor", &RunConfig::ml_floor},
      {"ml_level_cap", &RunConfig::ml_level_cap},
      {"epsilon", &RunConfig::epsilon},
      {"mse_m", &RunConfig::mse_m},
      {"study_replicates", &RunConfig::study_replicates},
      {"epsilons", &RunConfig::epsilons},
      {"date_col", &RunConfig::date_col},
      {"close_col", &RunConfig::close_col},
      {"window_start", &RunConfig::window_start},
      {"window_end", &RunConfig::window_end},
      {"acf_lags", &RunConfig::acf_lags},
      {"acf_simulations", &RunConfig::acf_simulations},
  };
  return fields;
}

inline std::string assign_field(RunConfig& cfg, const std::string& key, const FieldPtr& field,
                                const nlohmann::json& value) {
  using nlohmann::json;
  return std::visit(
      [&](auto ptr) -> std::string {
        using T = std::remove_reference_t<decltype(cfg.*ptr)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (!value.is_boolean()) return key + ": expected a boolean";
          cfg.*ptr = value.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!value.is_string()) return key + ": expected a string";
          cfg.*ptr = value.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
          if (!value.is_number()) return key + ": expected a number";
          cfg.*ptr = value.get<double>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          if (!value.is_array()) return key + ": expected an array of numbers";
          std::vector<double> out;
          for (const auto& v : value) {
            if (!v.is_number()) return key + ": expected an array of numbers";
            out.push_back(v.get<double>());
          }
          cfg.*ptr = out;
        } else if constexpr (std::is_same_v<T, int>) {
          if (!value.is_number_integer()) return key + ": expected an integer";
          cfg.*ptr = value.get<int>();
        } else {
          if (!value.is_number_integer() || value.get<long long>() < 0)
            return key + ": expected a non-negative integer";
          cfg.*ptr = value.get<T>();
        }
        return {};
      },
      field);
}

inline nlohmann::json field_value(const RunConfig& cfg, const FieldPtr& field) {
  return std::visit([&](auto ptr) { return nlohmann::json(cfg.*ptr); }, field);
}

/// Environment text is read as JSON when it parses, otherwise as a string.
inline nlohmann::json parse_env_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return nlohmann::json(text);
  }
}

inline std::string env_name(const std::string& key) {
  std::string out = env_prefix;
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace detail

/// Cross-field semantic checks; returns every violation.
inline std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  need(c.schema_version == config_schema_version,
       "schema_version: unsupported value " + std::to_string(c.schema_version));
  need(c.alpha > 0.0 && c.alpha < 1.0, "alpha: must lie in (0,1)");
  need(c.sigma0 > 0.0, "sigma0: must be positive");
  need(c.x0 > 0.0, "x0: must be positive");
  need(c.T >= 1, "T: must be at least 1");
  need(c.init_log_var >= 0.0, "init_log_var: must be non-negative");
  need(c.op_time_step > 0.0, "op_time_step: must be positive");
  need(c.nu2_true >= 0.0, "nu2_true: must be non-negative");
  need(c.data_level >= 0, "data_level: must be non-negative");
  need(c.particles >= 2, "particles: must be at least 2");
  need(c.resampling == "multinomial" || c.resampling == "systematic",
       "resampling: must be 'multinomial' or 'systematic'");
  need(c.mutation == "cpf" || c.mutation == "prior", "mutation: must be 'cpf' or 'prior'");
  need(c.nu2_0 > 0.0, "nu2_0: must be positive");
  need(c.nu2_floor > 0.0, "nu2_floor: must be positive");
  need(c.mu_max > 0.0, "mu_max: must be positive");
  need(c.nu2_max > c.nu2_floor, "nu2_max: must exceed nu2_floor");
  need(c.l_min >= 0 && c.l_max >= c.l_min, "l_min/l_max: need 0 <= l_min <= l_max");
  need(c.p_min == 0 || c.p_min == 1, "p_min: must be 0 or 1");
  need(c.horizon_base >= 1, "horizon_base: must be at least 1");
  need(c.step_gain_mu >= 0.0 && c.step_gain_nu2 >= 0.0, "step gains: must be non-negative");
  need(c.step_exponent > 0.5 && c.step_exponent <= 1.0, "step_exponent: must lie in (0.5, 1]");
  need(c.step_offset >= 0.0, "step_offset: must be non-negative");
  need(c.divergence_bound > 0.0, "divergence_bound: must be positive");
  need(c.replicates >= 1, "replicates: must be at least 1");
  need(c.prior_mu_var > 0.0 && c.prior_nu2_var > 0.0, "prior variances: must be positive");
  need(c.proposal_var >= 0.0, "proposal_var: must be non-negative");
  need(c.burn_in >= 0.0 && c.burn_in < 1.0, "burn_in: must lie in [0,1)");
  need(c.ml_c > 0.0, "ml_c: must be positive");
  need(c.ml_level_cap >= 0, "ml_level_cap: must be non-negative");
  need(c.epsilon > 0.0, "epsilon: must be positive");
  for (double m : c.mse_m) need(m >= 1.0 && m == std::floor(m), "mse_m: entries must be positive integers");
  need(!c.mse_m.empty(), "mse_m: must not be empty");
  for (double e : c.epsilons) need(e > 0.0, "epsilons: entries must be positive");
  need(!c.epsilons.empty(), "epsilons: must not be empty");
  need(c.study_replicates >= 2, "study_replicates: must be at least 2");
  need(c.acf_lags >= 1, "acf_lags: must be at least 1");
  need(c.acf_simulations >= 1, "acf_simulations: must be at least 1");
  if (v.empty()) {
    try {
      c.estimator().validate(2);
    } catch (const ConfigError& e) {
      v.insert(v.end(), e.violations.begin(), e.violations.end());
    }
  }
  return v;
}

/// Applies a JSON object, then TCSDE_<KEY> environment overrides, then
/// validates; unknown keys and all type or range violations are reported
/// together.
inline RunConfig load_config(const nlohmann::json& doc,
                             const std::function<const char*(const char*)>& getenv_fn = std::getenv) {
  RunConfig cfg;
  std::vector<std::string> violations;
  const auto& fields = detail::config_fields();
  if (!doc.is_null() && !doc.is_object()) throw ConfigError({"configuration must be a JSON object"});
  if (doc.is_object()) {
    for (const auto& [key, value] : doc.items()) {
      const auto it = fields.find(key);
      if (it == fields.end()) {
        violations.push_back(key + ": unknown key");
        continue;
      }
      if (auto err = detail::assign_field(cfg, key, it->second, value); !err.empty())
        violations.push_back(err);
    }
  }
  for (const auto& [key, field] : fields) {
    if (const char* text = getenv_fn(detail::env_name(key).c_str())) {
      if (auto err = detail::assign_field(cfg, key, field, detail::parse_env_value(text)); !err.empty())
        violations.push_back(detail::env_name(key) + " -> " + err);
    }
  }
  const auto semantic = validate(cfg);
  violations.insert(violations.end(), semantic.begin(), semantic.end());
  if (!violations.empty()) throw ConfigError(violations);
  return cfg;
}

inline RunConfig load_config_file(const std::string& path,
                                  const std::function<const char*(const char*)>& getenv_fn = std::getenv) {
  nlohmann::json doc = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("config", "cannot open '" + path + "'");
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
  }
  return load_config(doc, getenv_fn);
}

/// The resolved configuration as a JSON object (every key).
inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, field] : detail::config_fields()) out[key] = detail::field_value(cfg, field);
  return out;
}

}  // namespace tcsde
