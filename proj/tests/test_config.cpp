#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "tcsde/config.hpp"

using namespace tcsde;
using nlohmann::json;

namespace {

const char* no_env(const char*) { return nullptr; }

struct FakeEnv {
  std::map<std::string, std::string> vars;
  std::function<const char*(const char*)> fn() const {
    return [this](const char* name) -> const char* {
      const auto it = vars.find(name);
      return it == vars.end() ? nullptr : it->second.c_str();
    };
  }
};

}  // namespace

TEST(Config, DefaultsMatchSyntheticRegime) {
  const auto c = load_config(json::object(), no_env);
  EXPECT_EQ(c.schema_version, 1);
  EXPECT_EQ(c.alpha, 0.75);
  EXPECT_EQ(c.sigma0, 1.0);
  EXPECT_EQ(c.T, 100u);
  EXPECT_EQ(c.particles, 100u);
  EXPECT_EQ(c.mu_true, 0.10);
  EXPECT_EQ(c.nu2_true, 0.10);
  EXPECT_EQ(c.data_level, 8);

  const auto e = c.estimator();
  EXPECT_EQ(e.l_min, 3);
  EXPECT_EQ(e.l_max, 8);
  EXPECT_EQ(e.level_rate, 1.5);
  EXPECT_EQ(e.horizon_base, 5u);
  EXPECT_EQ(e.mutation, Mutation::cpf);
  EXPECT_DOUBLE_EQ(e.schedule.gains[0], 2.5 / 100.0);
  EXPECT_DOUBLE_EQ(e.schedule.gains[1], 1.25 / 100.0);
  EXPECT_EQ(e.theta0[1], 1.0);
  EXPECT_NO_THROW(e.validate(2));

  const auto p = c.ml();
  EXPECT_DOUBLE_EQ(p.pmmh.proposal_sd[0] * p.pmmh.proposal_sd[0], 0.1);
  EXPECT_EQ(p.theta0, e.theta0);
}

TEST(Config, NullDocumentGivesDefaults) {
  EXPECT_EQ(to_json(load_config(json(), no_env)), to_json(RunConfig{}));
}

TEST(Config, UnknownKeyRejected) {
  try {
    load_config(json{{"particels", 50}}, no_env);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.violations.size(), 1u);
    EXPECT_NE(e.violations[0].find("particels"), std::string::npos);
  }
}

TEST(Config, AllViolationsCollected) {
  try {
    load_config(json{{"alpha", 1.5}, {"particles", 1}, {"resampling", "stratified"}}, no_env);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations.size(), 3u);
  }
  try {
    load_config(json{{"alpha", "high"}, {"T", -3}, {"bogus", 1}}, no_env);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations.size(), 3u);
  }
  try {
    load_config(json{{"alpha", 2.0}, {"particles", 1}, {"foo", 3}}, no_env);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations.size(), 3u);
  }
}

TEST(Config, NonObjectDocumentRejected) {
  EXPECT_THROW(load_config(json::array({1, 2}), no_env), ConfigError);
}

TEST(Config, EnvironmentOverridesDocument) {
  FakeEnv env;
  env.vars["TCSDE_PARTICLES"] = "64";
  env.vars["TCSDE_RESAMPLING"] = "systematic";
  env.vars["TCSDE_MSE_M"] = "[2, 8]";
  const auto c = load_config(json{{"particles", 32}, {"seed", 9}}, env.fn());
  EXPECT_EQ(c.particles, 64u);
  EXPECT_EQ(c.resampling_scheme(), ResamplingScheme::systematic);
  EXPECT_EQ(c.mse_m, (std::vector<double>{2.0, 8.0}));
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, BadEnvironmentValueReported) {
  FakeEnv env;
  env.vars["TCSDE_ALPHA"] = "abc";
  try {
    load_config(json::object(), env.fn());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.violations.size(), 1u);
    EXPECT_NE(e.violations[0].find("TCSDE_ALPHA"), std::string::npos);
  }
}

TEST(Config, JsonRoundTrip) {
  const auto c = load_config(json{{"particles", 77}, {"epsilons", {0.5, 0.25}}, {"observe_log", false}}, no_env);
  const auto doc = to_json(c);
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc.size(), detail::config_fields().size());
  const auto back = load_config(doc, no_env);
  EXPECT_EQ(to_json(back), doc);
  EXPECT_EQ(back.particles, 77u);
  EXPECT_FALSE(back.observe_log);
}

TEST(Config, UnsupportedSchemaVersion) {
  EXPECT_THROW(load_config(json{{"schema_version", 2}}, no_env), ConfigError);
}

TEST(Config, EstimatorLevelChecksSurface) {
  // p_min = 1 leaves level 8 with an empty horizon support
  EXPECT_THROW(load_config(json{{"p_min", 1}}, no_env), ConfigError);
  EXPECT_NO_THROW(load_config(json{{"p_min", 1}, {"l_max", 7}}, no_env));
}

TEST(Config, FileLoading) {
  const auto dir = std::filesystem::temp_directory_path() / "tcsde_config_test";
  std::filesystem::create_directories(dir);
  const auto good = (dir / "good.json").string(), bad = (dir / "bad.json").string();
  std::ofstream(good) << R"({"T": 25, "l_max": 6})";
  std::ofstream(bad) << "{ not json";
  const auto c = load_config_file(good, no_env);
  EXPECT_EQ(c.T, 25u);
  EXPECT_EQ(c.l_max, 6);
  EXPECT_THROW(load_config_file(bad, no_env), ConfigError);
  EXPECT_THROW(load_config_file((dir / "missing.json").string(), no_env), IoError);
  EXPECT_EQ(load_config_file("", no_env).T, 100u);
  std::filesystem::remove_all(dir);
}

TEST(Config, ProjectionBoxReachesEstimator) {
  const auto e = load_config(json{{"mu_max", 2.0}, {"nu2_floor", 0.01}, {"nu2_max", 2.0}}, no_env).estimator();
  EXPECT_EQ(e.lower, (std::vector<double>{-2.0, 0.01}));
  EXPECT_EQ(e.upper, (std::vector<double>{2.0, 2.0}));
  EXPECT_THROW(load_config(json{{"nu2_max", 1e-7}}, no_env), ConfigError);
}
