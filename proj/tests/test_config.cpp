#include <gtest/gtest.h>

#include <string>

#include "rangeshift/config.hpp"

using namespace rangeshift;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, MinimalUnconfinedGetsDefaults) {
  const ExperimentConfig cfg = parse_config(R"({"model": {"case": "unconfined", "A": 0.25, "B": 1, "c": 0.5}})");
  EXPECT_EQ(cfg.model.model_case, Case::Unconfined);
  EXPECT_DOUBLE_EQ(cfg.model.c, 0.5);
  EXPECT_DOUBLE_EQ(cfg.model.theta_clamp, 50.0);
  EXPECT_EQ(cfg.grid.nx, 161u);
  EXPECT_EQ(cfg.mode, Mode::Full);
  EXPECT_DOUBLE_EQ(cfg.model.Bprime, cfg.model.B);
  const std::string echo = emit_config(cfg);
  for (const char* k : {"\"theta_clamp\"", "\"cfl_safety\"", "\"window_fraction\"", "\"growth_factor\""})
    EXPECT_NE(echo.find(k), std::string::npos) << k;
}

TEST(Config, InvariantAndStrictnessErrorsNameTheKey) {
  EXPECT_EQ(key_of(R"({"model": {"case": "unconfined", "epsilon": 0.1}})"), "model.epsilon");
  EXPECT_EQ(key_of(R"({"model": {"case": "confined", "epsilonn": 0.1}})"), "model.epsilonn");
  EXPECT_EQ(key_of(R"({"model": {"case": "confined", "epsilon": "0.1"}})"), "model.epsilon");
  EXPECT_EQ(key_of(R"({"model": {"case": "sideways"}})"), "model.case");
  EXPECT_EQ(key_of(R"({"grid": {"nx": -3}})"), "grid.nx");
  EXPECT_EQ(key_of(R"({"grid": {"nx": 2.5}})"), "grid.nx");
  EXPECT_EQ(key_of(R"({"grid": {"xmin": 5, "xmax": 1}})"), "grid.xmin");
  EXPECT_EQ(key_of(R"({"time": {"cfl_safety": 1.5}})"), "time.cfl_safety");
  EXPECT_EQ(key_of(R"({"modes": "full"})"), "modes");
  EXPECT_EQ(key_of(R"({"mode": "fast"})"), "mode");
  EXPECT_EQ(key_of(R"({"model": {"kernel": {"kind": "constant", "k0": 1}}})"), "model.kernel.k0");
  EXPECT_EQ(key_of(R"({"model": {"Bprime": 2}})"), "model.Bprime");
  EXPECT_EQ(key_of(R"({"model": {"case": "mixed", "epsilon": 0.1}})"), "initial.kind");
  EXPECT_EQ(key_of(R"({"diagnostics": {"harnack": {"x": 19.5, "R": 1}}})"), "diagnostics.harnack");
  EXPECT_EQ(key_of(R"({"initial": {"x0": 100}})"), "initial.x0");
  EXPECT_EQ(key_of("{not json"), "");
}

TEST(Config, RoundTrip) {
  const ExperimentConfig cfg = parse_config(R"({
    "model": {"case": "mixed", "A": 0.3, "B": 1.5, "Bprime": 0.5, "epsilon": 0.02, "c": 0.7,
              "kernel": {"kind": "gaussian", "k0": 0.9, "sigma": 2.0, "floor": 0.05}},
    "grid": {"xmin": -30, "xmax": 10, "ymin": -40, "ymax": 12, "nx": 81, "ny": 105},
    "time": {"t_end": 12.5, "record_every": 0.25},
    "initial": {"kind": "cos2", "x0": -1, "y0": -1.5, "sigma": 1.5, "amplitude": 0.1, "mu0": 0.4},
    "diagnostics": {"eta": 0.003, "harnack": null},
    "eigen": {"h": 0.25, "tol": 1e-5},
    "mode": "linearized"})");
  EXPECT_FALSE(cfg.diagnostics.harnack);
  EXPECT_EQ(parse_config(emit_config(cfg)), cfg);
  const ExperimentConfig plain = parse_config("{}");
  EXPECT_EQ(parse_config(emit_config(plain)), plain);
}

TEST(Config, DottedKeyOverride) {
  const ExperimentConfig base = parse_config(R"({"model": {"case": "confined", "epsilon": 0.01}})");
  EXPECT_DOUBLE_EQ(with_value(base, "model.c", 1.25).model.c, 1.25);
  EXPECT_DOUBLE_EQ(*with_value(base, "diagnostics.eta", 0.02).diagnostics.eta, 0.02);
  EXPECT_EQ(with_value(base, "grid.nx", 201).grid.nx, 201u);
  EXPECT_THROW(with_value(base, "model.case", 1), ConfigError);
  EXPECT_THROW(with_value(base, "model.nope", 1), ConfigError);
  EXPECT_THROW(with_value(base, "nothing.c", 1), ConfigError);
  EXPECT_THROW(with_value(base, "model.epsilon", -1), ConfigError);
}
