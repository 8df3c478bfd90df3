// Command-line front end: eigen, speeds, simulate, classify, sweep.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rangeshift/rangeshift.hpp"

namespace fs = std::filesystem;
using namespace rangeshift;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::size_t threads = 1;
  unsigned long long seed = 0;  // reserved: every run is deterministic
};

ExperimentConfig require_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config", "a config file is required");
  return load_config(g.config);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    cell = cell.substr(b, cell.find_last_not_of(" \t") - b + 1);
    try {
      const auto v = csv::parse_cell(cell);
      if (v) out.push_back(*v);
    } catch (const ConfigError&) {
      throw ConfigError(flag, "malformed number '" + cell + "'");
    }
  }
  return out;
}

int cmd_eigen(const Globals& g) {
  const ExperimentConfig cfg = require_config(g);
  const Predictions p = predict(cfg);
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("case", to_string(cfg.model.model_case));
  kv.emplace_back("lambda_inf", csv::format(p.eigen.lambda));
  kv.emplace_back("lambda_u_inf", csv::format(p.lambda_u));
  kv.emplace_back("essential_bottom", p.eigen.essential_bottom ? "1" : "0");
  kv.emplace_back("residual", csv::format(p.eigen.result.residual));
  for (std::size_t k = 0; k < p.eigen.radii.size(); ++k)
    kv.emplace_back("lambda_R=" + csv::format(p.eigen.radii[k]), csv::format(p.eigen.lambdas[k]));
  std::cout << "key,value\n";
  for (const auto& [k, v] : kv) std::cout << k << ',' << v << '\n';
  if (!g.out.empty()) {
    io::ensure_dir(g.out);
    io::write_summary(fs::path(g.out) / "eigen.csv", kv);
  }
  return exit_code::ok;
}

int cmd_speeds(const Globals& g, const std::string& c_list) {
  const ExperimentConfig cfg = require_config(g);
  std::vector<double> cs = parse_list(c_list, "--c-list");
  if (c_list.empty()) cs.push_back(cfg.model.c);
  const Predictions base = predict(cfg);
  std::ostringstream table;
  table << "c,lambda_inf,lambda_u_inf,c_star,c_star_star,c_u_star_star,omega_x_minus,omega_x_plus,"
           "omega_y_minus,omega_y_plus,regime,indeterminate\n";
  for (double c : cs) {
    if (!(c >= 0)) throw ConfigError("--c-list", "climate speeds must be nonnegative");
    ModelParams m = cfg.model;
    m.c = c;
    const SpeedSet s = compute_speeds(m, base.eigen.lambda, base.lambda_u);
    const RegimePrediction r = predict_regime(m.model_case, c, s);
    table << csv::format(c) << ',' << csv::format(s.lambda_inf) << ',' << csv::format(s.lambda_u_inf) << ','
          << csv::format(s.c_star) << ',' << csv::format(s.c_star_star) << ',' << csv::format(s.c_u_star_star)
          << ',' << csv::format(s.omega_x_minus) << ',' << csv::format(s.omega_x_plus) << ','
          << csv::format(s.omega_y_minus) << ',' << csv::format(s.omega_y_plus) << ',' << to_string(r.regime)
          << ',' << (r.indeterminate ? 1 : 0) << '\n';
  }
  std::cout << table.str();
  if (!g.out.empty()) {
    io::ensure_dir(g.out);
    auto out = io::open(fs::path(g.out) / "speeds.csv");
    out << table.str();
  }
  return exit_code::ok;
}

int cmd_simulate(const Globals& g) {
  const ExperimentConfig cfg = require_config(g);
  if (g.out.empty()) throw ConfigError("--out", "an output directory is required");
  const ExperimentReport r = run_experiment(cfg, fs::path(g.out), g.threads);
  for (const auto& w : r.trajectory.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "predicted " << to_string(r.predictions.regime.regime) << (r.predictions.regime.indeterminate ? " (tie)" : "")
            << ", measured " << to_string(r.measurements.classification.regime) << '\n';
  return r.exit_status;
}

int cmd_classify(const Globals& g, const std::string& in_dir) {
  const ExperimentConfig cfg = require_config(g);
  const fs::path dir = in_dir.empty() ? fs::path(g.out) : fs::path(in_dir);
  if (dir.empty()) throw ConfigError("--in", "a run directory is required");
  const fs::path ts = dir / "timeseries.csv";
  if (!fs::exists(ts)) throw ConfigError(ts.string(), "file not found");
  const Trajectory tr = io::read_timeseries(ts);
  const Classification cl = classify_outcome(tr, cfg.model.model_case, make_thresholds(cfg));
  std::cout << "key,value\nmeasured_regime," << to_string(cl.regime) << "\nevidence," << cl.evidence << '\n';
  return cl.regime == Regime::Indeterminate ? exit_code::indeterminate : exit_code::ok;
}

int cmd_sweep(const Globals& g, const std::string& param, const std::string& values) {
  const ExperimentConfig cfg = require_config(g);
  if (g.out.empty()) throw ConfigError("--out", "an output directory is required");
  const auto rows = sweep(cfg, param, parse_list(values, "--values"), fs::path(g.out), g.threads);
  for (const auto& row : rows)
    std::cout << param << '=' << csv::format(row.value) << ": " << row.status << ' '
              << (row.predicted ? to_string(*row.predicted) : "-") << " / "
              << (row.measured ? to_string(*row.measured) : "-") << '\n';
  return exit_code::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range shifts of a population structured by space and trait under climate change"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Reserved; runs are deterministic");

  auto* eigen = app.add_subcommand("eigen", "Generalised principal eigenvalue(s)");
  std::string c_list;
  auto* speeds = app.add_subcommand("speeds", "Critical speeds, spreading speeds and predicted regimes");
  speeds->add_option("--c-list", c_list, "Comma-separated climate speeds (default: model.c)");
  auto* simulate = app.add_subcommand("simulate", "Run one experiment and write its CSV outputs");
  std::string in_dir;
  auto* classify = app.add_subcommand("classify", "Classify an existing run from its timeseries.csv");
  classify->add_option("--in", in_dir, "Run directory (default: --out)");
  std::string param, values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per value of a numeric key");
  sweep_cmd->add_option("--param", param, "Dotted config key, e.g. model.c")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values (may be empty)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::config;
  }

  try {
    if (*eigen) return cmd_eigen(g);
    if (*speeds) return cmd_speeds(g, c_list);
    if (*simulate) return cmd_simulate(g);
    if (*classify) return cmd_classify(g, in_dir);
    if (*sweep_cmd) return cmd_sweep(g, param, values);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_code::config;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_code::numerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_code::numerical;
  } catch (const DiagnosticError& e) {
    std::cerr << "diagnostic failure: " << e.what() << '\n';
    return exit_code::numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::numerical;
  }
  return exit_code::ok;
}
