// Command-line front end: solve-nash, solve-stackelberg, run-timeline,
// sensitivity, curves.  Exit status 0 on success, 1 when a solver fails to
// converge (or a fixture check fails), 2 on configuration errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oligo/scenario.hpp"

namespace fs = std::filesystem;
using namespace oligo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
  std::string config;
  std::string out;
  std::string format;
  std::optional<double> tol;
  std::optional<int> max_sweeps;
  std::optional<std::uint64_t> seed;
  bool strict_paper = false;
  int period = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Scenario JSON file")->required();
  cmd->add_option("--out", o.out, "Output directory (stdout when omitted)");
  cmd->add_option("--format", o.format, "Report format: csv or md");
  cmd->add_option("--tol", o.tol, "KKT residual tolerance");
  cmd->add_option("--max-sweeps", o.max_sweeps, "Gauss-Seidel sweep limit");
  cmd->add_option("--seed", o.seed, "Seed for randomized sweep orders");
  cmd->add_flag("--strict-paper", o.strict_paper,
                "Compare against the expected tables in the config; requires reference parameters");
}

ScenarioConfig load(const CommonOptions& o) {
  ScenarioConfig cfg = load_config(o.config);
  if (o.tol) cfg.solver.tol_residual = *o.tol;
  if (o.max_sweeps) cfg.solver.max_sweeps = *o.max_sweeps;
  if (o.seed) cfg.solver.seed = *o.seed;
  if (!o.format.empty()) cfg.outputs.format = parse_format(o.format);
  if (!o.out.empty()) cfg.outputs.dir = o.out;
  if (o.strict_paper && cfg.reference_placeholder)
    throw ConfigError("--strict-paper: the config carries placeholder reference parameters");
  cfg.validate();
  return cfg;
}

std::string extension(ReportFormat f) { return f == ReportFormat::kCsv ? ".csv" : ".md"; }

// Writes `text` to <dir>/<name> or to stdout when no directory is set.
void deliver(const ScenarioConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.outputs.dir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(cfg.outputs.dir);
  const fs::path path = fs::path(cfg.outputs.dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  std::cerr << "wrote " << path.string() << "\n";
}

int strict_check(const ScenarioConfig& cfg, const TimelineResult& r) {
  const bool cournot = r.mode == Mode::kCournot;
  const auto& expected = cournot ? cfg.expected_cournot : cfg.expected_stackelberg;
  if (expected.empty()) {
    std::cerr << "--strict-paper: config has no expected table for mode " << to_string(r.mode) << "\n";
    return kExitConfig;
  }
  const double tol_x = cournot ? 0.05 : 0.1;
  const double tol_profit = cournot ? 0.5 : 1.0;
  const auto mismatches = compare_expected(r, expected, tol_x, tol_profit);
  for (const auto& m : mismatches) {
    std::cerr << "mismatch t=" << m.t << " firm " << m.firm << " " << m.field << ": expected "
              << m.expected << ", got " << m.actual << "\n";
  }
  std::cerr << "fixture check: " << (mismatches.empty() ? "PASS" : "FAIL") << "\n";
  return mismatches.empty() ? kExitOk : kExitSolver;
}

int report_timeline(const ScenarioConfig& cfg, const TimelineResult& r, const std::string& stem,
                    bool strict) {
  std::ostringstream os;
  emit_report(r, cfg.outputs.format, os);
  deliver(cfg, stem + extension(cfg.outputs.format), os.str());
  int sweeps = 0;
  for (const auto& p : r.periods) sweeps += p.iterations;
  std::cerr << "periods: " << r.periods.size() << ", iterations: " << sweeps
            << ", wall time: " << r.wall_seconds << " s\n";
  if (!r.completed) {
    std::cerr << "solver did not converge in period " << r.halted_period << "\n";
    return kExitSolver;
  }
  return strict ? strict_check(cfg, r) : kExitOk;
}

int single_period(const CommonOptions& o, Mode mode, int starts) {
  ScenarioConfig cfg = load(o);
  cfg.mode = mode;
  if (starts > 0) cfg.leader_starts = starts;
  cfg.validate();
  TimelineResult r;
  r.mode = mode;
  r.leader_index = cfg.leader_index;
  r.periods.push_back(solve_period(cfg, cfg.market_for_period(o.period), o.period));
  r.completed = r.periods.back().converged;
  r.halted_period = r.completed ? 0 : o.period;
  const std::string stem = mode == Mode::kCournot ? "nash" : "stackelberg";
  return report_timeline(cfg, r, stem, false);
}

EquilibriumResult solve_cournot_period(const ScenarioConfig& cfg, int period) {
  const Market m = cfg.market_for_period(period);
  return gauss_seidel(m, cfg.solver);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cournot-Nash and Stackelberg equilibria with costs of change"};
  app.require_subcommand(1);

  CommonOptions nash_o, stack_o, timeline_o, sens_o, curves_o;
  std::string mode_override;
  int samples = 200;
  std::optional<double> window;
  int starts = 0;

  auto* nash = app.add_subcommand("solve-nash", "Cournot-Nash equilibrium of one period");
  add_common(nash, nash_o);
  nash->add_option("--period", nash_o.period, "Period of b_schedule to solve (1-based)");

  auto* stack = app.add_subcommand("solve-stackelberg", "Stackelberg equilibrium of one period");
  add_common(stack, stack_o);
  stack->add_option("--period", stack_o.period, "Period of b_schedule to solve (1-based)");
  stack->add_option("--starts", starts, "Outer multi-start count");

  auto* timeline = app.add_subcommand("run-timeline", "Evolve the market over every scheduled period");
  add_common(timeline, timeline_o);
  timeline->add_option("--mode", mode_override, "Override the config mode: cournot or stackelberg");
  timeline->add_option("--starts", starts, "Outer multi-start count (stackelberg)");

  auto* sens = app.add_subcommand("sensitivity", "Localization report and directional responses");
  add_common(sens, sens_o);
  sens->add_option("--period", sens_o.period, "Period of b_schedule to analyse (1-based)");

  auto* curves = app.add_subcommand("curves", "Sample every firm's total cost around the equilibrium");
  add_common(curves, curves_o);
  curves->add_option("--period", curves_o.period, "Period of b_schedule to solve (1-based)");
  curves->add_option("--samples", samples, "Uniform samples per firm");
  curves->add_option("--window", window, "Half-width of the sampled interval around x_i");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*nash) return single_period(nash_o, Mode::kCournot, 0);

    if (*stack) return single_period(stack_o, Mode::kStackelberg, starts);

    if (*timeline) {
      ScenarioConfig cfg = load(timeline_o);
      if (!mode_override.empty()) cfg.mode = parse_mode(mode_override);
      if (starts > 0) cfg.leader_starts = starts;
      cfg.validate();
      const TimelineResult r = run_timeline(cfg);
      return report_timeline(cfg, r, cfg.outputs.stem, timeline_o.strict_paper);
    }

    if (*sens) {
      const ScenarioConfig cfg = load(sens_o);
      const EquilibriumResult eq = solve_cournot_period(cfg, sens_o.period);
      if (!eq.converged) {
        std::cerr << "equilibrium did not converge (residual " << eq.residual << ")\n";
        return kExitSolver;
      }
      const Market m = cfg.market_for_period(sens_o.period);
      const LocalizationReport rep = check_localization(m, eq.x);
      std::vector<DirectionalResponse> responses;
      const auto l = static_cast<Eigen::Index>(m.size());
      if (cfg.directions.empty()) {
        for (Eigen::Index j = 0; j <= l; ++j) {
          responses.push_back(graphical_derivative(m, eq.x, Vector::Unit(l + 1, j)));
        }
      } else {
        for (const auto& d : cfg.directions) {
          responses.push_back(
              graphical_derivative(m, eq.x, Eigen::Map<const Vector>(d.data(), l + 1)));
        }
      }
      std::ostringstream os;
      emit_sensitivity(rep, responses, cfg.outputs.format, os);
      deliver(cfg, "sensitivity" + extension(cfg.outputs.format), os.str());
      std::cerr << "verdict: " << to_string(rep.verdict) << "\n";
      return kExitOk;
    }

    if (*curves) {
      const ScenarioConfig cfg = load(curves_o);
      const EquilibriumResult eq = solve_cournot_period(cfg, curves_o.period);
      const Market m = cfg.market_for_period(curves_o.period);
      std::ostringstream os;
      emit_objective_curves(m, eq.x, samples, os, window);
      deliver(cfg, "curves.dat", os.str());
      return eq.converged ? kExitOk : kExitSolver;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SensitivityError& e) {
    std::cerr << "sensitivity error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
