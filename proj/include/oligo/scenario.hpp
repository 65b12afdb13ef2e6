#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oligo/market_model.hpp"
#include "oligo/nash_solver.hpp"
#include "oligo/sensitivity.hpp"
#include "oligo/stackelberg_solver.hpp"

namespace oligo {

/// Invalid or unreadable scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kCournot, kStackelberg };
enum class ReportFormat { kCsv, kMarkdown };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);
ReportFormat parse_format(std::string_view s);

struct OutputOptions {
  std::string dir;
  ReportFormat format = ReportFormat::kMarkdown;
  std::string stem = "timeline";
};

/// Published figures for one period, used by the fixture comparison.
struct ExpectedPeriod {
  int t = 0;
  std::vector<double> x;
  std::vector<double> profit;
  std::vector<double> change_cost;
};

struct ScenarioConfig {
  Market market;  // firm b values are the t = 0 values; anchors are the t = 0 productions
  std::vector<std::vector<double>> b_schedule;  // row t-1 holds the b-vector of period t
  Mode mode = Mode::kCournot;
  int leader_index = 1;  // 1-based, Stackelberg only
  int leader_starts = kDefaultLeaderStarts;
  SolverConfig solver;
  OutputOptions outputs;
  bool reference_placeholder = false;
  std::string reference_source;
  std::vector<std::vector<double>> directions;  // sensitivity directions (b_1..b_l, gamma)
  std::vector<ExpectedPeriod> expected_cournot;
  std::vector<ExpectedPeriod> expected_stackelberg;

  /// Throws ConfigError naming the offending field or period.
  void validate() const;

  /// Market with the b-vector of period t (1-based) and the configured anchors.
  Market market_for_period(int t) const;
};

ScenarioConfig parse_config(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::filesystem::path& path);

struct PeriodResult {
  int t = 0;
  Vector b;
  Vector anchor;
  Vector x;
  Vector total_costs;
  Vector profits;
  Vector change_costs;
  double residual = 0.0;
  int iterations = 0;  // Gauss-Seidel sweeps or theta evaluations
  bool converged = false;
};

struct TimelineResult {
  Mode mode = Mode::kCournot;
  int leader_index = 1;
  std::vector<PeriodResult> periods;
  bool completed = true;
  int halted_period = 0;  // first non-converged period when !completed
  double wall_seconds = 0.0;
};

PeriodResult solve_period(const ScenarioConfig& cfg, const Market& m, int t);

/// Re-solves the market for every scheduled period; the anchors of period t
/// are the productions of period t-1.  Stops at the first non-converged period.
TimelineResult run_timeline(const ScenarioConfig& cfg);

/// Half-even rounding to two decimals, as printed in reports.
std::string format_fixed2(double v);
/// Shortest representation that parses back to the same double.
std::string format_raw(double v);

void emit_report(const TimelineResult& r, ReportFormat format, std::ostream& os);
void write_report(const TimelineResult& r, ReportFormat format, const std::filesystem::path& path);

/// Samples J_i(., x_-i) for every firm over its interval (or a window of
/// half-width `window` around x_i), adding the anchor and the equilibrium
/// point.  Gnuplot layout: one block per firm, columns "x J marker" with
/// marker 0 = sample, 1 = anchor, 2 = equilibrium.
void emit_objective_curves(const Market& m, const Vector& x, int samples, std::ostream& os,
                           std::optional<double> window = std::nullopt);

void emit_sensitivity(const LocalizationReport& rep, const std::vector<DirectionalResponse>& resp,
                      ReportFormat format, std::ostream& os);

struct FixtureMismatch {
  int t;
  std::size_t firm;
  std::string field;
  double expected;
  double actual;
};

std::vector<FixtureMismatch> compare_expected(const TimelineResult& r,
                                              const std::vector<ExpectedPeriod>& expected,
                                              double tol_x, double tol_profit);

}  // namespace oligo
