#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "fixtures.hpp"
#include "oligo/scenario.hpp"

using namespace oligo;
using namespace oligo::testing;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

ScenarioConfig small_config() {
  nlohmann::json j = {
      {"demand", {{"gamma", 1.1}, {"scale", 4000.0}}},
      {"firms",
       {{{"b", 3.0}, {"delta", 1.0}, {"K", 4.0}, {"beta", 0.0}, {"a", 30.0}, {"lo", 0.5}, {"hi", 300.0}},
        {{"b", 5.0}, {"delta", 0.9}, {"K", 6.0}, {"beta", 0.0}, {"a", 35.0}, {"lo", 0.5}, {"hi", 250.0}}}},
      {"b_schedule", {{3.0, 5.0}}},
  };
  return parse_config(j);
}

TimelineResult fixture_timeline(const ScenarioConfig& cfg, const std::vector<ExpectedPeriod>& table) {
  TimelineResult r;
  Vector anchor = cfg.market.anchors();
  for (const auto& e : table) {
    PeriodResult p;
    p.t = e.t;
    p.b = Eigen::Map<const Vector>(cfg.b_schedule[e.t - 1].data(), 5);
    p.anchor = anchor;
    p.x = Eigen::Map<const Vector>(e.x.data(), 5);
    p.profits = Eigen::Map<const Vector>(e.profit.data(), 5);
    p.total_costs = -p.profits;
    p.change_costs = Eigen::Map<const Vector>(e.change_cost.data(), 5);
    p.converged = true;
    anchor = p.x;
    r.periods.push_back(p);
  }
  return r;
}

}  // namespace

TEST_CASE("config round trip") {
  const ScenarioConfig a = reference_scenario();
  const nlohmann::ordered_json ja = to_json(a);
  const ScenarioConfig b = parse_config(nlohmann::json::parse(ja.dump()));
  CHECK(to_json(b).dump() == ja.dump());
  REQUIRE(b.market.size() == a.market.size());
  for (std::size_t i = 0; i < a.market.size(); ++i) {
    CHECK(b.market.firms[i].b == a.market.firms[i].b);
    CHECK(b.market.firms[i].delta == a.market.firms[i].delta);
    CHECK(b.market.firms[i].cap_k == a.market.firms[i].cap_k);
    CHECK(b.market.firms[i].beta == a.market.firms[i].beta);
    CHECK(b.market.firms[i].anchor == a.market.firms[i].anchor);
    CHECK(b.market.firms[i].lo == a.market.firms[i].lo);
    CHECK(b.market.firms[i].hi == a.market.firms[i].hi);
  }
  CHECK(b.b_schedule == a.b_schedule);
  CHECK(b.expected_stackelberg.size() == a.expected_stackelberg.size());

  // Awkward doubles survive too.
  ScenarioConfig c = small_config();
  c.market.demand.gamma = 0.1 + 0.2;
  c.b_schedule[0][1] = 1.0 / 3.0;
  const ScenarioConfig d = parse_config(nlohmann::json::parse(to_json(c).dump()));
  CHECK(d.market.demand.gamma == c.market.demand.gamma);
  CHECK(d.b_schedule[0][1] == c.b_schedule[0][1]);
}

TEST_CASE("config validation names the offending field") {
  nlohmann::json j = to_json(reference_scenario());
  j["b_schedule"][1] = {10.0, 8.0, 5.0};
  try {
    parse_config(j);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("period 2") != std::string::npos);
  }

  nlohmann::json k = to_json(reference_scenario());
  k["b_schedule"] = nlohmann::json::array();
  CHECK_THROWS_AS(parse_config(k), ConfigError);

  nlohmann::json m = to_json(reference_scenario());
  m["leader_index"] = 9;
  CHECK_THROWS_AS(parse_config(m), ConfigError);

  nlohmann::json n = to_json(reference_scenario());
  n["firms"][0].erase("delta");
  CHECK_THROWS_AS(parse_config(n), ConfigError);

  nlohmann::json o = to_json(reference_scenario());
  o["mode"] = "bertrand";
  CHECK_THROWS_AS(parse_config(o), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/scenario.json"), ConfigError);
  CHECK_THROWS_AS(reference_scenario().market_for_period(4), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_fixed2(377.234) == "377.23");
  CHECK(format_fixed2(0.125) == "0.12");  // exact tie goes to even
  CHECK(format_fixed2(0.375) == "0.38");
  CHECK(format_fixed2(-0.001) == "0.00");
  CHECK(format_raw(0.1) == "0.1");
  CHECK(std::strtod(format_raw(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("report rendering") {
  const ScenarioConfig cfg = reference_scenario();

  SUBCASE("table fixture renders the published numbers") {
    const TimelineResult r = fixture_timeline(cfg, cfg.expected_cournot);
    std::ostringstream os;
    emit_report(r, ReportFormat::kMarkdown, os);
    const std::string md = os.str();
    CHECK(md.find("| 1 | 1 | 9 | 47.81 | 49.41 | 377.23 | 0.80 |") != std::string::npos);
    CHECK(md.find("| 1 | 3 | 3 | 51.32 | 54.24 | 639.95 | 5.83 |") != std::string::npos);
    CHECK(md.find("| 2 | 2 | 8 | 51.14 | 51.14 | 408.81 | 0.00 |") != std::string::npos);
    CHECK(md.find("| 3 | 1 | 11 | 49.41 | 45.71 | 286.75 | 1.85 |") != std::string::npos);
    CHECK(md.find("| 3 | 3 | 8 | 54.24 | 51.58 | 386.92 | 5.31 |") != std::string::npos);
    CHECK(md.find("| 3 | 5 | 2 | 43.09 | 43.64 | 527.81 | 0.00 |") != std::string::npos);
  }

  SUBCASE("empty timeline is header only") {
    std::ostringstream csv;
    emit_report(TimelineResult{}, ReportFormat::kCsv, csv);
    CHECK(csv.str() == "t,firm,b,anchor,x,profit,change_cost,anchor_raw,x_raw,profit_raw,change_cost_raw\r\n");
    std::ostringstream md;
    emit_report(TimelineResult{}, ReportFormat::kMarkdown, md);
    CHECK(split(md.str(), '\n').size() == 4);
  }
}

TEST_CASE("timeline on the reference scenario" * doctest::skip(!reference_params_present())) {
  const ScenarioConfig cfg = reference_scenario();
  const TimelineResult r = run_timeline(cfg);
  REQUIRE(r.completed);
  REQUIRE(r.periods.size() == 3);
  CHECK(compare_expected(r, cfg.expected_cournot, 0.05, 0.5).empty());
  CHECK(r.periods[1].x == r.periods[0].x);

  // Anchor chain.
  CHECK(r.periods[0].anchor == cfg.market.anchors());
  for (std::size_t t = 1; t < r.periods.size(); ++t) CHECK(r.periods[t].anchor == r.periods[t - 1].x);

  // CSV raw columns round-trip bit-exactly and the anchor column chains.
  std::ostringstream os;
  emit_report(r, ReportFormat::kCsv, os);
  const auto lines = split(os.str(), '\n');
  REQUIRE(lines.size() == 1 + 15);
  std::vector<double> prev_x(5), cur_x(5);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    std::string line = lines[n];
    REQUIRE(line.back() == '\r');
    line.pop_back();
    const auto cols = split(line, ',');
    REQUIRE(cols.size() == 11);
    const int t = std::stoi(cols[0]);
    const int firm = std::stoi(cols[1]);
    const PeriodResult& p = r.periods[t - 1];
    CHECK(std::strtod(cols[7].c_str(), nullptr) == p.anchor[firm - 1]);
    CHECK(std::strtod(cols[8].c_str(), nullptr) == p.x[firm - 1]);
    CHECK(std::strtod(cols[9].c_str(), nullptr) == p.profits[firm - 1]);
    CHECK(std::strtod(cols[10].c_str(), nullptr) == p.change_costs[firm - 1]);
    CHECK(cols[4] == format_fixed2(p.x[firm - 1]));
    if (t >= 2) CHECK(cols[7] == format_raw(r.periods[t - 2].x[firm - 1]));
  }

  // Determinism.
  std::ostringstream again;
  emit_report(run_timeline(cfg), ReportFormat::kCsv, again);
  CHECK(again.str() == os.str());
}

TEST_CASE("stackelberg timeline on the reference scenario" * doctest::skip(!reference_params_present())) {
  ScenarioConfig cfg = reference_scenario();
  cfg.mode = Mode::kStackelberg;
  const TimelineResult r = run_timeline(cfg);
  REQUIRE(r.completed);
  const auto mismatches = compare_expected(r, cfg.expected_stackelberg, 0.1, 1.0);
  for (const auto& m : mismatches)
    MESSAGE("t=" << m.t << " firm " << m.firm << " " << m.field << " " << m.actual);
  CHECK(mismatches.empty());
  // Firm 2 leaves its anchor at t = 3.
  CHECK(std::abs(r.periods[2].x[1] - 50.46) <= 0.1);
  CHECK(std::abs(r.periods[2].change_costs[1] - 0.68) <= 0.02);
  for (std::size_t t = 1; t < r.periods.size(); ++t) CHECK(r.periods[t].anchor == r.periods[t - 1].x);
}

TEST_CASE("single period driver adds nothing") {
  const ScenarioConfig cfg = small_config();
  const TimelineResult r = run_timeline(cfg);
  REQUIRE(r.periods.size() == 1);
  const EquilibriumResult direct = gauss_seidel(cfg.market_for_period(1), cfg.solver);
  CHECK(r.periods[0].x == direct.x);
  CHECK(r.periods[0].profits == direct.profits);
  CHECK(r.periods[0].iterations == direct.sweeps);
}

TEST_CASE("timeline halts on a non-converged period") {
  ScenarioConfig cfg = small_config();
  cfg.b_schedule.push_back({4.0, 6.0});
  cfg.solver.max_sweeps = 1;
  cfg.solver.tol_residual = 1e-300;
  cfg.solver.tol_sweep = 1e-300;
  const TimelineResult r = run_timeline(cfg);
  CHECK_FALSE(r.completed);
  CHECK(r.halted_period == 1);
  CHECK(r.periods.size() == 1);
}

TEST_CASE("objective curves" * doctest::skip(!reference_params_present())) {
  const ScenarioConfig cfg = reference_scenario();
  const Market m = cfg.market_for_period(1);
  const EquilibriumResult eq = gauss_seidel(m, cfg.solver);
  REQUIRE(eq.converged);
  const double window = 1.0;
  const int samples = 2001;
  std::ostringstream os;
  emit_objective_curves(m, eq.x, samples, os, window);

  struct Row {
    double x, j;
    int marker;
  };
  std::vector<std::vector<Row>> blocks(1);
  for (const auto& line : split(os.str(), '\n')) {
    if (line.empty()) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    if (line[0] == '#') continue;
    std::istringstream is(line);
    Row r;
    is >> r.x >> r.j >> r.marker;
    blocks.back().push_back(r);
  }
  if (blocks.back().empty()) blocks.pop_back();
  REQUIRE(blocks.size() == 5);

  const double spacing = 2.0 * window / (samples - 1);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& rows = blocks[i];
    std::size_t k_eq = 0;
    std::size_t k_min = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].marker == 2) k_eq = k;
      if (rows[k].j < rows[k_min].j) k_min = k;
    }
    CHECK(std::abs(rows[k_eq].x - rows[k_min].x) <= spacing);

    // One-sided quotients from the nearest distinct samples.
    std::size_t lft = k_eq, rgt = k_eq;
    while (lft > 0 && rows[lft].x == rows[k_eq].x) --lft;
    while (rgt + 1 < rows.size() && rows[rgt].x == rows[k_eq].x) ++rgt;
    const double ql = (rows[k_eq].j - rows[lft].j) / (rows[k_eq].x - rows[lft].x);
    const double qr = (rows[rgt].j - rows[k_eq].j) / (rows[rgt].x - rows[k_eq].x);
    const double beta = m.firms[i].beta;
    if (eq.x[i] == m.firms[i].anchor) {
      CHECK(std::abs((qr - ql) - 2.0 * beta) <= 0.01);
    } else if (beta == 0.0) {
      CHECK(std::abs(qr - ql) <= 0.01);
    }
  }
  CHECK_THROWS_AS(emit_objective_curves(m, eq.x, 1, os), std::invalid_argument);
}

TEST_CASE("sensitivity report") {
  const ScenarioConfig cfg = small_config();
  const Market m = cfg.market_for_period(1);
  const EquilibriumResult eq = gauss_seidel(m, cfg.solver);
  const LocalizationReport rep = check_localization(m, eq.x);
  std::vector<DirectionalResponse> resp{graphical_derivative(m, eq.x, Vector::Unit(3, 0))};
  std::ostringstream csv;
  emit_sensitivity(rep, resp, ReportFormat::kCsv, csv);
  CHECK(csv.str().find("LIPSCHITZ_LOCALIZATION_CERTIFIED") != std::string::npos);
  CHECK(csv.str().find("-0,") == std::string::npos);
  std::ostringstream md;
  emit_sensitivity(rep, resp, ReportFormat::kMarkdown, md);
  CHECK(md.str().find("FREE") != std::string::npos);
}
