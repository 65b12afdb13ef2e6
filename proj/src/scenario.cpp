#include "oligo/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace oligo {

using json = nlohmann::json;

std::string_view to_string(Mode m) {
  return m == Mode::kCournot ? "cournot" : "stackelberg";
}

Mode parse_mode(std::string_view s) {
  if (s == "cournot") return Mode::kCournot;
  if (s == "stackelberg") return Mode::kStackelberg;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected cournot or stackelberg)");
}

ReportFormat parse_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "md" || s == "markdown") return ReportFormat::kMarkdown;
  throw ConfigError("unknown format '" + std::string(s) + "' (expected csv or md)");
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> number_row(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<ExpectedPeriod> parse_expected(const json& j, const std::string& where) {
  std::vector<ExpectedPeriod> out;
  if (!j.is_array()) throw ConfigError(where + " must be an array");
  for (const auto& e : j) {
    ExpectedPeriod p;
    p.t = e.at("t").get<int>();
    p.x = number_row(e.at("x"), where + ".x");
    p.profit = number_row(e.at("profit"), where + ".profit");
    if (e.contains("change_cost")) p.change_cost = number_row(e.at("change_cost"), where + ".change_cost");
    out.push_back(std::move(p));
  }
  return out;
}

nlohmann::ordered_json expected_to_json(const std::vector<ExpectedPeriod>& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : v) {
    nlohmann::ordered_json e;
    e["t"] = p.t;
    e["x"] = p.x;
    e["profit"] = p.profit;
    if (!p.change_cost.empty()) e["change_cost"] = p.change_cost;
    arr.push_back(std::move(e));
  }
  return arr;
}

std::string_view order_name(SweepOrder o) {
  return o == SweepOrder::kAscending ? "ascending" : "random";
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("config root must be an object");

    if (j.contains("reference")) {
      const json& r = j.at("reference");
      cfg.reference_placeholder = get_or<std::string>(r, "status", "present") == "placeholder";
      cfg.reference_source = get_or<std::string>(r, "source", "");
    }

    const json& d = j.at("demand");
    cfg.market.demand.gamma = require_number(d, "gamma", "demand");
    cfg.market.demand.scale = get_or<double>(d, "scale", 5000.0);

    if (!j.contains("firms") || !j.at("firms").is_array()) throw ConfigError("'firms' must be an array");
    int idx = 0;
    for (const auto& f : j.at("firms")) {
      const std::string where = "firm " + std::to_string(++idx);
      FirmParams p;
      p.b = require_number(f, "b", where);
      p.delta = require_number(f, "delta", where);
      p.cap_k = require_number(f, "K", where);
      p.beta = get_or<double>(f, "beta", 0.0);
      p.anchor = require_number(f, "a", where);
      p.lo = require_number(f, "lo", where);
      p.hi = require_number(f, "hi", where);
      cfg.market.firms.push_back(p);
    }

    if (!j.contains("b_schedule") || !j.at("b_schedule").is_array())
      throw ConfigError("'b_schedule' must be an array of rows");
    int t = 0;
    for (const auto& row : j.at("b_schedule")) {
      ++t;
      cfg.b_schedule.push_back(number_row(row, "b_schedule row for period " + std::to_string(t)));
    }

    cfg.mode = parse_mode(get_or<std::string>(j, "mode", "cournot"));
    cfg.leader_index = get_or<int>(j, "leader_index", 1);
    cfg.leader_starts = get_or<int>(j, "leader_starts", kDefaultLeaderStarts);

    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.solver.tol_residual = get_or<double>(s, "tol_residual", cfg.solver.tol_residual);
      cfg.solver.tol_sweep = get_or<double>(s, "tol_sweep", cfg.solver.tol_sweep);
      cfg.solver.max_sweeps = get_or<int>(s, "max_sweeps", cfg.solver.max_sweeps);
      cfg.solver.inner_tol_x = get_or<double>(s, "inner_tol_x", cfg.solver.inner_tol_x);
      const auto order = get_or<std::string>(s, "order", "ascending");
      if (order == "ascending") {
        cfg.solver.order = SweepOrder::kAscending;
      } else if (order == "random") {
        cfg.solver.order = SweepOrder::kRandomPermutation;
      } else {
        throw ConfigError("solver.order must be 'ascending' or 'random'");
      }
      cfg.solver.seed = get_or<std::uint64_t>(s, "seed", 0);
    }

    if (j.contains("outputs")) {
      const json& o = j.at("outputs");
      cfg.outputs.dir = get_or<std::string>(o, "dir", "");
      cfg.outputs.format = parse_format(get_or<std::string>(o, "format", "md"));
      cfg.outputs.stem = get_or<std::string>(o, "stem", "timeline");
    }

    if (j.contains("directions")) {
      int n = 0;
      for (const auto& row : j.at("directions"))
        cfg.directions.push_back(number_row(row, "directions row " + std::to_string(++n)));
    }

    if (j.contains("expected")) {
      const json& e = j.at("expected");
      if (e.contains("cournot")) cfg.expected_cournot = parse_expected(e.at("cournot"), "expected.cournot");
      if (e.contains("stackelberg"))
        cfg.expected_stackelberg = parse_expected(e.at("stackelberg"), "expected.stackelberg");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["reference"] = {{"status", cfg.reference_placeholder ? "placeholder" : "present"},
                    {"source", cfg.reference_source}};
  j["demand"] = {{"gamma", cfg.market.demand.gamma}, {"scale", cfg.market.demand.scale}};
  j["firms"] = nlohmann::ordered_json::array();
  for (const auto& f : cfg.market.firms) {
    j["firms"].push_back({{"b", f.b}, {"delta", f.delta}, {"K", f.cap_k}, {"beta", f.beta},
                          {"a", f.anchor}, {"lo", f.lo}, {"hi", f.hi}});
  }
  j["b_schedule"] = cfg.b_schedule;
  j["mode"] = std::string(to_string(cfg.mode));
  j["leader_index"] = cfg.leader_index;
  j["leader_starts"] = cfg.leader_starts;
  j["solver"] = {{"tol_residual", cfg.solver.tol_residual},
                 {"tol_sweep", cfg.solver.tol_sweep},
                 {"max_sweeps", cfg.solver.max_sweeps},
                 {"inner_tol_x", cfg.solver.inner_tol_x},
                 {"order", std::string(order_name(cfg.solver.order))},
                 {"seed", cfg.solver.seed}};
  j["outputs"] = {{"dir", cfg.outputs.dir},
                  {"format", cfg.outputs.format == ReportFormat::kCsv ? "csv" : "md"},
                  {"stem", cfg.outputs.stem}};
  if (!cfg.directions.empty()) j["directions"] = cfg.directions;
  if (!cfg.expected_cournot.empty() || !cfg.expected_stackelberg.empty()) {
    nlohmann::ordered_json e;
    if (!cfg.expected_cournot.empty()) e["cournot"] = expected_to_json(cfg.expected_cournot);
    if (!cfg.expected_stackelberg.empty()) e["stackelberg"] = expected_to_json(cfg.expected_stackelberg);
    j["expected"] = std::move(e);
  }
  return j;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

void ScenarioConfig::validate() const {
  try {
    market.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::size_t l = market.size();
  if (b_schedule.empty()) throw ConfigError("b_schedule must contain at least one period");
  for (std::size_t t = 0; t < b_schedule.size(); ++t) {
    const auto& row = b_schedule[t];
    if (row.size() != l) {
      throw ConfigError("b_schedule row for period " + std::to_string(t + 1) + " has " +
                        std::to_string(row.size()) + " entries, expected " + std::to_string(l));
    }
    for (double b : row) {
      if (!(b >= 0.0))
        throw ConfigError("b_schedule row for period " + std::to_string(t + 1) +
                          " contains a negative entry");
    }
  }
  if (leader_index < 1 || static_cast<std::size_t>(leader_index) > l)
    throw ConfigError("leader_index must lie in [1, " + std::to_string(l) + "]");
  if (mode == Mode::kStackelberg && l < 2) throw ConfigError("stackelberg mode needs at least two firms");
  if (leader_starts < 1) throw ConfigError("leader_starts must be positive");
  for (std::size_t d = 0; d < directions.size(); ++d) {
    if (directions[d].size() != l + 1)
      throw ConfigError("directions row " + std::to_string(d + 1) + " must have l + 1 entries");
  }
}

Market ScenarioConfig::market_for_period(int t) const {
  if (t < 1 || static_cast<std::size_t>(t) > b_schedule.size())
    throw ConfigError("period " + std::to_string(t) + " is not in b_schedule");
  Market m = market;
  for (std::size_t i = 0; i < m.size(); ++i) m.firms[i].b = b_schedule[t - 1][i];
  return m;
}

PeriodResult solve_period(const ScenarioConfig& cfg, const Market& m, int t) {
  PeriodResult p;
  p.t = t;
  p.b.resize(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) p.b[i] = m.firms[i].b;
  p.anchor = m.anchors();
  if (cfg.mode == Mode::kCournot) {
    const EquilibriumResult r = gauss_seidel(m, cfg.solver);
    p.x = r.x;
    p.total_costs = r.total_costs;
    p.profits = r.profits;
    p.change_costs = r.change_costs;
    p.residual = r.residual;
    p.iterations = r.sweeps;
    p.converged = r.converged;
  } else {
    const StackelbergResult r = solve_leader(m, cfg.solver, cfg.leader_starts,
                                             static_cast<std::size_t>(cfg.leader_index - 1));
    p.x = r.x;
    p.total_costs = r.total_costs;
    p.profits = r.profits;
    p.change_costs = r.change_costs;
    p.residual = r.follower_residual;
    p.iterations = r.theta_evals;
    p.converged = r.converged;
  }
  return p;
}

TimelineResult run_timeline(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  TimelineResult out;
  out.mode = cfg.mode;
  out.leader_index = cfg.leader_index;
  Vector anchors = cfg.market.anchors();
  for (int t = 1; t <= static_cast<int>(cfg.b_schedule.size()); ++t) {
    Market m = cfg.market_for_period(t);
    for (std::size_t i = 0; i < m.size(); ++i) m.firms[i].anchor = anchors[i];
    PeriodResult p = solve_period(cfg, m, t);
    anchors = p.x;
    const bool ok = p.converged;
    out.periods.push_back(std::move(p));
    if (!ok) {
      out.completed = false;
      out.halted_period = t;
      break;
    }
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string format_fixed2(double v) {
  // printf rounds the exact binary value to nearest, ties to even
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string format_raw(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit_report(const TimelineResult& r, ReportFormat format, std::ostream& os) {
  if (format == ReportFormat::kCsv) {
    os << "t,firm,b,anchor,x,profit,change_cost,anchor_raw,x_raw,profit_raw,change_cost_raw\r\n";
    for (const auto& p : r.periods) {
      for (Eigen::Index i = 0; i < p.x.size(); ++i) {
        os << p.t << ',' << (i + 1) << ',' << format_raw(p.b[i]) << ','
           << format_fixed2(p.anchor[i]) << ',' << format_fixed2(p.x[i]) << ','
           << format_fixed2(p.profits[i]) << ',' << format_fixed2(p.change_costs[i]) << ','
           << format_raw(p.anchor[i]) << ',' << format_raw(p.x[i]) << ','
           << format_raw(p.profits[i]) << ',' << format_raw(p.change_costs[i]) << "\r\n";
      }
    }
    return;
  }
  os << "# " << (r.mode == Mode::kCournot ? "Cournot-Nash" : "Stackelberg-Cournot-Nash")
     << " equilibria";
  if (r.mode == Mode::kStackelberg) os << " (leader: firm " << r.leader_index << ")";
  os << "\n\n";
  os << "| t | firm | b | anchor | x | profit | change cost |\n";
  os << "|---|------|---|--------|---|--------|-------------|\n";
  for (const auto& p : r.periods) {
    for (Eigen::Index i = 0; i < p.x.size(); ++i) {
      os << "| " << p.t << " | " << (i + 1) << " | " << format_raw(p.b[i]) << " | "
         << format_fixed2(p.anchor[i]) << " | " << format_fixed2(p.x[i]) << " | "
         << format_fixed2(p.profits[i]) << " | " << format_fixed2(p.change_costs[i]) << " |\n";
    }
  }
  if (!r.periods.empty()) {
    os << "\n| t | KKT residual | iterations | converged |\n";
    os << "|---|--------------|------------|-----------|\n";
    for (const auto& p : r.periods) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3e", p.residual);
      os << "| " << p.t << " | " << buf << " | " << p.iterations << " | "
         << (p.converged ? "yes" : "no") << " |\n";
    }
  }
}

void write_report(const TimelineResult& r, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report '" + path.string() + "'");
  emit_report(r, format, out);
  if (!out) throw std::runtime_error("error while writing report '" + path.string() + "'");
}

void emit_objective_curves(const Market& m, const Vector& x, int samples, std::ostream& os,
                           std::optional<double> window) {
  if (samples < 2) throw std::invalid_argument("curves: need at least two samples");
  os << std::setprecision(17);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const FirmParams& f = m.firms[i];
    double lo = f.lo;
    double hi = f.hi;
    if (window) {
      lo = std::max(f.lo, x[i] - *window);
      hi = std::min(f.hi, x[i] + *window);
    }
    struct Pt {
      double x;
      int marker;
    };
    std::vector<Pt> pts;
    for (int s = 0; s < samples; ++s) {
      pts.push_back({s + 1 == samples ? hi : lo + (hi - lo) * s / (samples - 1), 0});
    }
    if (f.anchor >= lo && f.anchor <= hi) pts.push_back({f.anchor, 1});
    pts.push_back({x[i], 2});
    std::stable_sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x; });

    if (i > 0) os << "\n\n";
    os << "# firm " << (i + 1) << ": x J marker (0 sample, 1 anchor, 2 equilibrium)\n";
    Vector prof = x;
    for (const auto& p : pts) {
      prof[static_cast<Eigen::Index>(i)] = p.x;
      os << p.x << ' ' << player_objective(m, i, prof) << ' ' << p.marker << '\n';
    }
  }
}

void emit_sensitivity(const LocalizationReport& rep, const std::vector<DirectionalResponse>& resp,
                      ReportFormat format, std::ostream& os) {
  const auto l = static_cast<Eigen::Index>(rep.cones.size());
  if (format == ReportFormat::kCsv) {
    os << "direction,firm,cone,face,h_b,h_gamma,k,min_sym_eig,verdict\r\n";
    for (std::size_t d = 0; d < resp.size(); ++d) {
      for (Eigen::Index i = 0; i < l; ++i) {
        os << (d + 1) << ',' << (i + 1) << ',' << to_string(rep.cones[i]) << ','
           << to_string(resp[d].active_pattern[i]) << ',' << format_raw(resp[d].h[i]) << ','
           << format_raw(resp[d].h[l]) << ',' << format_raw(resp[d].k[i]) << ','
           << format_raw(rep.min_sym_eig) << ',' << to_string(rep.verdict) << "\r\n";
      }
    }
    return;
  }
  os << "# Localization report\n\n";
  os << "- verdict: " << to_string(rep.verdict) << "\n";
  os << "- min eigenvalue of sym(dF/dx): " << format_raw(rep.min_sym_eig) << "\n";
  os << "- positive definite: " << (rep.pd ? "yes" : "no") << "\n\n";
  os << "| firm | critical cone |\n|------|---------------|\n";
  for (Eigen::Index i = 0; i < l; ++i) os << "| " << (i + 1) << " | " << to_string(rep.cones[i]) << " |\n";
  if (resp.empty()) return;
  os << "\n# Directional responses\n\n";
  os << "| direction | firm | h_b | h_gamma | face | k |\n";
  os << "|-----------|------|-----|---------|------|---|\n";
  for (std::size_t d = 0; d < resp.size(); ++d) {
    for (Eigen::Index i = 0; i < l; ++i) {
      os << "| " << (d + 1) << " | " << (i + 1) << " | " << format_raw(resp[d].h[i]) << " | "
         << format_raw(resp[d].h[l]) << " | " << to_string(resp[d].active_pattern[i]) << " | "
         << format_raw(resp[d].k[i]) << " |\n";
    }
  }
}

std::vector<FixtureMismatch> compare_expected(const TimelineResult& r,
                                              const std::vector<ExpectedPeriod>& expected,
                                              double tol_x, double tol_profit) {
  std::vector<FixtureMismatch> out;
  for (const auto& e : expected) {
    const auto it = std::find_if(r.periods.begin(), r.periods.end(),
                                 [&](const PeriodResult& p) { return p.t == e.t; });
    if (it == r.periods.end()) {
      out.push_back({e.t, 0, "missing period", 0.0, 0.0});
      continue;
    }
    const auto check = [&](const std::vector<double>& want, const Vector& got, const char* field,
                           double tol) {
      for (std::size_t i = 0; i < want.size() && i < static_cast<std::size_t>(got.size()); ++i) {
        if (std::abs(want[i] - got[static_cast<Eigen::Index>(i)]) > tol)
          out.push_back({e.t, i + 1, field, want[i], got[static_cast<Eigen::Index>(i)]});
      }
    };
    check(e.x, it->x, "x", tol_x);
    check(e.profit, it->profits, "profit", tol_profit);
    check(e.change_cost, it->change_costs, "change_cost", 0.02);
  }
  return out;
}

}  // namespace oligo
