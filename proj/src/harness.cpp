#include "evtol/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace evtol::harness {
namespace {

using nlohmann::json;

constexpr double kTrendTolerance = 1e-6;

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string opt_to_string(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> opt_from_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

dqn::TrainConfig apply_training(const json& node, dqn::TrainConfig c) {
  if (node.contains("learning_rate")) c.learning_rate = node.at("learning_rate").get<double>();
  if (node.contains("gamma")) c.gamma = node.at("gamma").get<double>();
  if (node.contains("epsilon_start")) c.epsilon_start = node.at("epsilon_start").get<double>();
  if (node.contains("epsilon_end")) c.epsilon_end = node.at("epsilon_end").get<double>();
  if (node.contains("anneal_steps")) c.anneal_steps = node.at("anneal_steps").get<std::int64_t>();
  if (node.contains("target_sync_interval")) {
    c.target_sync_interval = node.at("target_sync_interval").get<std::int64_t>();
  }
  if (node.contains("minibatch")) c.minibatch = node.at("minibatch").get<std::size_t>();
  if (node.contains("buffer_capacity")) {
    c.buffer_capacity = node.at("buffer_capacity").get<std::size_t>();
  }
  if (node.contains("warmup")) c.warmup = node.at("warmup").get<std::size_t>();
  if (node.contains("episodes")) c.episodes = node.at("episodes").get<int>();
  if (node.contains("hidden")) c.hidden = node.at("hidden").get<std::vector<std::size_t>>();
  if (node.contains("optimizer")) {
    c.optimizer = dqn::parse_optimizer_kind(node.at("optimizer").get<std::string>());
  }
  return c;
}

bool matches(const CellOverride& o, const Cell& cell) {
  return (!o.evtols || *o.evtols == cell.evtols) &&
         (!o.vertiports || *o.vertiports == cell.vertiports) &&
         (!o.block || *o.block == cell.block);
}

std::string join_locations(const std::vector<VertiportId>& locs) {
  std::string out;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    if (i) out += ':';
    out += std::to_string(locs[i]);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string curve_script(const std::string& cell) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set terminal pngcairo size 900,500\n"
     << "set output '" << cell << "_curve.png'\n"
     << "set xlabel 'episode'\nset ylabel 'total reward'\n"
     << "plot '../curves/" << cell << ".csv' using 1:2 every ::1 with lines title 'reward'\n";
  return gp.str();
}

std::string profile_script(const std::string& cell, std::size_t routes) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set terminal pngcairo size 900,500\n"
     << "set output '" << cell << "_profile.png'\n"
     << "set style data histograms\nset style histogram rowstacked\nset style fill solid 0.8\n"
     << "set xlabel 'time step'\nset ylabel 'dollars'\n"
     << "plot '../profile/" << cell << ".csv' using 2:xtic(1) every ::1 title 'revenue', "
     << "'' using (-$3) every ::1 title 'operating cost', "
     << "'' using (-$4) every ::1 title 'recharge cost'\n"
     << "set output '" << cell << "_passengers.png'\nset ylabel 'passengers'\n"
     << "plot ";
  for (std::size_t r = 0; r < routes; ++r) {
    if (r) gp << ", ";
    gp << (r ? "''" : "'../profile/" + cell + ".csv'") << " using " << 6 + r
       << (r ? "" : ":xtic(1)") << " every ::1 title columnhead";
  }
  gp << "\n";
  return gp.str();
}

GapRow run_cell(const ExperimentGrid& grid, const Cell& cell, const GridOptions& options) {
  GapRow row;
  row.cell = cell.label();
  row.agent = dqn::to_string(grid.agent);
  row.evtols = cell.evtols;
  row.vertiports = cell.vertiports;
  row.block = to_string(cell.block);
  row.seed = cell.seed;
  row.curve = "curves/" + row.cell + ".csv";
  try {
    Scenario scenario = cell_scenario(grid, cell);
    const dqn::TrainConfig config = cell_config(grid, cell);
    row.episodes = config.episodes;
    row.placement_source = "round-robin";

    const bool oracle_fits = oracle::estimate_states(scenario) <= options.oracle.state_budget;
    if (oracle_fits) {
      if (const auto best = oracle::best_initial_placement(scenario, options.oracle)) {
        scenario.fleet.initial_locations = best->locations;
        row.placement_source = "oracle";
      }
    }
    row.placement = join_locations(scenario.fleet.initial_locations);

    const dqn::TrainResult trained = dqn::train(grid.agent, scenario, config);
    row.train_seconds = trained.seconds;
    const dqn::Evaluation eval = dqn::evaluate_policy(trained.net, grid.agent, scenario);
    const EpisodeTrace certified = replay(eval.trace, scenario);
    const EpisodeReturn ret = episode_return(certified);
    if (!(certified == eval.trace) || ret.profit != eval.profit) {
      throw std::logic_error("policy trace does not replay to the reported profit");
    }
    row.dql_profit = ret.profit;
    row.dql_reward = ret.reward;

    if (oracle_fits) {
      const oracle::OptResult opt = oracle::solve_exact(scenario, options.oracle);
      row.oracle_status = "solved";
      row.oracle_profit = opt.profit;
      row.oracle_reward = opt.reward;
      if (opt.profit > 0.0) {
        row.gap_percent = (opt.profit - ret.profit) / opt.profit * 100.0;
      } else if (ret.profit >= opt.profit) {
        row.gap_percent = 0.0;
      }
    } else {
      row.oracle_status = "oracle-skipped";
    }

    if (options.out_dir) {
      const auto& dir = *options.out_dir;
      dqn::write_curve_csv(trained.curve, dir / row.curve);
      write_trace_csv(certified, dir / "traces" / (row.cell + ".csv"));
      write_text(dir / "profile" / (row.cell + ".csv"),
                 format_profile_csv(financial_profile(certified)));
      write_text(dir / "plots" / (row.cell + "_curve.gp"), curve_script(row.cell));
      write_text(dir / "plots" / (row.cell + "_profile.gp"),
                 profile_script(row.cell, scenario.network.routes.size()));
    }
    row.status = "ok";
  } catch (const std::exception& e) {
    row.status = sanitize(std::string("failed: ") + e.what());
  }
  return row;
}

const char* kGapHeader =
    "cell,agent,evtols,vertiports,block,seed,status,oracle_status,dql_profit,dql_reward,"
    "oracle_profit,oracle_reward,gap_percent,train_seconds,episodes,placement_source,placement,"
    "curve";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string Cell::label() const {
  return "n" + std::to_string(evtols) + "_m" + std::to_string(vertiports) + "_" +
         to_string(block) + "_s" + std::to_string(seed);
}

ExperimentGrid parse_grid(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed grid: ") + e.what());
  }
  try {
    if (doc.at("format").get<int>() != 1) throw ParseError("unsupported grid format");
    ExperimentGrid g;
    g.base = parse_scenario(doc.at("template").dump());
    g.evtols = doc.at("evtols").get<std::vector<int>>();
    g.vertiports = doc.at("vertiports").get<std::vector<int>>();
    for (const auto& b : doc.at("blocks")) g.blocks.push_back(parse_demand_profile(b.get<std::string>()));
    g.seeds = doc.value("seeds", std::vector<std::uint64_t>{0});
    g.demand_seed = doc.value("demand_seed", std::uint64_t{0});
    g.agent = dqn::parse_agent_kind(doc.value("agent", std::string("multi")));
    g.config = apply_training(doc.value("training", json::object()),
                              dqn::TrainConfig::defaults_for(g.agent));
    g.config.validate();
    for (const auto& o : doc.value("cells", json::array())) {
      CellOverride c;
      if (o.contains("evtols")) c.evtols = o.at("evtols").get<int>();
      if (o.contains("vertiports")) c.vertiports = o.at("vertiports").get<int>();
      if (o.contains("block")) c.block = parse_demand_profile(o.at("block").get<std::string>());
      if (o.contains("episodes")) c.episodes = o.at("episodes").get<int>();
      if (o.contains("learning_rate")) c.learning_rate = o.at("learning_rate").get<double>();
      g.overrides.push_back(c);
    }
    for (int m : g.vertiports) {
      if (m < 1 || m > g.base.network.vertiports) {
        throw ValidationError("grid vertiport count " + std::to_string(m) +
                              " outside the template network");
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("grid: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("grid: ") + e.what());
  }
}

ExperimentGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_grid(buffer.str());
}

std::vector<Cell> expand(const ExperimentGrid& grid) {
  std::vector<Cell> cells;
  for (int n : grid.evtols)
    for (int m : grid.vertiports)
      for (auto block : grid.blocks)
        for (auto seed : grid.seeds) cells.push_back(Cell{n, m, block, seed});
  return cells;
}

Scenario cell_scenario(const ExperimentGrid& grid, const Cell& cell) {
  const Scenario& base = grid.base;
  Scenario s;
  s.label = cell.label();
  s.econ = base.econ;
  s.schedules.steps = base.schedules.steps;
  s.schedules.step_hours = base.schedules.step_hours;
  s.schedules.prices = base.schedules.prices;

  s.network.vertiports = cell.vertiports;
  s.network.pads_per_vertiport = (cell.evtols + 1) / 2;
  const auto full = synthesize_demand_block(cell.block, base.schedules.steps, base.network.routes,
                                            grid.demand_seed);
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < base.network.routes.size(); ++r) {
    const Route& route = base.network.routes[r];
    if (route.from <= cell.vertiports && route.to <= cell.vertiports) {
      s.network.routes.push_back(route);
      kept.push_back(r);
    }
  }
  s.schedules.demand.assign(s.schedules.steps, {});
  for (int t = 0; t < s.schedules.steps; ++t) {
    for (auto r : kept) s.schedules.demand[t].push_back(full[t][r]);
  }

  s.fleet = base.fleet;
  s.fleet.count = cell.evtols;
  s.fleet.initial_batteries.assign(cell.evtols, base.fleet.battery_kwh);
  s.fleet.initial_locations =
      round_robin_locations(cell.evtols, cell.vertiports, s.network.pads_per_vertiport);
  validate(s);
  return s;
}

dqn::TrainConfig cell_config(const ExperimentGrid& grid, const Cell& cell) {
  dqn::TrainConfig c = grid.config;
  c.seed = cell.seed;
  for (const auto& o : grid.overrides) {
    if (!matches(o, cell)) continue;
    if (o.episodes) c.episodes = *o.episodes;
    if (o.learning_rate) c.learning_rate = *o.learning_rate;
  }
  c.validate();
  return c;
}

std::string format_gap_csv(const GapReport& report) {
  std::ostringstream out;
  out << kGapHeader << "\n";
  for (const auto& r : report.rows) {
    out << sanitize(r.cell) << ',' << r.agent << ',' << r.evtols << ',' << r.vertiports << ','
        << r.block << ',' << r.seed << ',' << sanitize(r.status) << ',' << r.oracle_status << ','
        << opt_to_string(r.dql_profit) << ',' << opt_to_string(r.dql_reward) << ','
        << opt_to_string(r.oracle_profit) << ',' << opt_to_string(r.oracle_reward) << ','
        << opt_to_string(r.gap_percent) << ',' << format_double(r.train_seconds) << ','
        << r.episodes << ',' << r.placement_source << ',' << r.placement << ','
        << sanitize(r.curve) << "\n";
  }
  return out.str();
}

GapReport parse_gap_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kGapHeader) throw ParseError("gap report header mismatch");
  GapReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 18) throw ParseError("gap report row has " + std::to_string(f.size()) + " fields");
    GapRow r;
    r.cell = f[0];
    r.agent = f[1];
    r.evtols = std::stoi(f[2]);
    r.vertiports = std::stoi(f[3]);
    r.block = f[4];
    r.seed = std::stoull(f[5]);
    r.status = f[6];
    r.oracle_status = f[7];
    r.dql_profit = opt_from_string(f[8]);
    r.dql_reward = opt_from_string(f[9]);
    r.oracle_profit = opt_from_string(f[10]);
    r.oracle_reward = opt_from_string(f[11]);
    r.gap_percent = opt_from_string(f[12]);
    r.train_seconds = parse_double(f[13]);
    r.episodes = std::stoi(f[14]);
    r.placement_source = f[15];
    r.placement = f[16];
    r.curve = f[17];
    report.rows.push_back(std::move(r));
  }
  return report;
}

GapReport run_grid(const ExperimentGrid& grid, const GridOptions& options) {
  const auto cells = expand(grid);
  if (options.out_dir) {
    for (const char* sub : {"curves", "traces", "profile", "plots"}) {
      std::filesystem::create_directories(*options.out_dir / sub);
    }
  }
  GapReport report;
  report.rows.resize(cells.size());
  const auto count = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) report.rows[i] = run_cell(grid, cells[i], options);

  if (options.out_dir) {
    write_text(*options.out_dir / "gaps.csv", format_gap_csv(report));
    write_text(*options.out_dir / "summary.txt", format_summary(report, trend_check(report)));
  }
  return report;
}

std::vector<ProfileRow> financial_profile(const EpisodeTrace& trace) {
  std::vector<ProfileRow> out;
  out.reserve(trace.steps.size());
  for (const auto& step : trace.steps) {
    out.push_back(ProfileRow{step.t, step.dollars.revenue, step.dollars.operating_cost,
                             step.dollars.recharge_cost, step.dollars.profit(), step.passengers});
  }
  return out;
}

std::string format_profile_csv(const std::vector<ProfileRow>& profile) {
  std::ostringstream out;
  out << "t,revenue,operating_cost,recharge_cost,profit";
  const std::size_t routes = profile.empty() ? 0 : profile.front().passengers.size();
  for (std::size_t r = 0; r < routes; ++r) out << ",passengers_route_" << r;
  out << "\n";
  for (const auto& row : profile) {
    out << row.t << ',' << format_double(row.revenue) << ',' << format_double(row.operating_cost)
        << ',' << format_double(row.recharge_cost) << ',' << format_double(row.profit);
    for (int p : row.passengers) out << ',' << p;
    out << "\n";
  }
  return out.str();
}

TrendFindings trend_check(const GapReport& report) {
  TrendFindings findings;
  // axis 0 sweeps N with M fixed, axis 1 sweeps M with N fixed
  for (int axis = 0; axis < 2; ++axis) {
    std::map<std::tuple<int, std::string, std::string, std::uint64_t>,
             std::vector<std::pair<int, const GapRow*>>>
        groups;
    for (const auto& r : report.rows) {
      if (!r.oracle_profit) continue;
      const int fixed = axis == 0 ? r.vertiports : r.evtols;
      const int moving = axis == 0 ? r.evtols : r.vertiports;
      groups[{fixed, r.agent, r.block, r.seed}].push_back({moving, &r});
    }
    for (auto& [key, members] : groups) {
      std::sort(members.begin(), members.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t i = 1; i < members.size(); ++i) {
        ++findings.comparisons;
        const GapRow& lo = *members[i - 1].second;
        const GapRow& hi = *members[i].second;
        if (*hi.oracle_profit + kTrendTolerance < *lo.oracle_profit) {
          std::ostringstream msg;
          msg << (axis == 0 ? "N" : "M") << " sweep: " << hi.cell << " oracle profit "
              << *hi.oracle_profit << " below " << lo.cell << " (" << *lo.oracle_profit << ")";
          findings.violations.push_back(msg.str());
        }
      }
    }
  }
  return findings;
}

std::string format_summary(const GapReport& report, const TrendFindings& trends) {
  std::size_t ok = 0, solved = 0, skipped = 0;
  std::vector<double> gaps;
  for (const auto& r : report.rows) {
    if (r.status == "ok") ++ok;
    if (r.oracle_status == "solved") ++solved;
    if (r.oracle_status == "oracle-skipped") ++skipped;
    if (r.gap_percent) gaps.push_back(*r.gap_percent);
  }
  std::ostringstream out;
  out << "cells: " << report.rows.size() << " (ok " << ok << ", failed "
      << report.rows.size() - ok << ")\n";
  out << "oracle: solved " << solved << ", skipped " << skipped << "\n";
  if (!gaps.empty()) {
    double sum = 0.0;
    for (double g : gaps) sum += g;
    out << "gap %: min " << *std::min_element(gaps.begin(), gaps.end()) << ", mean "
        << sum / static_cast<double>(gaps.size()) << ", max "
        << *std::max_element(gaps.begin(), gaps.end()) << "\n";
  }
  out << "\n";
  for (const auto& r : report.rows) {
    out << r.cell << ": ";
    if (r.status != "ok") {
      out << r.status << "\n";
      continue;
    }
    out << "dql $" << *r.dql_profit;
    if (r.oracle_profit) out << ", oracle $" << *r.oracle_profit;
    else out << ", oracle-skipped";
    if (r.gap_percent) out << ", gap " << *r.gap_percent << "%";
    out << ", trained " << r.train_seconds << " s, placement " << r.placement << " ("
        << r.placement_source << ")\n";
  }
  out << "\ntrend checks: " << trends.comparisons << " comparisons, "
      << trends.violations.size() << " violations\n";
  for (const auto& v : trends.violations) out << "  " << v << "\n";
  return out.str();
}

}  // namespace evtol::harness
