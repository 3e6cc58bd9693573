// Command-line front end: train, evaluate, oracle, greedy, grid, synth.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "evtol/dqn.hpp"
#include "evtol/harness.hpp"
#include "evtol/oracle.hpp"

namespace fs = std::filesystem;
using namespace evtol;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void print_result(const std::string& what, const oracle::OptResult& r) {
  std::cout << what << " profit $" << r.profit << ", normalized return " << r.reward << " ("
            << r.states << " states, " << r.transitions << " transitions)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eVTOL fleet dispatch: DQN training, exact oracle and experiment grids"};
  app.require_subcommand(1);

  std::string agent = "multi";
  fs::path scenario_path;
  fs::path out_dir;
  int episodes = -1;
  std::uint64_t seed = 0;
  double lr = 0.0;
  std::string optimizer;
  std::vector<std::size_t> hidden;

  auto* train = app.add_subcommand("train", "train a DQN dispatcher and save checkpoint, curve and trace");
  train->add_option("--agent", agent, "single or multi")->check(CLI::IsMember({"single", "multi"}));
  train->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  train->add_option("--episodes", episodes);
  train->add_option("--seed", seed);
  train->add_option("--lr", lr, "learning rate override");
  train->add_option("--optimizer", optimizer)->check(CLI::IsMember({"sgd", "adam"}));
  train->add_option("--hidden", hidden, "hidden layer widths");
  train->add_option("--out", out_dir)->required();

  fs::path checkpoint;
  auto* evaluate = app.add_subcommand("evaluate", "greedy rollout of a saved checkpoint");
  evaluate->add_option("--agent", agent)->check(CLI::IsMember({"single", "multi"}));
  evaluate->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  fs::path trace_out;
  evaluate->add_option("--trace", trace_out, "write the rollout trace CSV here");

  double budget = 1e7;
  bool serial = false;
  bool brute = false;
  auto* solve = app.add_subcommand("oracle", "exact optimal dispatch with a certificate trace");
  solve->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out_dir)->required();
  solve->add_option("--budget", budget, "maximum estimated DP states");
  solve->add_flag("--serial", serial, "use the serial memoized solver");
  solve->add_flag("--brute-force", brute, "enumerate every action sequence instead");

  auto* greedy = app.add_subcommand("greedy", "myopic baseline profit");
  greedy->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);

  fs::path grid_path;
  auto* grid = app.add_subcommand("grid", "run an experiment grid and write the gap report");
  grid->add_option("--config", grid_path)->required()->check(CLI::ExistingFile);
  grid->add_option("--out", out_dir)->required();
  grid->add_option("--budget", budget, "oracle state budget per cell");

  std::string profile = "medium";
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "replace a scenario's demand with a synthetic block");
  synth->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  synth->add_option("--profile", profile, "low, medium or high");
  synth->add_option("--seed", seed);
  synth->add_option("--out", synth_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const Scenario s = load_scenario(scenario_path);
      const auto kind = dqn::parse_agent_kind(agent);
      auto config = dqn::TrainConfig::defaults_for(kind);
      config.seed = seed;
      if (episodes >= 0) config.episodes = episodes;
      if (lr > 0.0) config.learning_rate = lr;
      if (!optimizer.empty()) config.optimizer = dqn::parse_optimizer_kind(optimizer);
      if (!hidden.empty()) config.hidden = hidden;
      const auto result = dqn::train(kind, s, config);
      const auto eval = dqn::evaluate_policy(result.net, kind, s);
      fs::create_directories(out_dir);
      dqn::save_checkpoint(result.net, out_dir / "checkpoint.json");
      dqn::write_curve_csv(result.curve, out_dir / "curve.csv");
      write_trace_csv(eval.trace, out_dir / "trace.csv");
      std::cout << "trained " << config.episodes << " episodes in " << result.seconds
                << " s; greedy profit $" << eval.profit << ", normalized return " << eval.reward
                << "\n";
    } else if (*evaluate) {
      const Scenario s = load_scenario(scenario_path);
      const auto eval =
          dqn::evaluate_policy(dqn::load_checkpoint(checkpoint), dqn::parse_agent_kind(agent), s);
      if (!trace_out.empty()) write_trace_csv(eval.trace, trace_out);
      std::cout << "greedy profit $" << eval.profit << ", normalized return " << eval.reward
                << "\n";
    } else if (*solve) {
      const Scenario s = load_scenario(scenario_path);
      oracle::OracleOptions opts;
      opts.state_budget = budget;
      opts.exec = serial ? kernels::Exec::serial : kernels::Exec::parallel;
      const auto r = brute ? oracle::brute_force(s, opts) : oracle::solve_exact(s, opts);
      fs::create_directories(out_dir);
      write_file(out_dir / "result.json", oracle::format_opt_result(r, s.label));
      write_trace_csv(r.certificate, out_dir / "certificate.csv");
      print_result(brute ? "brute force" : "optimal", r);
    } else if (*greedy) {
      print_result("greedy", oracle::greedy_baseline(load_scenario(scenario_path)));
    } else if (*grid) {
      harness::GridOptions opts;
      opts.oracle.state_budget = budget;
      opts.out_dir = out_dir;
      const auto report = harness::run_grid(harness::load_grid(grid_path), opts);
      std::cout << harness::format_summary(report, harness::trend_check(report));
    } else if (*synth) {
      Scenario s = load_scenario(scenario_path);
      s.schedules.demand = synthesize_demand_block(parse_demand_profile(profile), s.schedules.steps,
                                                   s.network.routes, seed);
      validate(s);
      save_scenario(s, synth_out);
    }
  } catch (const oracle::BudgetExceeded& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
