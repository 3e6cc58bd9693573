#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evtol/dqn.hpp"
#include "evtol/oracle.hpp"

namespace evtol::harness {

/// Per-cell overrides. A cell matches when every set selector equals its coordinate.
struct CellOverride {
  std::optional<int> evtols;
  std::optional<int> vertiports;
  std::optional<DemandProfile> block;
  std::optional<int> episodes;
  std::optional<double> learning_rate;
};

/// Sweep over fleet size N, network size M (vertiports 1..M of the template,
/// with the template routes among them), demand block and training seed.
/// Demand is synthesized once per block over the template's full route list,
/// so nested networks see identical demand on shared routes.
struct ExperimentGrid {
  Scenario base;
  std::vector<int> evtols;
  std::vector<int> vertiports;
  std::vector<DemandProfile> blocks;
  std::vector<std::uint64_t> seeds;
  std::uint64_t demand_seed = 0;
  dqn::AgentKind agent = dqn::AgentKind::multi;
  dqn::TrainConfig config;
  std::vector<CellOverride> overrides;
};

ExperimentGrid parse_grid(const std::string& text);
ExperimentGrid load_grid(const std::filesystem::path& path);

struct Cell {
  int evtols = 0;
  int vertiports = 0;
  DemandProfile block = DemandProfile::medium;
  std::uint64_t seed = 0;

  std::string label() const;  // e.g. n2_m3_high_s0
};

std::vector<Cell> expand(const ExperimentGrid& grid);

/// The cell's scenario with pads = ceil(N/2) and round-robin placement.
Scenario cell_scenario(const ExperimentGrid& grid, const Cell& cell);
dqn::TrainConfig cell_config(const ExperimentGrid& grid, const Cell& cell);

struct GapRow {
  std::string cell;
  std::string agent;
  int evtols = 0;
  int vertiports = 0;
  std::string block;
  std::uint64_t seed = 0;
  std::string status;             // "ok" or "failed: <reason>"
  std::string oracle_status;      // "solved", "oracle-skipped" or empty on failure
  std::optional<double> dql_profit;
  std::optional<double> dql_reward;
  std::optional<double> oracle_profit;
  std::optional<double> oracle_reward;
  std::optional<double> gap_percent;
  double train_seconds = 0.0;
  int episodes = 0;
  std::string placement_source;   // "oracle" or "round-robin"
  std::string placement;          // locations joined by ':'
  std::string curve;              // relative path of the training curve

  bool operator==(const GapRow&) const = default;
};

struct GapReport {
  std::vector<GapRow> rows;

  bool operator==(const GapReport&) const = default;
};

std::string format_gap_csv(const GapReport& report);
GapReport parse_gap_csv(const std::string& text);

struct GridOptions {
  oracle::OracleOptions oracle;
  /// When set, per-cell curves, traces, profiles, gaps.csv, summary.txt and
  /// gnuplot scripts are written here.
  std::optional<std::filesystem::path> out_dir;
};

/// Trains, evaluates, certifies and solves each cell. Cells run in parallel;
/// a failing cell is marked and the rest still run.
GapReport run_grid(const ExperimentGrid& grid, const GridOptions& options = {});

struct ProfileRow {
  int t = 0;
  double revenue = 0.0;
  double operating_cost = 0.0;
  double recharge_cost = 0.0;
  double profit = 0.0;
  std::vector<int> passengers;  // per route

  bool operator==(const ProfileRow&) const = default;
};

std::vector<ProfileRow> financial_profile(const EpisodeTrace& trace);
std::string format_profile_csv(const std::vector<ProfileRow>& profile);

struct TrendFindings {
  std::size_t comparisons = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Oracle profit must not decrease as N grows (fixed M, block, seed) or as M
/// grows (fixed N, block, seed). Rows without an oracle result are ignored.
TrendFindings trend_check(const GapReport& report);

std::string format_summary(const GapReport& report, const TrendFindings& trends);

}  // namespace evtol::harness
