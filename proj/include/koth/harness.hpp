#pragma once

// Batch drivers that turn games and sweeps into plain data files.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "koth/config.hpp"
#include "koth/game.hpp"

namespace koth {

/// Normalized 2-D histogram of swarm positions over a square window.
struct DensityGrid {
  double lo = 0.0;
  double hi = 0.0;
  int resolution = 0;
  std::vector<double> density;  // row-major, [iy * resolution + ix]
  std::vector<std::uint64_t> counts;
  std::uint64_t samples_in_window = 0;
  std::uint64_t samples_total = 0;

  /// True when no sample fell inside the window; densities are then all 0.
  bool empty() const { return samples_in_window == 0; }
  double cell_size() const { return (hi - lo) / resolution; }
  double cell_area() const { return cell_size() * cell_size(); }
  /// Sum of density * cell area; 1 for a nonempty grid.
  double mass() const;
  double at(int ix, int iy) const { return density[static_cast<std::size_t>(iy * resolution + ix)]; }
};

/// Raw counts that can be accumulated from many games before normalizing.
class DensityAccumulator {
 public:
  DensityAccumulator(const DensityOptions& window);
  void add(const Trajectory& trajectory, const C2Network& net, Population population);
  void add(Vec2 p);
  DensityGrid grid() const;

 private:
  DensityOptions window_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t in_window_ = 0;
  std::uint64_t total_ = 0;
};

/// Bins every sampled position of `population`'s swarm agents. Densities are
/// normalized over the samples that fall inside the window, so a nonempty
/// grid integrates to 1.
DensityGrid density_grid(std::span<const Trajectory> trajectories, const C2Network& net, Population population,
                         const DensityOptions& window = {});

/// CSV: ix,iy,x,y,density with (x, y) the cell center.
void write_density(std::ostream& os, const DensityGrid& grid);

/// Cumulative hill occupancy at every sample time.
struct ScoreSeries {
  std::vector<double> times;
  std::vector<double> blue;
  std::vector<double> red;
  std::vector<double> turn_boundaries;
};

/// Left-rectangle running integral, so the final values equal
/// accumulate_occupancy on the same trajectory.
ScoreSeries score_timeseries(const Trajectory& trajectory, const C2Network& net, double hill_radius,
                             std::span<const double> turn_boundaries = {});

/// CSV: t,omega_blue,omega_red,turn
void write_scores(std::ostream& os, const ScoreSeries& series);

/// Spread of one Blue strategy's utility over every Red response.
struct StrategyUtility {
  int row = 0;
  Strategy strategy;
  std::vector<double> values;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// One entry per Blue strategy, ordered by first action, then later actions.
/// Throws GameError on an incomplete matrix.
std::vector<StrategyUtility> utility_by_strategy(const PayoffMatrix& matrix);
std::vector<StrategyUtility> utility_by_strategy(const UtilityMatrix& values, std::span<const Strategy> strategies);
/// Index into `summary` of the highest mean (first on ties).
std::size_t best_by_mean(std::span<const StrategyUtility> summary);

/// Mean Blue utility over all cells whose Blue strategy opens with `action`.
double mean_utility_for_first_action(const PayoffMatrix& matrix, double action);

// --- persistence -----------------------------------------------------------

/// CSV: row,col,blue_strategy,red_strategy,mean_utility_blue,seed_count,valid
void write_payoff_matrix(std::ostream& os, const PayoffMatrix& matrix);
/// Reads what write_payoff_matrix wrote; per-seed detail is not restored.
PayoffMatrix read_payoff_matrix(std::istream& is);
PayoffMatrix read_payoff_matrix(const std::filesystem::path& path);

/// CSV: row,col,seed,turn,blue_score,red_score,advantage,utility_blue
void write_cell_details(std::ostream& os, const PayoffMatrix& matrix);

/// Writes dominance.json, maximin.json, utility_by_strategy.csv and
/// summary.json for `matrix` into `dir`. Returns the files written.
std::vector<std::filesystem::path> write_analysis(const PayoffMatrix& matrix, const std::filesystem::path& dir);

std::string version_string();

struct SweepProgress {
  /// Called after each game with (games done, games total).
  std::function<void(std::size_t, std::size_t)> on_game;
};

struct SweepReport {
  PayoffMatrix matrix;
  std::vector<std::filesystem::path> files;
};

/// Full enumeration plus every analysis, written under `out`.
SweepReport run_sweep(const RunConfig& config, const std::filesystem::path& out, const SweepProgress& progress = {});

struct SimulationReport {
  GameResult result;
  C2Network network;
  ScoreSeries scores;
  std::vector<std::filesystem::path> files;
};

/// One game: trajectory.csv, scores.csv, result.json, provenance.json.
SimulationReport run_simulation(const RunConfig& config, const Strategy& blue, const Strategy& red,
                                std::uint64_t seed, const std::filesystem::path& out, std::size_t stride = 1);

/// roster.csv and edges.csv for the configured layout.
std::vector<std::filesystem::path> export_network(const RunConfig& config, std::uint64_t seed,
                                                  const std::filesystem::path& out);

}  // namespace koth
