#pragma once

// The C2 game: players commit one frustration per turn, the swarmalator
// system is integrated turn by turn, and the utility is the summed per-turn
// difference in hill occupancy.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "koth/dynamics.hpp"
#include "koth/integrator.hpp"
#include "koth/network.hpp"

namespace koth {

class GameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a turn fails to integrate.
class TurnError : public std::runtime_error {
 public:
  TurnError(const std::string& what, int turn) : std::runtime_error(what), turn_(turn) {}
  int turn() const { return turn_; }

 private:
  int turn_;
};

/// Distinct, sorted frustration values within [0, pi].
class ActionSet {
 public:
  ActionSet();  // {0, pi/3, 2pi/3, pi}
  explicit ActionSet(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<double>& values() const { return values_; }
  bool contains(double v) const;
  bool operator==(const ActionSet&) const = default;

 private:
  std::vector<double> values_;
};

using Strategy = std::vector<double>;

/// All |A|^K strategies; the first turn varies slowest.
std::vector<Strategy> enumerate_strategies(const ActionSet& actions, int turns);

/// Where swarms start; phases are uniform on [0, 2pi).
struct InitialPlacement {
  Vec2 center[2] = {{-2.0, 0.0}, {2.0, 0.0}};
  double radius = 0.5;
  bool operator==(const InitialPlacement&) const = default;
};

struct GameConfig {
  ForceLayout layout;
  ModelParams model;
  IntegratorConfig integrator;
  InitialPlacement initial;
  double horizon = 20.0;
  int turns = 2;

  void validate() const;
  double turn_boundary(int k) const { return horizon * k / turns; }
};

/// Initial phases and positions for `seed`; identical for every strategy pair.
SimState initial_state(const C2Network& net, const InitialPlacement& placement, std::uint64_t seed);

struct GameResult {
  std::vector<double> blue_score;  // Omega_B(k)
  std::vector<double> red_score;   // Omega_R(k)
  std::vector<double> advantage;   // Q_B(k)
  double utility_blue = 0.0;
  double utility_red = 0.0;
  SimState final_state;
  std::optional<Trajectory> trajectory;

  double advantage_red(std::size_t k) const { return -advantage[k]; }
};

struct PlayOptions {
  bool keep_trajectory = false;
};

/// Plays one game from the network topology of `config.layout` with
/// frequencies and initial state drawn from `seed`.
GameResult play_game(const GameConfig& config, const Strategy& blue, const Strategy& red, std::uint64_t seed,
                     PlayOptions options = {});

/// Same, against a prebuilt topology (frequencies are redrawn from `seed`).
GameResult play_game(const GameConfig& config, const C2Network& topology, const Strategy& blue,
                     const Strategy& red, std::uint64_t seed, PlayOptions options = {});

/// (U_B, U_R) with U_B the sum of per-turn advantages and U_R = -U_B.
std::pair<double, double> utilities(std::span<const double> advantage);
inline std::pair<double, double> utilities(const GameResult& r) { return utilities(r.advantage); }

/// Dense row-major matrix of Blue utilities.
struct UtilityMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  UtilityMatrix() = default;
  UtilityMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}
  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r * cols + c)]; }
  double operator()(int r, int c) const { return values[static_cast<std::size_t>(r * cols + c)]; }
  UtilityMatrix negated_transpose() const;
};

struct PayoffCell {
  double mean_blue = 0.0;
  int seed_count = 0;
  bool valid = true;
  std::vector<std::uint64_t> seeds;
  std::vector<double> utility_blue;              // per seed
  std::vector<std::vector<double>> advantage;    // per seed, per turn
  std::vector<std::vector<double>> blue_score;   // per seed, per turn
  std::vector<std::vector<double>> red_score;    // per seed, per turn
};

struct CellFailure {
  int row;
  int col;
  std::uint64_t seed;
  int turn;
  std::string message;
};

struct PayoffMatrix {
  std::vector<Strategy> blue_strategies;
  std::vector<Strategy> red_strategies;
  std::vector<PayoffCell> cells;  // row-major
  std::vector<CellFailure> failures;

  int rows() const { return static_cast<int>(blue_strategies.size()); }
  int cols() const { return static_cast<int>(red_strategies.size()); }
  const PayoffCell& cell(int r, int c) const { return cells[static_cast<std::size_t>(r * cols() + c)]; }
  PayoffCell& cell(int r, int c) { return cells[static_cast<std::size_t>(r * cols() + c)]; }
  bool complete() const;
  /// Blue utilities; throws GameError when any cell is invalid.
  UtilityMatrix utilities() const;
  /// Red's payoff for a cell, i.e. the negated Blue mean.
  double red_payoff(int r, int c) const { return -cell(r, c).mean_blue; }
};

struct SweepJob {
  int row;
  int col;
  std::size_t seed_index;
  std::uint64_t seed;
};

struct EnumerateOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  /// Whether a game should record its trajectory for `on_game`.
  std::function<bool(const SweepJob&)> keep_trajectory;
  /// Called from worker threads after every successful game.
  std::function<void(const SweepJob&, const GameResult&)> on_game;
};

/// Plays every (blue, red) strategy pair for every seed and averages Blue's
/// utility over seeds. Failed games mark their cell invalid.
PayoffMatrix enumerate_payoffs(const GameConfig& config, const ActionSet& actions, int turns,
                               std::span<const std::uint64_t> seeds, const EnumerateOptions& options = {});

struct DominanceReport {
  std::vector<int> dominant_rows;
  std::vector<int> dominated_rows;
  std::vector<int> dominant_cols;
  std::vector<int> dominated_cols;
};

/// Row r dominates r' when U(r, c) >= U(r', c) for every column (> when
/// `strict`). Columns are compared on Red's payoff -U.
DominanceReport dominance_analysis(const UtilityMatrix& m, bool strict = false);
DominanceReport dominance_analysis(const PayoffMatrix& m, bool strict = false);

struct MaximinSolution {
  std::vector<double> row_strategy;
  std::vector<double> col_strategy;
  double value = 0.0;
  double row_guarantee = 0.0;  // min over columns of p^T U
  double col_guarantee = 0.0;  // max over rows of U q
};

/// Mixed equilibrium of the zero-sum game with Blue maximizing U.
MaximinSolution maximin_solve(const UtilityMatrix& m);
MaximinSolution maximin_solve(const PayoffMatrix& m);

std::string format_strategy(const Strategy& s);

}  // namespace koth
