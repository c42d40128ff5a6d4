#include "koth/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <thread>

#include "koth/random.hpp"

namespace koth {

ActionSet::ActionSet()
    : values_{0.0, std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0, std::numbers::pi} {}

ActionSet::ActionSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw GameError("action set is empty");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double v = values_[k];
    if (!(v >= 0.0 && v <= std::numbers::pi)) throw GameError("action values must lie in [0, pi]");
    if (k > 0 && !(v > values_[k - 1])) throw GameError("action values must be distinct and sorted");
  }
}

bool ActionSet::contains(double v) const { return std::find(values_.begin(), values_.end(), v) != values_.end(); }

std::vector<Strategy> enumerate_strategies(const ActionSet& actions, int turns) {
  if (turns < 1) throw GameError("turn count must be >= 1");
  std::vector<Strategy> out;
  std::vector<std::size_t> digit(static_cast<std::size_t>(turns), 0);
  while (true) {
    Strategy s;
    for (auto d : digit) s.push_back(actions[d]);
    out.push_back(std::move(s));
    int k = turns - 1;
    while (k >= 0 && ++digit[static_cast<std::size_t>(k)] == actions.size()) digit[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return out;
}

void GameConfig::validate() const {
  layout.validate();
  model.validate();
  integrator.validate();
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw GameError("horizon must be finite and >= 0");
  if (turns < 1) throw GameError("turn count must be >= 1");
  if (!(initial.radius >= 0.0)) throw GameError("initial placement radius must be >= 0");
}

SimState initial_state(const C2Network& net, const InitialPlacement& placement, std::uint64_t seed) {
  RandomStream phases(seed, Stream::Phases);
  RandomStream positions(seed, Stream::Positions);
  SimState s;
  s.phases.reserve(static_cast<std::size_t>(net.size()));
  for (int i = 0; i < net.size(); ++i) s.phases.push_back(phases.uniform(0.0, 2.0 * std::numbers::pi));
  s.positions.resize(static_cast<std::size_t>(net.swarm_count()));
  for (int i = 0; i < net.size(); ++i) {
    if (!net.is_swarm(i)) continue;
    const Vec2 c = placement.center[index(net.agent(i).population)];
    const double r = placement.radius * std::sqrt(positions.canonical());
    const double a = positions.uniform(0.0, 2.0 * std::numbers::pi);
    s.positions[static_cast<std::size_t>(net.swarm_slot(i))] = {c.x + r * std::cos(a), c.y + r * std::sin(a)};
  }
  return s;
}

GameResult play_game(const GameConfig& config, const Strategy& blue, const Strategy& red, std::uint64_t seed,
                     PlayOptions options) {
  return play_game(config, build_force_network(config.layout), blue, red, seed, options);
}

GameResult play_game(const GameConfig& config, const C2Network& topology, const Strategy& blue,
                     const Strategy& red, std::uint64_t seed, PlayOptions options) {
  config.validate();
  const auto K = static_cast<std::size_t>(config.turns);
  if (blue.size() != K || red.size() != K)
    throw GameError("strategies must have one frustration per turn (" + std::to_string(K) + ")");

  C2Network net = topology;
  net.draw_frequencies(config.layout, seed);
  SimState state = initial_state(net, config.initial, seed);
  Swarmalator system(net, config.model);

  GameResult result;
  result.blue_score.assign(K, 0.0);
  result.red_score.assign(K, 0.0);
  result.advantage.assign(K, 0.0);
  if (options.keep_trajectory) result.trajectory.emplace(system.dimension(), net.size());

  const double R = config.model.hill_radius;
  for (std::size_t k = 0; k < K; ++k) {
    const double t0 = config.turn_boundary(static_cast<int>(k));
    const double t1 = config.turn_boundary(static_cast<int>(k + 1));
    state.t = t0;
    if (!(t1 > t0)) continue;  // zero horizon
    system.set_frustration(Frustration::of(blue[k], red[k]));
    Trajectory seg;
    try {
      seg = integrate_segment(system, state, t1, config.integrator);
    } catch (const std::exception& e) {
      throw TurnError("turn " + std::to_string(k + 1) + ": " + e.what(), static_cast<int>(k + 1));
    }
    result.blue_score[k] = accumulate_occupancy(seg, net, Population::Blue, R);
    result.red_score[k] = accumulate_occupancy(seg, net, Population::Red, R);
    result.advantage[k] = result.blue_score[k] - result.red_score[k];
    state = seg.snapshot(seg.size() - 1);
    state.t = t1;
    if (result.trajectory) result.trajectory->append(seg);
  }
  if (result.trajectory && result.trajectory->empty()) result.trajectory->push(state.t, state.pack());
  std::tie(result.utility_blue, result.utility_red) = utilities(result.advantage);
  result.final_state = std::move(state);
  return result;
}

std::pair<double, double> utilities(std::span<const double> advantage) {
  double u = 0.0;
  for (double q : advantage) u += q;
  return {u, -u};
}

UtilityMatrix UtilityMatrix::negated_transpose() const {
  UtilityMatrix t(cols, rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t(c, r) = -(*this)(r, c);
  return t;
}

bool PayoffMatrix::complete() const {
  return std::all_of(cells.begin(), cells.end(), [](const PayoffCell& c) { return c.valid; });
}

UtilityMatrix PayoffMatrix::utilities() const {
  if (!complete()) throw GameError("payoff matrix has invalid cells");
  UtilityMatrix m(rows(), cols());
  for (int r = 0; r < rows(); ++r)
    for (int c = 0; c < cols(); ++c) m(r, c) = cell(r, c).mean_blue;
  return m;
}

PayoffMatrix enumerate_payoffs(const GameConfig& config, const ActionSet& actions, int turns,
                               std::span<const std::uint64_t> seeds, const EnumerateOptions& options) {
  if (seeds.empty()) throw GameError("at least one seed is required");
  GameConfig cfg = config;
  cfg.turns = turns;
  cfg.validate();
  const C2Network topology = build_force_network(cfg.layout);

  PayoffMatrix m;
  m.blue_strategies = enumerate_strategies(actions, turns);
  m.red_strategies = m.blue_strategies;
  const int rows = m.rows(), cols = m.cols();
  const std::size_t S = seeds.size();
  m.cells.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (auto& c : m.cells) {
    c.seeds.assign(seeds.begin(), seeds.end());
    c.utility_blue.assign(S, std::numeric_limits<double>::quiet_NaN());
    c.advantage.resize(S);
    c.blue_score.resize(S);
    c.red_score.resize(S);
  }

  const std::size_t total = m.cells.size() * S;
  std::vector<std::optional<CellFailure>> failure(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t cell_index = job / S;
      const std::size_t si = job % S;
      const SweepJob info{static_cast<int>(cell_index) / cols, static_cast<int>(cell_index) % cols, si, seeds[si]};
      auto& cell = m.cells[cell_index];
      try {
        auto res = play_game(cfg, topology, m.blue_strategies[static_cast<std::size_t>(info.row)],
                             m.red_strategies[static_cast<std::size_t>(info.col)], info.seed,
                             PlayOptions{options.keep_trajectory && options.keep_trajectory(info)});
        cell.utility_blue[si] = res.utility_blue;
        cell.advantage[si] = res.advantage;
        cell.blue_score[si] = res.blue_score;
        cell.red_score[si] = res.red_score;
        if (options.on_game) options.on_game(info, res);
      } catch (const TurnError& e) {
        failure[job] = CellFailure{info.row, info.col, info.seed, e.turn(), e.what()};
      } catch (const std::exception& e) {
        failure[job] = CellFailure{info.row, info.col, info.seed, 0, e.what()};
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t job = 0; job < total; ++job) {
    if (failure[job]) {
      m.failures.push_back(*failure[job]);
      m.cells[job / S].valid = false;
    }
  }
  for (auto& c : m.cells) {
    c.seed_count = static_cast<int>(S);
    if (!c.valid) {
      c.mean_blue = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double sum = 0.0;
    for (double u : c.utility_blue) sum += u;
    c.mean_blue = sum / static_cast<double>(S);
  }
  return m;
}

namespace {

// a dominates b on every index under `better`
template <class Cmp>
bool dominates(int n, Cmp better_or_equal) {
  for (int k = 0; k < n; ++k)
    if (!better_or_equal(k)) return false;
  return true;
}

}  // namespace

DominanceReport dominance_analysis(const UtilityMatrix& m, bool strict) {
  if (m.rows < 1 || m.cols < 1) throw GameError("dominance analysis of an empty matrix");
  for (double v : m.values)
    if (!std::isfinite(v)) throw GameError("dominance analysis requires finite payoffs");
  auto ge = [strict](double a, double b) { return strict ? a > b : a >= b; };

  DominanceReport rep;
  for (int a = 0; a < m.rows; ++a) {
    bool all = true, dominated = false;
    for (int b = 0; b < m.rows; ++b) {
      if (a == b) continue;
      if (!dominates(m.cols, [&](int c) { return ge(m(a, c), m(b, c)); })) all = false;
      if (dominates(m.cols, [&](int c) { return ge(m(b, c), m(a, c)); })) dominated = true;
    }
    if (all) rep.dominant_rows.push_back(a);
    if (dominated) rep.dominated_rows.push_back(a);
  }
  for (int a = 0; a < m.cols; ++a) {
    bool all = true, dominated = false;
    for (int b = 0; b < m.cols; ++b) {
      if (a == b) continue;
      if (!dominates(m.rows, [&](int r) { return ge(-m(r, a), -m(r, b)); })) all = false;
      if (dominates(m.rows, [&](int r) { return ge(-m(r, b), -m(r, a)); })) dominated = true;
    }
    if (all) rep.dominant_cols.push_back(a);
    if (dominated) rep.dominated_cols.push_back(a);
  }
  return rep;
}

DominanceReport dominance_analysis(const PayoffMatrix& m, bool strict) {
  return dominance_analysis(m.utilities(), strict);
}

MaximinSolution maximin_solve(const UtilityMatrix& m) {
  const int R = m.rows, C = m.cols;
  if (R < 1 || C < 1) throw GameError("maximin of an empty matrix");
  double lo = std::numeric_limits<double>::infinity();
  for (double v : m.values) {
    if (!std::isfinite(v)) throw GameError("maximin requires finite payoffs");
    lo = std::min(lo, v);
  }
  const double shift = 1.0 - lo;  // every shifted entry >= 1

  // Column player's LP: max sum(y) s.t. (U + shift) y <= 1, y >= 0.
  // Tableau rows 0..R-1 are constraints, row R the objective; columns
  // 0..C-1 are y, C..C+R-1 slacks, C+R the right-hand side.
  const int W = C + R + 1;
  std::vector<double> T(static_cast<std::size_t>((R + 1) * W), 0.0);
  auto at = [&](int r, int c) -> double& { return T[static_cast<std::size_t>(r * W + c)]; };
  std::vector<int> basis(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) at(r, c) = m(r, c) + shift;
    at(r, C + r) = 1.0;
    at(r, W - 1) = 1.0;
    basis[static_cast<std::size_t>(r)] = C + r;
  }
  for (int c = 0; c < C; ++c) at(R, c) = -1.0;

  constexpr double tol = 1e-12;
  for (int iter = 0; iter < 100000; ++iter) {
    // Bland's rule: lowest-index improving column, lowest-index basic on ties.
    int enter = -1;
    for (int c = 0; c < C + R; ++c)
      if (at(R, c) < -tol) {
        enter = c;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < R; ++r) {
      if (at(r, enter) <= tol) continue;
      const double ratio = at(r, W - 1) / at(r, enter);
      if (ratio < best - tol ||
          (ratio <= best + tol && leave >= 0 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave < 0) throw GameError("maximin LP unbounded");
    const double piv = at(leave, enter);
    for (int c = 0; c < W; ++c) at(leave, c) /= piv;
    for (int r = 0; r <= R; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (int c = 0; c < W; ++c) at(r, c) -= f * at(leave, c);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  std::vector<double> y(static_cast<std::size_t>(C), 0.0), x(static_cast<std::size_t>(R), 0.0);
  for (int r = 0; r < R; ++r)
    if (basis[static_cast<std::size_t>(r)] < C) y[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] = at(r, W - 1);
  for (int r = 0; r < R; ++r) x[static_cast<std::size_t>(r)] = std::max(0.0, at(R, C + r));

  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (auto& e : v) {
      e = std::max(0.0, e);
      s += e;
    }
    if (!(s > 0.0)) throw GameError("maximin LP produced an empty strategy");
    for (auto& e : v) e /= s;
  };
  const double z = at(R, W - 1);
  if (!(z > 0.0)) throw GameError("maximin LP failed to converge");
  normalize(y);
  normalize(x);

  MaximinSolution sol;
  sol.row_strategy = std::move(x);
  sol.col_strategy = std::move(y);
  sol.row_guarantee = std::numeric_limits<double>::infinity();
  for (int c = 0; c < C; ++c) {
    double v = 0.0;
    for (int r = 0; r < R; ++r) v += sol.row_strategy[static_cast<std::size_t>(r)] * m(r, c);
    sol.row_guarantee = std::min(sol.row_guarantee, v);
  }
  sol.col_guarantee = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < R; ++r) {
    double v = 0.0;
    for (int c = 0; c < C; ++c) v += m(r, c) * sol.col_strategy[static_cast<std::size_t>(c)];
    sol.col_guarantee = std::max(sol.col_guarantee, v);
  }
  sol.value = 1.0 / z - shift;
  return sol;
}

MaximinSolution maximin_solve(const PayoffMatrix& m) { return maximin_solve(m.utilities()); }

std::string format_strategy(const Strategy& s) {
  std::string out;
  char buf[32];
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", s[k]);
    if (k) out += ';';
    out += buf;
  }
  return out;
}

}  // namespace koth
