#include "koth/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include "json.hpp"

#ifndef KOTH_VERSION
#define KOTH_VERSION "unknown"
#endif

namespace koth {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const Json& j) { open_out(path) << j.dump(2) << "\n"; }

Json strategy_json(const Strategy& s) { return Json(s); }

// "0.333pi" style label for file names.
std::string pi_label(double phi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3fpi", phi / std::numbers::pi);
  return buf;
}

int find_strategy(std::span<const Strategy> list, const Strategy& s) {
  for (std::size_t k = 0; k < list.size(); ++k)
    if (list[k] == s) return static_cast<int>(k);
  return -1;
}

Json provenance(const RunConfig& config, const std::string& command) {
  Json j;
  j["command"] = command;
  j["version"] = version_string();
  j["config_hash"] = config_hash(config);
  j["seeds"] = config.seeds;
  j["config"] = Json::parse(dump_config(config));
  return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

// --- density ----------------------------------------------------------------

double DensityGrid::mass() const {
  double s = 0.0;
  for (double d : density) s += d;
  return s * cell_area();
}

DensityAccumulator::DensityAccumulator(const DensityOptions& window)
    : window_(window), counts_(static_cast<std::size_t>(window.resolution) * static_cast<std::size_t>(window.resolution)) {
  if (!(window.window_hi > window.window_lo) || window.resolution < 1)
    throw std::invalid_argument("density window must have lo < hi and resolution >= 1");
}

void DensityAccumulator::add(Vec2 p) {
  ++total_;
  const double lo = window_.window_lo, hi = window_.window_hi;
  if (!(p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi)) return;
  const int n = window_.resolution;
  const double h = (hi - lo) / n;
  const int ix = std::min(n - 1, static_cast<int>((p.x - lo) / h));
  const int iy = std::min(n - 1, static_cast<int>((p.y - lo) / h));
  ++counts_[static_cast<std::size_t>(iy * n + ix)];
  ++in_window_;
}

void DensityAccumulator::add(const Trajectory& trajectory, const C2Network& net, Population population) {
  const auto ids = net.members(population, Echelon::Swarm);
  for (std::size_t k = 0; k < trajectory.size(); ++k)
    for (int id : ids) add(trajectory.position(k, net.swarm_slot(id)));
}

DensityGrid DensityAccumulator::grid() const {
  DensityGrid g;
  g.lo = window_.window_lo;
  g.hi = window_.window_hi;
  g.resolution = window_.resolution;
  g.counts = counts_;
  g.samples_in_window = in_window_;
  g.samples_total = total_;
  g.density.assign(counts_.size(), 0.0);
  if (in_window_ > 0) {
    const double norm = 1.0 / (static_cast<double>(in_window_) * g.cell_area());
    for (std::size_t k = 0; k < counts_.size(); ++k) g.density[k] = static_cast<double>(counts_[k]) * norm;
  }
  return g;
}

DensityGrid density_grid(std::span<const Trajectory> trajectories, const C2Network& net, Population population,
                         const DensityOptions& window) {
  if (trajectories.empty()) throw std::invalid_argument("density_grid needs at least one trajectory");
  DensityAccumulator acc(window);
  for (const auto& t : trajectories) acc.add(t, net, population);
  return acc.grid();
}

void write_density(std::ostream& os, const DensityGrid& grid) {
  os << "ix,iy,x,y,density\n";
  const double h = grid.cell_size();
  for (int iy = 0; iy < grid.resolution; ++iy)
    for (int ix = 0; ix < grid.resolution; ++ix)
      os << ix << ',' << iy << ',' << num(grid.lo + (ix + 0.5) * h) << ',' << num(grid.lo + (iy + 0.5) * h) << ','
         << num(grid.at(ix, iy)) << '\n';
}

// --- scores -------------------------------------------------------------------

ScoreSeries score_timeseries(const Trajectory& trajectory, const C2Network& net, double hill_radius,
                             std::span<const double> turn_boundaries) {
  ScoreSeries s;
  s.turn_boundaries.assign(turn_boundaries.begin(), turn_boundaries.end());
  const std::size_t n = trajectory.size();
  s.times = trajectory.times();
  s.blue.assign(n, 0.0);
  s.red.assign(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = trajectory.time(k) - trajectory.time(k - 1);
    s.blue[k] = s.blue[k - 1] + dt * hill_count(trajectory, k - 1, net, Population::Blue, hill_radius);
    s.red[k] = s.red[k - 1] + dt * hill_count(trajectory, k - 1, net, Population::Red, hill_radius);
  }
  return s;
}

void write_scores(std::ostream& os, const ScoreSeries& series) {
  os << "t,omega_blue,omega_red,turn\n";
  std::size_t turn = 0;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const double t = series.times[k];
    while (turn < series.turn_boundaries.size() && t >= series.turn_boundaries[turn]) ++turn;
    os << num(t) << ',' << num(series.blue[k]) << ',' << num(series.red[k]) << ',' << turn << '\n';
  }
}

// --- utility summaries --------------------------------------------------------

std::vector<StrategyUtility> utility_by_strategy(const UtilityMatrix& values, std::span<const Strategy> strategies) {
  if (static_cast<int>(strategies.size()) != values.rows)
    throw GameError("utility_by_strategy: one strategy per row is required");
  std::vector<StrategyUtility> out;
  for (int r = 0; r < values.rows; ++r) {
    StrategyUtility s;
    s.row = r;
    s.strategy = strategies[static_cast<std::size_t>(r)];
    double sum = 0.0;
    for (int c = 0; c < values.cols; ++c) {
      const double v = values(r, c);
      s.values.push_back(v);
      sum += v;
    }
    if (!s.values.empty()) {
      s.mean = sum / static_cast<double>(s.values.size());
      s.min = *std::min_element(s.values.begin(), s.values.end());
      s.max = *std::max_element(s.values.begin(), s.values.end());
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const StrategyUtility& a, const StrategyUtility& b) { return a.strategy < b.strategy; });
  return out;
}

std::vector<StrategyUtility> utility_by_strategy(const PayoffMatrix& matrix) {
  return utility_by_strategy(matrix.utilities(), matrix.blue_strategies);
}

std::size_t best_by_mean(std::span<const StrategyUtility> summary) {
  if (summary.empty()) throw GameError("best_by_mean: empty summary");
  std::size_t best = 0;
  for (std::size_t k = 1; k < summary.size(); ++k)
    if (summary[k].mean > summary[best].mean) best = k;
  return best;
}

double mean_utility_for_first_action(const PayoffMatrix& matrix, double action) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < matrix.rows(); ++r) {
    const auto& s = matrix.blue_strategies[static_cast<std::size_t>(r)];
    if (s.empty() || s.front() != action) continue;
    for (int c = 0; c < matrix.cols(); ++c) {
      const auto& cell = matrix.cell(r, c);
      if (!cell.valid) throw GameError("mean_utility_for_first_action: matrix has invalid cells");
      sum += cell.mean_blue;
      ++n;
    }
  }
  if (n == 0) throw GameError("no Blue strategy opens with the requested action");
  return sum / static_cast<double>(n);
}

// --- persistence --------------------------------------------------------------

void write_payoff_matrix(std::ostream& os, const PayoffMatrix& matrix) {
  os << "row,col,blue_strategy,red_strategy,mean_utility_blue,seed_count,valid\n";
  for (int r = 0; r < matrix.rows(); ++r)
    for (int c = 0; c < matrix.cols(); ++c) {
      const auto& cell = matrix.cell(r, c);
      os << r << ',' << c << ',' << format_strategy(matrix.blue_strategies[static_cast<std::size_t>(r)]) << ','
         << format_strategy(matrix.red_strategies[static_cast<std::size_t>(c)]) << ','
         << (cell.valid ? num(cell.mean_blue) : std::string("nan")) << ',' << cell.seed_count << ','
         << (cell.valid ? 1 : 0) << '\n';
    }
}

PayoffMatrix read_payoff_matrix(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || split_csv_line(line).size() != 7 || split_csv_line(line)[0] != "row")
    throw std::runtime_error("payoff matrix: missing or unexpected header");
  struct Row {
    int r, c;
    std::string bs, rs;
    double mean;
    int seeds;
    bool valid;
  };
  std::vector<Row> rows;
  int max_r = -1, max_c = -1;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("payoff matrix line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      Row row{std::stoi(f[0]), std::stoi(f[1]), f[2], f[3], std::strtod(f[4].c_str(), nullptr), std::stoi(f[5]),
              f[6] == "1"};
      if (row.r < 0 || row.c < 0) throw std::invalid_argument("negative index");
      max_r = std::max(max_r, row.r);
      max_c = std::max(max_c, row.c);
      rows.push_back(std::move(row));
    } catch (const std::exception&) {
      throw std::runtime_error("payoff matrix line " + std::to_string(line_no) + ": malformed field");
    }
  }
  if (rows.empty()) throw std::runtime_error("payoff matrix: no cells");
  PayoffMatrix m;
  m.blue_strategies.resize(static_cast<std::size_t>(max_r + 1));
  m.red_strategies.resize(static_cast<std::size_t>(max_c + 1));
  m.cells.resize(static_cast<std::size_t>(max_r + 1) * static_cast<std::size_t>(max_c + 1));
  std::vector<char> seen(m.cells.size(), 0);
  auto parse = [](const std::string& s) {
    Strategy out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ';')) out.push_back(std::strtod(part.c_str(), nullptr));
    return out;
  };
  for (const auto& row : rows) {
    const std::size_t idx = static_cast<std::size_t>(row.r * (max_c + 1) + row.c);
    if (seen[idx]) throw std::runtime_error("payoff matrix: duplicate cell");
    seen[idx] = 1;
    m.blue_strategies[static_cast<std::size_t>(row.r)] = parse(row.bs);
    m.red_strategies[static_cast<std::size_t>(row.c)] = parse(row.rs);
    auto& cell = m.cells[idx];
    cell.mean_blue = row.mean;
    cell.seed_count = row.seeds;
    cell.valid = row.valid && std::isfinite(row.mean);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw std::runtime_error("payoff matrix: missing cells");
  return m;
}

PayoffMatrix read_payoff_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_payoff_matrix(in);
}

void write_cell_details(std::ostream& os, const PayoffMatrix& matrix) {
  os << "row,col,seed,turn,blue_score,red_score,advantage,utility_blue\n";
  for (int r = 0; r < matrix.rows(); ++r)
    for (int c = 0; c < matrix.cols(); ++c) {
      const auto& cell = matrix.cell(r, c);
      for (std::size_t s = 0; s < cell.seeds.size(); ++s) {
        if (s >= cell.advantage.size()) break;
        for (std::size_t k = 0; k < cell.advantage[s].size(); ++k)
          os << r << ',' << c << ',' << cell.seeds[s] << ',' << k << ',' << num(cell.blue_score[s][k]) << ','
             << num(cell.red_score[s][k]) << ',' << num(cell.advantage[s][k]) << ',' << num(cell.utility_blue[s])
             << '\n';
      }
    }
}

std::vector<fs::path> write_analysis(const PayoffMatrix& matrix, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> files;
  auto indices = [](const std::vector<int>& idx, std::span<const Strategy> names) {
    Json out = Json::array();
    for (int k : idx) out.push_back({{"index", k}, {"strategy", format_strategy(names[static_cast<std::size_t>(k)])}});
    return out;
  };

  Json dom, mm, summary;
  if (matrix.complete()) {
    const auto weak = dominance_analysis(matrix, false);
    const auto strict = dominance_analysis(matrix, true);
    for (const auto& [name, rep] : {std::pair{"weak", &weak}, std::pair{"strict", &strict}}) {
      dom[name] = {{"dominant_rows", indices(rep->dominant_rows, matrix.blue_strategies)},
                   {"dominated_rows", indices(rep->dominated_rows, matrix.blue_strategies)},
                   {"dominant_cols", indices(rep->dominant_cols, matrix.red_strategies)},
                   {"dominated_cols", indices(rep->dominated_cols, matrix.red_strategies)}};
    }
    const auto sol = maximin_solve(matrix);
    mm["value"] = sol.value;
    mm["row_guarantee"] = sol.row_guarantee;
    mm["col_guarantee"] = sol.col_guarantee;
    Json blue = Json::array(), red = Json::array();
    for (std::size_t k = 0; k < sol.row_strategy.size(); ++k)
      if (sol.row_strategy[k] > 0.0)
        blue.push_back({{"index", k}, {"strategy", format_strategy(matrix.blue_strategies[k])},
                        {"probability", sol.row_strategy[k]}});
    for (std::size_t k = 0; k < sol.col_strategy.size(); ++k)
      if (sol.col_strategy[k] > 0.0)
        red.push_back({{"index", k}, {"strategy", format_strategy(matrix.red_strategies[k])},
                       {"probability", sol.col_strategy[k]}});
    mm["blue_support"] = blue;
    mm["red_support"] = red;
    mm["blue_mixture"] = sol.row_strategy;
    mm["red_mixture"] = sol.col_strategy;

    const auto by = utility_by_strategy(matrix);
    auto out = open_out(dir / "utility_by_strategy.csv");
    out << "row,blue_strategy,first_action,count,mean,min,max\n";
    for (const auto& s : by)
      out << s.row << ',' << format_strategy(s.strategy) << ',' << num(s.strategy.empty() ? 0.0 : s.strategy.front())
          << ',' << s.values.size() << ',' << num(s.mean) << ',' << num(s.min) << ',' << num(s.max) << '\n';
    files.push_back(dir / "utility_by_strategy.csv");
    const auto& best = by[best_by_mean(by)];
    summary["best_blue_strategy_by_mean"] = format_strategy(best.strategy);
    summary["best_blue_mean_utility"] = best.mean;
    summary["value"] = sol.value;
  } else {
    const std::string why = "matrix has invalid cells; see failures.json";
    dom["error"] = why;
    mm["error"] = why;
    summary["error"] = why;
  }
  summary["rows"] = matrix.rows();
  summary["cols"] = matrix.cols();
  summary["cells"] = matrix.cells.size();
  write_json(dir / "dominance.json", dom);
  write_json(dir / "maximin.json", mm);
  write_json(dir / "summary.json", summary);
  files.push_back(dir / "dominance.json");
  files.push_back(dir / "maximin.json");
  files.push_back(dir / "summary.json");
  return files;
}

std::string version_string() { return KOTH_VERSION; }

// --- drivers --------------------------------------------------------------------

SweepReport run_sweep(const RunConfig& config, const fs::path& out, const SweepProgress& progress) {
  config.validate();
  fs::create_directories(out);
  const auto& game = config.game;
  const C2Network topology = build_force_network(game.layout);
  const auto strategies = enumerate_strategies(config.actions, game.turns);
  const std::size_t cols = strategies.size();

  // Density cells: Blue constant at each action against Red constant at the
  // first action, pooled over every seed.
  const Strategy red_const(static_cast<std::size_t>(game.turns), config.actions[0]);
  const int density_col = find_strategy(strategies, red_const);
  std::vector<int> density_rows;
  for (double a : config.actions.values())
    density_rows.push_back(find_strategy(strategies, Strategy(static_cast<std::size_t>(game.turns), a)));
  std::vector<DensityAccumulator> dens_blue, dens_red;
  for (std::size_t k = 0; k < density_rows.size(); ++k) {
    dens_blue.emplace_back(config.density);
    dens_red.emplace_back(config.density);
  }

  std::vector<double> boundaries;
  for (int k = 1; k < game.turns; ++k) boundaries.push_back(game.turn_boundary(k));
  std::vector<std::optional<ScoreSeries>> traces(strategies.size() * cols);

  auto density_slot = [&](const SweepJob& job) -> int {
    if (job.col != density_col) return -1;
    for (std::size_t k = 0; k < density_rows.size(); ++k)
      if (density_rows[k] == job.row) return static_cast<int>(k);
    return -1;
  };
  auto wants_trace = [&](const SweepJob& job) { return config.score_traces && job.seed_index == 0; };

  std::mutex mu;
  std::atomic<std::size_t> done{0};
  const std::size_t total = strategies.size() * cols * config.seeds.size();
  EnumerateOptions opts;
  opts.threads = config.threads;
  opts.keep_trajectory = [&](const SweepJob& job) { return wants_trace(job) || density_slot(job) >= 0; };
  opts.on_game = [&](const SweepJob& job, const GameResult& res) {
    if (res.trajectory) {
      const int slot = density_slot(job);
      std::optional<ScoreSeries> series;
      if (wants_trace(job)) series = score_timeseries(*res.trajectory, topology, game.model.hill_radius, boundaries);
      std::lock_guard lock(mu);
      if (slot >= 0) {
        dens_blue[static_cast<std::size_t>(slot)].add(*res.trajectory, topology, Population::Blue);
        dens_red[static_cast<std::size_t>(slot)].add(*res.trajectory, topology, Population::Red);
      }
      if (series) traces[static_cast<std::size_t>(job.row) * cols + static_cast<std::size_t>(job.col)] = std::move(series);
    }
    const std::size_t n = ++done;
    if (progress.on_game) {
      std::lock_guard lock(mu);
      progress.on_game(n, total);
    }
  };

  SweepReport report;
  report.matrix = enumerate_payoffs(game, config.actions, game.turns, config.seeds, opts);
  const auto& m = report.matrix;
  auto& files = report.files;

  {
    auto f = open_out(out / "payoff_matrix.csv");
    write_payoff_matrix(f, m);
    files.push_back(out / "payoff_matrix.csv");
  }
  {
    auto f = open_out(out / "cell_details.csv");
    write_cell_details(f, m);
    files.push_back(out / "cell_details.csv");
  }
  for (const auto& p : write_analysis(m, out)) files.push_back(p);

  for (std::size_t k = 0; k < density_rows.size(); ++k) {
    if (density_rows[k] < 0 || density_col < 0) continue;
    const std::string label = pi_label(config.actions[k]);
    for (const auto& [name, acc] : {std::pair{"blue", &dens_blue[k]}, std::pair{"red", &dens_red[k]}}) {
      const auto path = out / ("density_" + std::string(name) + "_" + label + ".csv");
      auto f = open_out(path);
      write_density(f, acc->grid());
      files.push_back(path);
    }
  }
  for (std::size_t r = 0; r < strategies.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& s = traces[r * cols + c];
      if (!s) continue;
      const auto path = out / ("scores_r" + std::to_string(r) + "_c" + std::to_string(c) + ".csv");
      auto f = open_out(path);
      write_scores(f, *s);
      files.push_back(path);
    }

  Json failures = Json::array();
  for (const auto& f : m.failures)
    failures.push_back({{"row", f.row},
                        {"col", f.col},
                        {"blue_strategy", format_strategy(m.blue_strategies[static_cast<std::size_t>(f.row)])},
                        {"red_strategy", format_strategy(m.red_strategies[static_cast<std::size_t>(f.col)])},
                        {"seed", f.seed},
                        {"turn", f.turn},
                        {"message", f.message}});
  write_json(out / "failures.json", failures);
  files.push_back(out / "failures.json");
  write_json(out / "provenance.json", provenance(config, "sweep"));
  files.push_back(out / "provenance.json");
  return report;
}

SimulationReport run_simulation(const RunConfig& config, const Strategy& blue, const Strategy& red,
                                std::uint64_t seed, const fs::path& out, std::size_t stride) {
  config.validate();
  for (const auto* s : {&blue, &red}) {
    if (static_cast<int>(s->size()) != config.game.turns)
      throw GameError("a strategy needs one frustration per turn (" + std::to_string(config.game.turns) + ")");
  }
  fs::create_directories(out);
  SimulationReport rep;
  rep.network = build_force_network(config.game.layout);
  rep.network.draw_frequencies(config.game.layout, seed);
  rep.result = play_game(config.game, rep.network, blue, red, seed, PlayOptions{true});

  std::vector<double> boundaries;
  for (int k = 1; k < config.game.turns; ++k) boundaries.push_back(config.game.turn_boundary(k));
  rep.scores = score_timeseries(*rep.result.trajectory, rep.network, config.game.model.hill_radius, boundaries);

  {
    auto f = open_out(out / "trajectory.csv");
    write_trajectory(f, *rep.result.trajectory, rep.network, std::max<std::size_t>(1, stride));
    rep.files.push_back(out / "trajectory.csv");
  }
  {
    auto f = open_out(out / "scores.csv");
    write_scores(f, rep.scores);
    rep.files.push_back(out / "scores.csv");
  }
  const auto& r = rep.result;
  Json res;
  res["seed"] = seed;
  res["blue_strategy"] = strategy_json(blue);
  res["red_strategy"] = strategy_json(red);
  res["turn_boundaries"] = boundaries;
  res["blue_score"] = r.blue_score;
  res["red_score"] = r.red_score;
  res["advantage_blue"] = r.advantage;
  res["utility_blue"] = r.utility_blue;
  res["utility_red"] = r.utility_red;
  write_json(out / "result.json", res);
  rep.files.push_back(out / "result.json");
  RunConfig used = config;
  used.seeds = {seed};
  write_json(out / "provenance.json", provenance(used, "simulate"));
  rep.files.push_back(out / "provenance.json");
  return rep;
}

std::vector<fs::path> export_network(const RunConfig& config, std::uint64_t seed, const fs::path& out) {
  config.validate();
  fs::create_directories(out);
  C2Network net = build_force_network(config.game.layout);
  net.draw_frequencies(config.game.layout, seed);
  {
    auto f = open_out(out / "roster.csv");
    write_roster(f, net);
  }
  {
    auto f = open_out(out / "edges.csv");
    write_edge_list(f, net);
  }
  RunConfig used = config;
  used.seeds = {seed};
  write_json(out / "provenance.json", provenance(used, "network"));
  return {out / "roster.csv", out / "edges.csv", out / "provenance.json"};
}

}  // namespace koth
