#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "koth/harness.hpp"

using namespace koth;
namespace fs = std::filesystem;

namespace {

Trajectory constant_track(const C2Network& net, int samples, double dt, Vec2 where) {
  Trajectory t(static_cast<std::size_t>(net.size() + 2 * net.swarm_count()), net.size());
  for (int k = 0; k < samples; ++k) {
    std::vector<double> y(static_cast<std::size_t>(net.size()), 0.0);
    for (int s = 0; s < net.swarm_count(); ++s) {
      y.push_back(where.x);
      y.push_back(where.y);
    }
    t.push(k * dt, y);
  }
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("koth_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig tiny_run() {
  RunConfig c;
  c.game.layout = fixtures::small_layout();
  c.game.horizon = 1.0;
  c.actions = ActionSet({0.0, fixtures::pi / 2});
  c.seeds = {1, 2};
  c.threads = 2;
  c.density.resolution = 12;
  return c;
}

}  // namespace

TEST_CASE("density grid") {
  const auto net = fixtures::swarms(1, 1);
  SUBCASE("stationary agent puts all mass in one cell") {
    const std::vector<Trajectory> t{constant_track(net, 50, 0.1, {0.31, -0.52})};
    const auto g = density_grid(t, net, Population::Blue);
    CHECK(g.resolution == 120);
    int nonzero = 0;
    for (double d : g.density) nonzero += d > 0.0;
    CHECK(nonzero == 1);
    CHECK(std::abs(g.mass() - 1.0) < 1e-12);
    const int ix = static_cast<int>((0.31 + 3.0) / g.cell_size());
    const int iy = static_cast<int>((-0.52 + 3.0) / g.cell_size());
    CHECK(g.at(ix, iy) == doctest::Approx(1.0 / g.cell_area()));
  }
  SUBCASE("uniform samples give a flat density") {
    DensityOptions w{-1.0, 1.0, 10};
    DensityAccumulator acc(w);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 400000;
    for (int k = 0; k < n; ++k) acc.add(Vec2{u(rng), u(rng)});
    const auto g = acc.grid();
    const double expect = n / 100.0, sd = std::sqrt(n * 0.01 * 0.99);
    for (auto c : g.counts) CHECK(std::abs(static_cast<double>(c) - expect) < 5 * sd);
    CHECK(std::abs(g.mass() - 1.0) < 1e-12);
  }
  SUBCASE("nothing in the window") {
    const std::vector<Trajectory> t{constant_track(net, 5, 0.1, {10.0, 0.0})};
    const auto g = density_grid(t, net, Population::Red);
    CHECK(g.empty());
    CHECK(g.mass() == 0.0);
    CHECK(g.samples_total == 5);
  }
  SUBCASE("window edge belongs to the last cell") {
    DensityAccumulator acc(DensityOptions{-3.0, 3.0, 6});
    acc.add(Vec2{3.0, 3.0});
    const auto g = acc.grid();
    CHECK(g.counts.back() == 1);
  }
  CHECK_THROWS(density_grid(std::vector<Trajectory>{}, net, Population::Blue));
}

TEST_CASE("score time series") {
  const auto net = fixtures::swarms(3, 2);
  SUBCASE("never inside") {
    const auto t = constant_track(net, 11, 0.1, {2.0, 0.0});
    const auto s = score_timeseries(t, net, 1.0);
    for (double v : s.blue) CHECK(v == 0.0);
    for (double v : s.red) CHECK(v == 0.0);
  }
  SUBCASE("always inside") {
    const auto t = constant_track(net, 101, 0.1, {0.0, 0.5});
    const auto s = score_timeseries(t, net, 1.0);
    for (std::size_t k = 1; k < s.times.size(); ++k) {
      CHECK((s.blue[k] - s.blue[k - 1]) / (s.times[k] - s.times[k - 1]) == doctest::Approx(3.0));
      CHECK((s.red[k] - s.red[k - 1]) / (s.times[k] - s.times[k - 1]) == doctest::Approx(2.0));
    }
  }
  SUBCASE("consistent with a played game") {
    GameConfig g;
    g.layout = fixtures::small_layout();
    g.horizon = 3.0;
    const auto r = play_game(g, {0.0, 1.0}, {1.0, 0.0}, 9, PlayOptions{true});
    const auto topo = build_force_network(g.layout);
    const auto s = score_timeseries(*r.trajectory, topo, 1.0, std::vector<double>{1.5});
    CHECK(s.blue.back() == doctest::Approx(r.blue_score[0] + r.blue_score[1]).epsilon(1e-12));
    CHECK(s.red.back() == doctest::Approx(r.red_score[0] + r.red_score[1]).epsilon(1e-12));
    CHECK(s.blue.back() == doctest::Approx(accumulate_occupancy(*r.trajectory, topo, Population::Blue, 1.0)));
    for (std::size_t k = 1; k < s.times.size(); ++k) {
      CHECK(s.blue[k] >= s.blue[k - 1]);
      CHECK(s.red[k] >= s.red[k - 1]);
    }
    std::ostringstream os;
    write_scores(os, s);
    CHECK(os.str().rfind("t,omega_blue,omega_red,turn\n", 0) == 0);
    CHECK(os.str().find(",1\n") != std::string::npos);
  }
}

TEST_CASE("utility by strategy") {
  SUBCASE("one cell") {
    UtilityMatrix m(1, 1, 4.5);
    const std::vector<Strategy> s{{0.0}};
    const auto by = utility_by_strategy(m, s);
    REQUIRE(by.size() == 1);
    CHECK(by[0].values == std::vector<double>{4.5});
    CHECK(by[0].mean == 4.5);
  }
  SUBCASE("constant matrix") {
    UtilityMatrix m(3, 4, -2.0);
    const std::vector<Strategy> s{{2.0}, {0.0}, {1.0}};
    const auto by = utility_by_strategy(m, s);
    for (const auto& b : by) {
      CHECK(b.min == -2.0);
      CHECK(b.max == -2.0);
      CHECK(b.mean == -2.0);
    }
    // ordered by first action
    CHECK(by[0].row == 1);
    CHECK(by[1].row == 2);
    CHECK(by[2].row == 0);
  }
  SUBCASE("best by mean and first-action means") {
    PayoffMatrix pm;
    pm.blue_strategies = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}};
    pm.red_strategies = {{0.0, 0.0}, {1.0, 1.0}};
    const double u[3][2] = {{1, 2}, {5, -1}, {0, 0.5}};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) {
        PayoffCell cell;
        cell.mean_blue = u[r][c];
        pm.cells.push_back(cell);
      }
    const auto by = utility_by_strategy(pm);
    CHECK(by[best_by_mean(by)].row == 1);
    CHECK(mean_utility_for_first_action(pm, 0.0) == doctest::Approx(7.0 / 4));
    CHECK(mean_utility_for_first_action(pm, 1.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(mean_utility_for_first_action(pm, 2.0), GameError);
    pm.cells[1].valid = false;
    CHECK_THROWS_AS(utility_by_strategy(pm), GameError);
  }
}

TEST_CASE("payoff matrix files") {
  PayoffMatrix m;
  m.blue_strategies = enumerate_strategies(ActionSet{}, 1);
  m.red_strategies = m.blue_strategies;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int k = 0; k < 16; ++k) {
    PayoffCell c;
    c.mean_blue = g(rng);
    c.seed_count = 3;
    m.cells.push_back(c);
  }
  std::ostringstream os;
  write_payoff_matrix(os, m);
  std::istringstream is(os.str());
  const auto back = read_payoff_matrix(is);
  REQUIRE(back.rows() == 4);
  REQUIRE(back.cols() == 4);
  for (std::size_t k = 0; k < 16; ++k) CHECK(back.cells[k].mean_blue == m.cells[k].mean_blue);
  CHECK(back.blue_strategies == m.blue_strategies);
  std::ostringstream again;
  write_payoff_matrix(again, back);
  CHECK(again.str() == os.str());

  const auto a = scratch_dir("analysis_a"), b = scratch_dir("analysis_b");
  write_analysis(m, a);
  write_analysis(back, b);
  for (const char* f : {"dominance.json", "maximin.json", "utility_by_strategy.csv", "summary.json"})
    CHECK(slurp(a / f) == slurp(b / f));

  std::istringstream bad("row,col\n");
  CHECK_THROWS(read_payoff_matrix(bad));
  std::istringstream missing(
      "row,col,blue_strategy,red_strategy,mean_utility_blue,seed_count,valid\n0,1,0,0,1.5,1,1\n");
  CHECK_THROWS(read_payoff_matrix(missing));
}

TEST_CASE("sweep bundle") {
  const auto cfg = tiny_run();
  const auto out = scratch_dir("sweep");
  const auto rep = run_sweep(cfg, out);
  CHECK(rep.matrix.cells.size() == 16);
  for (const char* f : {"payoff_matrix.csv", "cell_details.csv", "dominance.json", "maximin.json",
                        "utility_by_strategy.csv", "failures.json", "provenance.json", "summary.json",
                        "density_blue_0.000pi.csv", "density_red_0.500pi.csv", "scores_r0_c0.csv",
                        "scores_r3_c2.csv"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  CHECK(slurp(out / "failures.json") == "[]\n");
  const auto prov = slurp(out / "provenance.json");
  CHECK(prov.find(config_hash(cfg)) != std::string::npos);
  CHECK(prov.find("\"seeds\"") != std::string::npos);

  // payoff rows: header + 16
  std::istringstream in(slurp(out / "payoff_matrix.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 17);

  // the analysis step alone reproduces the inline one
  const auto re = scratch_dir("sweep_analyze");
  write_analysis(read_payoff_matrix(out / "payoff_matrix.csv"), re);
  CHECK(slurp(re / "maximin.json") == slurp(out / "maximin.json"));
  CHECK(slurp(re / "dominance.json") == slurp(out / "dominance.json"));

  // a second run writes the same bytes
  const auto out2 = scratch_dir("sweep2");
  auto cfg2 = cfg;
  cfg2.threads = 1;
  run_sweep(cfg2, out2);
  CHECK(slurp(out / "payoff_matrix.csv") == slurp(out2 / "payoff_matrix.csv"));
  CHECK(slurp(out / "density_blue_0.500pi.csv") == slurp(out2 / "density_blue_0.500pi.csv"));

  auto none = cfg;
  none.seeds.clear();
  CHECK_THROWS_AS(run_sweep(none, scratch_dir("sweep_none")), ConfigError);
  CHECK_FALSE(fs::exists(fs::temp_directory_path() / "koth_test_sweep_none"));
}

TEST_CASE("single simulation and network export") {
  auto cfg = tiny_run();
  const auto out = scratch_dir("sim");
  const auto rep = run_simulation(cfg, {fixtures::pi / 2, 0.0}, {0.0, 0.0}, 7, out, 10);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "scores.csv"));
  CHECK(fs::exists(out / "result.json"));
  CHECK(rep.result.utility_blue + rep.result.utility_red == 0.0);
  CHECK(rep.scores.blue.back() == doctest::Approx(rep.result.blue_score[0] + rep.result.blue_score[1]));
  CHECK_THROWS_AS(run_simulation(cfg, {0.0}, {0.0, 0.0}, 7, out), GameError);

  const auto net_out = scratch_dir("net");
  export_network(cfg, 7, net_out);
  CHECK(slurp(net_out / "roster.csv").rfind("id,population,echelon,role,omega\n", 0) == 0);
  CHECK(slurp(net_out / "edges.csv").rfind("i,j,weight,class\n", 0) == 0);
}
