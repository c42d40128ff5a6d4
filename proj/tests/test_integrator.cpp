#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace koth;

namespace {

// Synthetic trajectory: one Blue swarm agent (plus nothing else) following xs.
Trajectory track(const C2Network& net, const std::vector<double>& times, const std::vector<std::vector<Vec2>>& xs) {
  Trajectory t(static_cast<std::size_t>(net.size() + 2 * net.swarm_count()), net.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> y(static_cast<std::size_t>(net.size()), 0.0);
    for (auto x : xs[k]) {
      y.push_back(x.x);
      y.push_back(x.y);
    }
    t.push(times[k], y);
  }
  return t;
}

}  // namespace

TEST_CASE("pure drift is exact") {
  const std::vector<double> omega{0.3, 1.7, -0.4};
  Rhs drift = [&](double, std::span<const double>, std::span<double> d) {
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = omega[k];
  };
  const std::vector<double> y0{0.1, 2.0, -3.0};
  const auto traj = integrate_segment(drift, y0, 0.5, 7.25, IntegratorConfig{}, 3);
  const auto last = traj.back();
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(last[k] - (y0[k] + omega[k] * 6.75)) < 1e-9);
}

TEST_CASE("output grid") {
  Rhs zero = [](double, std::span<const double>, std::span<double> d) { d[0] = 0.0; };
  IntegratorConfig cfg;
  cfg.output_dt = 0.3;
  const auto traj = integrate_segment(zero, std::vector<double>{1.0}, 1.0, 2.0, cfg, 1);
  REQUIRE(traj.size() == 5);  // 1.0, 1.3, 1.6, 1.9, 2.0
  CHECK(traj.time(0) == 1.0);
  CHECK(traj.time(3) == doctest::Approx(1.9));
  CHECK(traj.time(4) == 2.0);
  for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.time(k) > traj.time(k - 1));
  CHECK_THROWS_AS(integrate_segment(zero, std::vector<double>{1.0}, 1.0, 1.0, cfg, 1), std::invalid_argument);
}

TEST_CASE("two-oscillator locking matches the arcsin prediction") {
  std::vector<AgentSpec> agents{{0, Population::Blue, Echelon::Swarm, Role::SwarmAgent, 1.3, -1},
                                {1, Population::Blue, Echelon::Swarm, Role::SwarmAgent, 1.0, -1}};
  const std::vector<Edge> edges{{0, 1, 1.0, LinkClass::IntraSwarmBlue}};
  const auto net = C2Network::from_parts(agents, edges);
  ModelParams p;
  p.coupling = CouplingTable{};
  const double K = 1.0;
  p.coupling[LinkClass::IntraSwarmBlue] = K;
  p.attenuation = 0.0;
  Swarmalator sys(net, p);
  SimState s;
  s.phases = {0.0, 2.0};
  s.positions = {{-0.5, 0.0}, {0.5, 0.0}};
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  cfg.output_dt = 1.0;
  const auto traj = integrate_segment(sys, s, 60.0, cfg);
  const auto y = traj.back();
  const double delta = std::remainder(y[0] - y[1], 2 * fixtures::pi);
  CHECK(std::abs(delta - std::asin(0.3 / (2 * K))) < 1e-6);
}

TEST_CASE("adaptive solution agrees with fixed-step RK4") {
  const auto net = fixtures::ten_agents(4);
  REQUIRE(net.size() == 10);
  ModelParams p;
  const auto f = Frustration::of(fixtures::pi / 3, 0.0);
  Swarmalator sys(net, p, f);
  std::mt19937_64 rng(9);
  const auto y0 = fixtures::random_state(net, rng, 2.0);
  const auto start = SimState::unpack(0.0, y0, net.size());
  const auto adaptive = integrate_segment(sys, start, 5.0, IntegratorConfig{});
  const auto ref = oracle::rk4([&](double, const std::vector<double>& y) { return oracle::rhs(net, p, f, y); }, y0,
                               0.0, 5.0, 1e-3);
  const auto last = adaptive.back();
  CHECK(fixtures::max_abs_diff(std::vector<double>(last.begin(), last.end()), ref) < 1e-3);
}

TEST_CASE("tightening tolerances converges") {
  const auto net = fixtures::ten_agents(8);
  ModelParams p;
  Swarmalator sys(net, p, Frustration::of(0.0, fixtures::pi / 2));
  std::mt19937_64 rng(2);
  const auto start = SimState::unpack(0.0, fixtures::random_state(net, rng, 2.0), net.size());
  // error against a very tight reference shrinks as the tolerances do
  IntegratorConfig loose, tight, ref;
  loose.rtol = 1e-4;
  loose.atol = 1e-6;
  tight.rtol = 1e-8;
  tight.atol = 1e-10;
  ref.rtol = 1e-10;
  ref.atol = 1e-12;
  const auto ta = integrate_segment(sys, start, 5.0, loose);
  const auto tb = integrate_segment(sys, start, 5.0, tight);
  const auto tr = integrate_segment(sys, start, 5.0, ref);
  double ea = 0.0, eb = 0.0;
  for (std::size_t k = 0; k < tr.back().size(); ++k) {
    ea = std::max(ea, std::abs(ta.back()[k] - tr.back()[k]));
    eb = std::max(eb, std::abs(tb.back()[k] - tr.back()[k]));
  }
  CHECK(ea < 1e-3);
  CHECK(eb < ea / 10);
}

TEST_CASE("integration failures name the time and agent") {
  Rhs blowup = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = 0.0;
    d[1] = y[1] * y[1];  // y = 1 / (1 - t) blows up at t = 1
  };
  try {
    integrate_segment(blowup, std::vector<double>{0.0, 1.0}, 0.0, 2.0, IntegratorConfig{}, 2,
                      [](std::size_t k) { return static_cast<long>(k) + 100; });
    FAIL("expected an IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time() > 0.9);
    CHECK(e.time() < 1.01);
    if (e.component() >= 0) {
      CHECK(e.component() == 1);
      CHECK(e.agent() == 101);
    }
  }
  Rhs nan = [](double t, std::span<const double>, std::span<double> d) {
    d[0] = 1.0;
    d[1] = t > 0.5 ? std::nan("") : 0.0;
  };
  try {
    integrate_segment(nan, std::vector<double>{0.0, 0.0}, 0.0, 1.0, IntegratorConfig{}, 2,
                      [](std::size_t k) { return static_cast<long>(k) * 10; });
    FAIL("expected an IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.component() == 1);
    CHECK(e.agent() == 10);
    CHECK(e.time() >= 0.4);
  }
}

TEST_CASE("occupancy on synthetic trajectories") {
  const auto net = fixtures::swarms(5, 1);
  const double dt = 0.01;
  std::vector<double> times;
  for (int k = 0; k <= 1000; ++k) times.push_back(k * dt);

  SUBCASE("always inside") {
    std::vector<std::vector<Vec2>> xs(times.size(), std::vector<Vec2>(6, Vec2{0.2, 0.1}));
    const auto t = track(net, times, xs);
    CHECK(std::abs(accumulate_occupancy(t, net, Population::Blue, 1.0) - 50.0) < 1e-9);
    CHECK(std::abs(accumulate_occupancy(t, net, Population::Red, 1.0) - 10.0) < 1e-9);
  }
  SUBCASE("always outside") {
    std::vector<std::vector<Vec2>> xs(times.size(), std::vector<Vec2>(6, Vec2{3.0, 0.0}));
    CHECK(accumulate_occupancy(track(net, times, xs), net, Population::Blue, 1.0) == 0.0);
  }
  SUBCASE("inside for half of the samples") {
    std::vector<std::vector<Vec2>> xs;
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::vector<Vec2> row(6, Vec2{5.0, 5.0});
      if (k % 2 == 0) row[0] = {0.0, 0.5};
      xs.push_back(row);
    }
    CHECK(std::abs(accumulate_occupancy(track(net, times, xs), net, Population::Blue, 1.0) - 5.0) <= dt);
  }
  SUBCASE("entering at a known time") {
    // Outside before t = 3.337, inside after: analytic score 10 - 3.337.
    std::vector<std::vector<Vec2>> xs;
    for (double t : times) {
      std::vector<Vec2> row(6, Vec2{5.0, 5.0});
      if (t >= 3.337) row[0] = {0.5, 0.0};
      xs.push_back(row);
    }
    CHECK(std::abs(accumulate_occupancy(track(net, times, xs), net, Population::Blue, 1.0) - (10.0 - 3.337)) <= dt);
  }
  SUBCASE("the hill edge counts as inside") {
    std::vector<std::vector<Vec2>> xs(times.size(), std::vector<Vec2>(6, Vec2{5.0, 5.0}));
    for (auto& row : xs) row[1] = {0.6, 0.8};  // |x| == 1 exactly
    const auto t = track(net, times, xs);
    CHECK(hill_count(t, 0, net, Population::Blue, 1.0) == 1);
    CHECK(std::abs(accumulate_occupancy(t, net, Population::Blue, 1.0) - 10.0) < 1e-9);
    CHECK(accumulate_occupancy(t, net, Population::Blue, 0.999999) == 0.0);
  }
  SUBCASE("additive over a shared sample and monotone in radius") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<Vec2>> xs;
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::vector<Vec2> row;
      for (int a = 0; a < 6; ++a) row.push_back({g(rng), g(rng)});
      xs.push_back(row);
    }
    const auto whole = track(net, times, xs);
    const std::vector<double> t1(times.begin(), times.begin() + 401), t2(times.begin() + 400, times.end());
    const std::vector<std::vector<Vec2>> x1(xs.begin(), xs.begin() + 401), x2(xs.begin() + 400, xs.end());
    const double full = accumulate_occupancy(whole, net, Population::Blue, 1.0);
    const double parts = accumulate_occupancy(track(net, t1, x1), net, Population::Blue, 1.0) +
                         accumulate_occupancy(track(net, t2, x2), net, Population::Blue, 1.0);
    CHECK(std::abs(full - parts) < 1e-9);
    double prev = -1.0;
    for (double r : {0.25, 0.5, 1.0, 1.5, 2.0, 4.0}) {
      const double s = accumulate_occupancy(whole, net, Population::Blue, r);
      CHECK(s >= prev);
      prev = s;
    }
  }
}

TEST_CASE("trajectory export and determinism") {
  const auto net = fixtures::ten_agents(1);
  Swarmalator sys(net, ModelParams{});
  std::mt19937_64 rng(6);
  const auto start = SimState::unpack(0.0, fixtures::random_state(net, rng), net.size());
  IntegratorConfig cfg;
  cfg.output_dt = 0.25;
  const auto a = integrate_segment(sys, start, 1.0, cfg);
  const auto b = integrate_segment(sys, start, 1.0, cfg);
  std::ostringstream sa, sb;
  write_trajectory(sa, a, net);
  write_trajectory(sb, b, net);
  CHECK(sa.str() == sb.str());
  std::istringstream in(sa.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,agent_id,theta,x,y");
  std::getline(in, line);  // t = 0, agent 0 is headquarters
  CHECK(line.substr(line.size() - 2) == ",,");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows + 1 == 5 * net.size());

  // Chaining two segments reproduces the final state of one long run.
  const auto first = integrate_segment(sys, start, 0.5, cfg);
  auto joined = first;
  joined.append(integrate_segment(sys, first.snapshot(first.size() - 1), 1.0, cfg));
  CHECK(joined.size() == a.size());
}
