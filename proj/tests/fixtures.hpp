#pragma once

#include <numbers>
#include <random>
#include <vector>

#include "koth/dynamics.hpp"
#include "koth/game.hpp"
#include "koth/network.hpp"

namespace fixtures {

using namespace koth;

inline constexpr double pi = std::numbers::pi;

/// Small swarm-only graph: `blue` Blue agents then `red` Red agents, each
/// side all-to-all, complete bipartite across.
inline C2Network swarms(int blue, int red) {
  std::vector<AgentSpec> agents;
  for (int k = 0; k < blue + red; ++k) {
    const auto p = k < blue ? Population::Blue : Population::Red;
    agents.push_back({k, p, Echelon::Swarm, Role::SwarmAgent, 1.0, -1});
  }
  std::vector<Edge> edges;
  for (int i = 0; i < blue + red; ++i)
    for (int j = i + 1; j < blue + red; ++j) {
      const bool bi = i < blue, bj = j < blue;
      const auto cls = bi != bj ? LinkClass::SwarmAdversarial
                                : (bi ? LinkClass::IntraSwarmBlue : LinkClass::IntraSwarmRed);
      edges.push_back({i, j, 1.0, cls});
    }
  return C2Network::from_parts(std::move(agents), edges);
}

/// Reduced layout: small HQ trees and swarms.
inline ForceLayout small_layout(int hq = 5, int blue = 4, int red = 5) {
  ForceLayout l;
  for (int p = 0; p < 2; ++p) {
    l.hq_size[p] = hq;
    l.hq_branching[p] = hq == 5 ? std::vector<int>{1, 4} : std::vector<int>{1, hq - 1};
  }
  l.swarm_size[0] = blue;
  l.swarm_size[1] = red;
  return l;
}

/// 3-node HQ trees and two agents per swarm: ten agents in total.
inline C2Network ten_agents(std::uint64_t seed) {
  ForceLayout l;
  for (int p = 0; p < 2; ++p) {
    l.hq_size[p] = 3;
    l.hq_branching[p] = {1, 2};
    l.swarm_size[p] = 2;
  }
  l.seed = seed;
  return build_force_network(l);
}

/// Random packed state: phases in [0, 2pi), positions in [-lim, lim]^2.
inline std::vector<double> random_state(const C2Network& net, std::mt19937_64& rng, double lim = 1.5) {
  std::uniform_real_distribution<double> ph(0.0, 2 * pi), pos(-lim, lim);
  std::vector<double> y;
  for (int i = 0; i < net.size(); ++i) y.push_back(ph(rng));
  for (int s = 0; s < net.swarm_count(); ++s) {
    y.push_back(pos(rng));
    y.push_back(pos(rng));
  }
  return y;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace fixtures
