#include "koth/network.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "koth/random.hpp"

namespace koth {

std::string_view to_string(Population p) { return p == Population::Blue ? "blue" : "red"; }

std::string_view to_string(Echelon e) {
  return e == Echelon::Headquarters ? "headquarters" : "swarm";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Commander: return "commander";
    case Role::Staff: return "staff";
    case Role::Controller: return "controller";
    case Role::SwarmAgent: return "swarm_agent";
  }
  return "?";
}

std::string_view to_string(LinkClass c) {
  switch (c) {
    case LinkClass::IntraHqBlue: return "intra_hq_blue";
    case LinkClass::IntraHqRed: return "intra_hq_red";
    case LinkClass::IntraSwarmBlue: return "intra_swarm_blue";
    case LinkClass::IntraSwarmRed: return "intra_swarm_red";
    case LinkClass::HqAdversarial: return "hq_adversarial";
    case LinkClass::SwarmAdversarial: return "swarm_adversarial";
    case LinkClass::ControllerToSwarmBlue: return "controller_to_swarm_blue";
    case LinkClass::ControllerToSwarmRed: return "controller_to_swarm_red";
  }
  return "?";
}

namespace {

void check_profile(int size, std::span<const int> profile) {
  if (size < 1) throw NetworkError("headquarters size must be >= 1");
  if (profile.empty()) throw NetworkError("branching profile is empty");
  if (profile.front() != 1) throw NetworkError("branching profile must start with a single root");
  for (int n : profile)
    if (n < 1) throw NetworkError("branching profile levels must be >= 1");
  const int total = std::accumulate(profile.begin(), profile.end(), 0);
  if (total != size)
    throw NetworkError("branching profile sums to " + std::to_string(total) +
                       " but headquarters size is " + std::to_string(size));
}

}  // namespace

void ForceLayout::validate() const {
  for (int p = 0; p < 2; ++p) {
    check_profile(hq_size[p], hq_branching[p]);
    if (swarm_size[p] < 1) throw NetworkError("swarm size must be >= 1");
  }
  if (!(hq_frequency.lo <= hq_frequency.hi) || !(swarm_frequency.lo <= swarm_frequency.hi))
    throw NetworkError("frequency range must satisfy lo <= hi");
}

HeadquartersTree build_headquarters(int size, std::span<const int> branching_profile) {
  check_profile(size, branching_profile);
  HeadquartersTree tree;
  tree.roles.assign(static_cast<std::size_t>(size), Role::Staff);
  tree.levels.assign(static_cast<std::size_t>(size), 0);

  int level_start = 0;
  int prev_start = 0;
  int prev_count = 0;
  for (std::size_t lv = 0; lv < branching_profile.size(); ++lv) {
    const int count = branching_profile[lv];
    for (int c = 0; c < count; ++c) {
      const int node = level_start + c;
      tree.levels[static_cast<std::size_t>(node)] = static_cast<int>(lv);
      if (lv > 0) {
        // contiguous, evenly sized blocks of children per parent
        const int parent = prev_start + static_cast<int>(
                                            static_cast<long long>(c) * prev_count / count);
        tree.edges.emplace_back(parent, node);
      }
    }
    prev_start = level_start;
    prev_count = count;
    level_start += count;
  }

  tree.roles[0] = Role::Commander;
  for (int c = 0; c < branching_profile.back(); ++c) tree.lowest_echelon.push_back(prev_start + c);
  tree.controller = tree.lowest_echelon.front();
  tree.roles[static_cast<std::size_t>(tree.controller)] = Role::Controller;
  return tree;
}

const AgentSpec& C2Network::agent(int id) const {
  if (id < 0 || id >= size()) throw NetworkError("agent id " + std::to_string(id) + " out of range");
  return agents_[static_cast<std::size_t>(id)];
}

std::span<const Neighbor> C2Network::neighbors(int id) const {
  agent(id);
  return adj_[static_cast<std::size_t>(id)];
}

double C2Network::adjacency(int i, int j) const {
  for (const auto& n : neighbors(i))
    if (n.id == j) return n.weight;
  agent(j);
  return 0.0;
}

std::vector<Edge> C2Network::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (int i = 0; i < size(); ++i)
    for (const auto& n : adj_[static_cast<std::size_t>(i)])
      if (i < n.id) out.push_back({i, n.id, n.weight, n.cls});
  return out;
}

void C2Network::add_edge(int i, int j, double w, LinkClass cls) {
  if (i == j) throw NetworkError("self loops are not allowed");
  adj_[static_cast<std::size_t>(i)].push_back({j, w, cls});
  adj_[static_cast<std::size_t>(j)].push_back({i, w, cls});
  ++edge_count_;
}

void C2Network::finalize() {
  for (auto& row : adj_) {
    std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k].id == row[k - 1].id) throw NetworkError("duplicate edge");
  }
  for (auto& byPop : members_)
    for (auto& v : byPop) v.clear();
  swarm_slot_.assign(agents_.size(), -1);
  controller_[0] = controller_[1] = -1;
  int slot = 0;
  for (const auto& a : agents_) {
    members_[index(a.population)][static_cast<std::size_t>(a.echelon)].push_back(a.id);
    if (a.echelon == Echelon::Swarm) swarm_slot_[static_cast<std::size_t>(a.id)] = slot++;
    if (a.role == Role::Controller) {
      if (controller_[index(a.population)] != -1)
        throw NetworkError("more than one controller in a population");
      controller_[index(a.population)] = a.id;
    }
  }
}

C2Network C2Network::from_parts(std::vector<AgentSpec> agents, std::span<const Edge> edges) {
  C2Network net;
  for (std::size_t k = 0; k < agents.size(); ++k)
    if (agents[k].id != static_cast<int>(k)) throw NetworkError("agent ids must be 0..L-1 in order");
  net.agents_ = std::move(agents);
  net.adj_.resize(net.agents_.size());
  for (const auto& e : edges) {
    net.agent(e.i);
    net.agent(e.j);
    net.add_edge(e.i, e.j, e.weight, e.cls);
  }
  net.finalize();
  return net;
}

void C2Network::draw_frequencies(const ForceLayout& layout, std::uint64_t seed) {
  RandomStream rng(seed, Stream::Frequencies);
  for (auto& a : agents_) {
    const auto& range = a.echelon == Echelon::Headquarters ? layout.hq_frequency : layout.swarm_frequency;
    a.omega = rng.uniform(range.lo, range.hi);
  }
}

C2Network build_force_network(const ForceLayout& layout) {
  layout.validate();
  C2Network net;
  const auto total = static_cast<std::size_t>(layout.total_agents());
  net.agents_.reserve(total);
  net.adj_.resize(total);

  auto append = [&](Population p, Echelon e, Role r, int level) {
    const int id = static_cast<int>(net.agents_.size());
    net.agents_.push_back({id, p, e, r, 0.0, level});
    return id;
  };

  constexpr Population kPops[2] = {Population::Blue, Population::Red};
  std::vector<int> lowest[2];
  int controller[2] = {-1, -1};

  for (Population p : kPops) {
    const auto pi = index(p);
    const auto tree = build_headquarters(layout.hq_size[pi], layout.hq_branching[pi]);
    const int base = static_cast<int>(net.agents_.size());
    for (std::size_t k = 0; k < tree.roles.size(); ++k) append(p, Echelon::Headquarters, tree.roles[k], tree.levels[k]);
    const auto cls = p == Population::Blue ? LinkClass::IntraHqBlue : LinkClass::IntraHqRed;
    for (auto [parent, child] : tree.edges) net.add_edge(base + parent, base + child, 1.0, cls);
    for (int l : tree.lowest_echelon) lowest[pi].push_back(base + l);
    controller[pi] = base + tree.controller;
  }

  for (int b : lowest[0])
    for (int r : lowest[1]) net.add_edge(b, r, 1.0, LinkClass::HqAdversarial);

  std::vector<int> swarm[2];
  for (Population p : kPops) {
    const auto pi = index(p);
    for (int k = 0; k < layout.swarm_size[pi]; ++k) swarm[pi].push_back(append(p, Echelon::Swarm, Role::SwarmAgent, -1));
    const auto intra = p == Population::Blue ? LinkClass::IntraSwarmBlue : LinkClass::IntraSwarmRed;
    const auto ctl = p == Population::Blue ? LinkClass::ControllerToSwarmBlue : LinkClass::ControllerToSwarmRed;
    const auto& s = swarm[pi];
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b) net.add_edge(s[a], s[b], 1.0, intra);
    for (int id : s) net.add_edge(controller[pi], id, 1.0, ctl);
  }

  for (int b : swarm[0])
    for (int r : swarm[1]) net.add_edge(b, r, 1.0, LinkClass::SwarmAdversarial);

  net.finalize();
  net.draw_frequencies(layout, layout.seed);
  return net;
}

std::optional<LinkClass> link_class(const C2Network& net, int i, int j) {
  net.agent(j);
  if (i == j) throw NetworkError("link_class requires distinct agents");
  for (const auto& n : net.neighbors(i))
    if (n.id == j) return n.cls;
  return std::nullopt;
}

void write_edge_list(std::ostream& os, const C2Network& net) {
  os << "i,j,weight,class\n";
  for (const auto& e : net.edges()) os << e.i << ',' << e.j << ',' << e.weight << ',' << to_string(e.cls) << '\n';
}

void write_roster(std::ostream& os, const C2Network& net) {
  const auto old = os.precision(17);
  os << "id,population,echelon,role,omega\n";
  for (const auto& a : net.agents())
    os << a.id << ',' << to_string(a.population) << ',' << to_string(a.echelon) << ',' << to_string(a.role) << ','
       << a.omega << '\n';
  os.precision(old);
}

}  // namespace koth
