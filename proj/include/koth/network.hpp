#pragma once

// Two-force command-and-control graph: two hierarchical headquarters joined
// at their lowest echelons, one controller per side driving an all-to-all
// swarm, and all-to-all adversarial links between the swarms.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace koth {

enum class Population : std::uint8_t { Blue = 0, Red = 1 };
enum class Echelon : std::uint8_t { Headquarters = 0, Swarm = 1 };
enum class Role : std::uint8_t { Commander, Staff, Controller, SwarmAgent };

enum class LinkClass : std::uint8_t {
  IntraHqBlue = 0,
  IntraHqRed,
  IntraSwarmBlue,
  IntraSwarmRed,
  HqAdversarial,
  SwarmAdversarial,
  ControllerToSwarmBlue,
  ControllerToSwarmRed,
};
inline constexpr std::size_t kLinkClassCount = 8;

std::string_view to_string(Population p);
std::string_view to_string(Echelon e);
std::string_view to_string(Role r);
std::string_view to_string(LinkClass c);

constexpr Population opponent(Population p) {
  return p == Population::Blue ? Population::Red : Population::Blue;
}
constexpr std::size_t index(Population p) { return static_cast<std::size_t>(p); }
constexpr bool is_adversarial(LinkClass c) {
  return c == LinkClass::HqAdversarial || c == LinkClass::SwarmAdversarial;
}

/// Thrown for malformed layouts, bad ids and similar caller errors.
class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AgentSpec {
  int id = 0;
  Population population = Population::Blue;
  Echelon echelon = Echelon::Headquarters;
  Role role = Role::Staff;
  /// Natural frequency (decision speed), radians per unit time.
  double omega = 0.0;
  /// Depth in the headquarters tree (0 = commander); -1 for swarm agents.
  int level = -1;
};

struct FrequencyRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const FrequencyRange&) const = default;
};

/// Per-population sizes and headquarters tree shape. Index with index(Population).
struct ForceLayout {
  int hq_size[2] = {21, 21};
  int swarm_size[2] = {20, 25};
  /// Nodes per tree level, root first; must sum to hq_size.
  std::vector<int> hq_branching[2] = {{1, 4, 16}, {1, 4, 16}};
  FrequencyRange hq_frequency{0.25, 0.5};
  FrequencyRange swarm_frequency{1.0, 2.0};
  std::uint64_t seed = 0;

  int total_agents() const {
    return hq_size[0] + hq_size[1] + swarm_size[0] + swarm_size[1];
  }
  void validate() const;
  bool operator==(const ForceLayout&) const = default;
};

struct Neighbor {
  int id;
  double weight;
  LinkClass cls;
};

struct Edge {
  int i;
  int j;
  double weight;
  LinkClass cls;
};

/// Result of building one headquarters tree with local ids 0..size-1.
struct HeadquartersTree {
  std::vector<Role> roles;
  std::vector<int> levels;
  std::vector<std::pair<int, int>> edges;  // (parent, child), local ids
  int controller = 0;
  std::vector<int> lowest_echelon;  // local ids of the last level
};

/// Builds a tree whose level k has branching_profile[k] nodes; children are
/// spread as evenly as possible over the previous level. The first leaf is
/// the controller.
HeadquartersTree build_headquarters(int size, std::span<const int> branching_profile);

/// Immutable interaction graph. Agents are ordered Blue HQ, Red HQ, Blue
/// swarm, Red swarm.
class C2Network {
 public:
  C2Network() = default;

  int size() const { return static_cast<int>(agents_.size()); }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  const AgentSpec& agent(int id) const;

  std::span<const Neighbor> neighbors(int id) const;
  int degree(int id) const { return static_cast<int>(neighbors(id).size()); }
  /// Stored edge weight, 0 when no edge.
  double adjacency(int i, int j) const;
  /// Every edge once with i < j, sorted lexicographically.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edge_count_; }

  std::span<const int> members(Population p, Echelon e) const {
    return members_[index(p)][static_cast<std::size_t>(e)];
  }
  int controller(Population p) const { return controller_[index(p)]; }
  bool is_swarm(int id) const { return agent(id).echelon == Echelon::Swarm; }
  /// Position slot of a swarm agent in the packed state, -1 for HQ agents.
  int swarm_slot(int id) const { return swarm_slot_[static_cast<std::size_t>(id)]; }
  int swarm_count() const {
    return static_cast<int>(members_[0][1].size() + members_[1][1].size());
  }

  /// Replaces every natural frequency with a fresh draw from the layout's
  /// ranges using the frequency stream of `seed`.
  void draw_frequencies(const ForceLayout& layout, std::uint64_t seed);

  friend C2Network build_force_network(const ForceLayout& layout);
  /// Assembles an arbitrary graph; used for small hand-built instances.
  static C2Network from_parts(std::vector<AgentSpec> agents, std::span<const Edge> edges);

 private:
  void add_edge(int i, int j, double w, LinkClass cls);
  void finalize();

  std::vector<AgentSpec> agents_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<int> members_[2][2];
  std::vector<int> swarm_slot_;
  int controller_[2] = {-1, -1};
  std::size_t edge_count_ = 0;
};

C2Network build_force_network(const ForceLayout& layout);

std::optional<LinkClass> link_class(const C2Network& net, int i, int j);

/// CSV: i,j,weight,class
void write_edge_list(std::ostream& os, const C2Network& net);
/// CSV: id,population,echelon,role,omega
void write_roster(std::ostream& os, const C2Network& net);

}  // namespace koth
