#pragma once

// Right-hand side of the coupled phase/space swarmalator system.
//
// Packed state layout used by the integrator: the L phases in agent-id order,
// followed by (x, y) for every swarm agent in swarm-slot order, i.e. a vector
// of length L + 2 * |swarm|.

#include <array>
#include <cmath>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "koth/network.hpp"

namespace koth {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  bool operator==(const Vec2&) const = default;
  double norm() const { return std::sqrt(x * x + y * y); }
};

class DynamicsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-class coupling strengths.
struct CouplingTable {
  std::array<double, kLinkClassCount> sigma{};

  double& operator[](LinkClass c) { return sigma[static_cast<std::size_t>(c)]; }
  double operator[](LinkClass c) const { return sigma[static_cast<std::size_t>(c)]; }
  bool operator==(const CouplingTable&) const = default;

  static CouplingTable defaults();
};

struct ModelParams {
  CouplingTable coupling = CouplingTable::defaults();
  double attenuation = 1.0;        // c1: distance attenuation of swarm links
  double field_gain = 1.0;         // c2, enters squared
  double alpha_suppression = 5.0;  // c3
  double repulsion = 4.0;          // rho; keep above 1 + alpha or synchronized pairs collapse
  double spatial_coupling = 2.0;   // base alpha_ij on every swarm pair
  double frequency_ratio = 4.0;    // nu, multiplies headquarters phases seen by swarm agents
  double hill_radius = 1.0;
  /// Degree exponents indexed by the *receiving* agent's echelon
  /// (0 = headquarters, 1 = swarm): d_i^beta_self[e_i] * d_j^beta_other[e_i].
  double beta_self[2] = {1.0, 1.0};
  double beta_other[2] = {1.0, 0.0};
  double pair_epsilon = 1e-9;
  /// Width of the band around the hill edge over which the hill indicators
  /// inside the forces ramp smoothly (C1); 0 gives the sharp indicators.
  double boundary_width = 0.1;

  /// Smoothed 1{|x| > hill_radius}.
  double outside(double r) const;
  /// Smoothed 1{|x| < hill_radius}; exactly 1 - outside(r) away from r == R.
  double inside(double r) const;

  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

/// Each player's frustration, applied on that player's adversarial links.
struct Frustration {
  double phase[2] = {0.0, 0.0};

  double operator[](Population p) const { return phase[index(p)]; }
  static Frustration of(double blue, double red) { return Frustration{{blue, red}}; }
};

struct SimState {
  double t = 0.0;
  std::vector<double> phases;  // unwrapped, one per agent
  std::vector<Vec2> positions;  // one per swarm agent, swarm-slot order

  std::vector<double> pack() const;
  static SimState unpack(double t, std::span<const double> y, int agent_count);
};

enum class OodaState { Observe = 0, Orient = 1, Decide = 2, Act = 3 };
std::string_view to_string(OodaState s);
OodaState ooda_state(double theta);

/// Magnitude of the mean unit phasor over `subset`.
double order_parameter(std::span<const double> phases, std::span<const int> subset);

struct ForceBreakdown {
  Vec2 attraction;
  Vec2 repulsion;
  Vec2 field;
};

/// Precomputed evaluator for one (network, params) pair. Holds scratch
/// buffers, so an instance must not be shared between threads.
class Swarmalator {
 public:
  Swarmalator(const C2Network& net, const ModelParams& params, Frustration frustration = {});

  void set_frustration(Frustration f) { frustration_ = f; }
  Frustration frustration() const { return frustration_; }
  const C2Network& network() const { return *net_; }
  const ModelParams& params() const { return params_; }

  std::size_t dimension() const { return static_cast<std::size_t>(agent_count_ + 2 * swarm_count_); }
  int agent_count() const { return agent_count_; }

  /// Full derivative of the packed state.
  void operator()(double t, std::span<const double> y, std::span<double> dydt) const;

  void phase_rhs(std::span<const double> y, std::span<double> dtheta) const;
  void spatial_rhs(std::span<const double> y, std::span<double> dx) const;

  /// Coupling prefactor sigma * A_ij(x) / (d_i^b1 d_j^b2) for the edge i <- j.
  double edge_weight(std::span<const double> y, int i, int j) const;
  double effective_adjacency(std::span<const double> y, int i, int j) const;

  Vec2 attraction(std::span<const double> y, int i) const;
  Vec2 repulsion(std::span<const double> y, int i) const;
  Vec2 field(std::span<const double> y, int i) const;
  ForceBreakdown forces(std::span<const double> y, int i) const;

 private:
  struct Coupling {
    int j;
    double coef;       // sigma * A / degree scaling
    bool attenuated;   // both endpoints spatial
    bool self_scaled;  // theta_i enters multiplied by nu
    bool other_scaled; // theta_j enters multiplied by nu
    bool adversarial;
  };

  void check(std::span<const double> y) const;
  void prepare(std::span<const double> y) const;
  void phases_from_cache(std::span<const double> y, std::span<double> dtheta) const;
  void positions_from_cache(std::span<const double> y, std::span<double> dx) const;
  Vec2 pos(std::span<const double> y, int slot) const {
    const auto k = static_cast<std::size_t>(agent_count_ + 2 * slot);
    return {y[k], y[k + 1]};
  }
  int require_swarm(int i) const;
  double own_swarm_sync(std::span<const double> y, int i) const;
  double own_hq_sync(std::span<const double> y, int i) const;
  double alpha_mod(double ri, double rj) const;
  double& dist(std::size_t a, std::size_t b) const {
    return dist_[a * static_cast<std::size_t>(swarm_count_) + b];
  }
  double spatial_frustration(int i, int j) const;

  const C2Network* net_;
  ModelParams params_;
  Frustration frustration_;
  int agent_count_ = 0;
  int swarm_count_ = 0;
  std::vector<std::vector<Coupling>> couplings_;
  std::vector<int> swarm_ids_;          // slot -> agent id
  std::vector<std::uint8_t> swarm_pop_;  // slot -> population index

  mutable std::vector<double> cos_, sin_, cos_nu_, sin_nu_;
  mutable std::vector<double> radius_;
  mutable std::vector<double> dist_;  // swarm-slot pair distances
};

// Free-function forms over SimState. Each builds a Swarmalator internally.
double effective_adjacency(const C2Network& net, const SimState& state, double attenuation, int i, int j);
std::vector<double> phase_rhs(const SimState& state, const C2Network& net, const ModelParams& params,
                              Frustration frustration);
Vec2 attraction_force(int i, const SimState& state, const C2Network& net, const ModelParams& params,
                      Frustration frustration);
Vec2 repulsion_force(int i, const SimState& state, const C2Network& net, const ModelParams& params);
Vec2 field_force(int i, const SimState& state, const C2Network& net, const ModelParams& params);
std::vector<Vec2> spatial_rhs(const SimState& state, const C2Network& net, const ModelParams& params,
                              Frustration frustration);
std::vector<double> full_rhs(const SimState& state, const C2Network& net, const ModelParams& params,
                             Frustration frustration);

/// CSV rows t,agent,att_x,att_y,rep_x,rep_y,field_x,field_y for every swarm agent.
void write_force_breakdown(std::ostream& os, const Swarmalator& sys, double t, std::span<const double> y,
                           bool header);

}  // namespace koth
