#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "koth/dynamics.hpp"
#include "koth/network.hpp"

namespace koth {

struct IntegratorConfig {
  double rtol = 1e-6;
  double atol = 1e-8;
  double output_dt = 0.01;
  double max_step = 0.1;
  double initial_step = 1e-3;

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

/// Raised on step-size underflow or a non-finite derivative.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time, long component, long agent)
      : std::runtime_error(what), time_(time), component_(component), agent_(agent) {}
  double time() const { return time_; }
  /// Packed-state index of the first non-finite value, -1 if not applicable.
  long component() const { return component_; }
  /// Agent owning that component, -1 if not applicable.
  long agent() const { return agent_; }

 private:
  double time_;
  long component_;
  long agent_;
};

/// Uniformly sampled packed states. Samples are stored row-major.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t dimension, int agent_count) : dim_(dimension), agents_(agent_count) {}

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  std::size_t dimension() const { return dim_; }
  int agent_count() const { return agents_; }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t k) const { return times_[k]; }
  std::span<const double> state(std::size_t k) const { return {data_.data() + k * dim_, dim_}; }
  std::span<const double> back() const { return state(size() - 1); }
  SimState snapshot(std::size_t k) const { return SimState::unpack(times_[k], state(k), agents_); }
  Vec2 position(std::size_t k, int slot) const {
    const auto s = state(k);
    const auto base = static_cast<std::size_t>(agents_) + 2 * static_cast<std::size_t>(slot);
    return {s[base], s[base + 1]};
  }

  void push(double t, std::span<const double> y);
  /// Appends `next`, dropping its first sample when it repeats our last time.
  void append(const Trajectory& next);

 private:
  std::size_t dim_ = 0;
  int agents_ = 0;
  std::vector<double> times_;
  std::vector<double> data_;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

using Rhs = std::function<void(double, std::span<const double>, std::span<double>)>;

/// Adaptive Dormand-Prince 5(4) with its 4th-order continuous extension,
/// sampled on t0, t0 + dt, ..., t1 (the last interval may be shorter).
/// `agent_of` maps a packed index to an agent id for error reports.
Trajectory integrate_segment(const Rhs& rhs, std::span<const double> y0, double t0, double t1,
                             const IntegratorConfig& config, int agent_count,
                             const std::function<long(std::size_t)>& agent_of = {},
                             IntegrationStats* stats = nullptr);

Trajectory integrate_segment(const Swarmalator& system, const SimState& start, double t1,
                             const IntegratorConfig& config, IntegrationStats* stats = nullptr);

/// Left-rectangle integral over the samples of the number of `population`
/// swarm agents with |x| <= hill_radius.
double accumulate_occupancy(const Trajectory& trajectory, const C2Network& net, Population population,
                            double hill_radius);

/// Number of `population` swarm agents on the hill at sample k.
int hill_count(const Trajectory& trajectory, std::size_t k, const C2Network& net, Population population,
               double hill_radius);

/// CSV: t,agent_id,theta,x,y with x,y empty for headquarters agents.
void write_trajectory(std::ostream& os, const Trajectory& trajectory, const C2Network& net,
                      std::size_t stride = 1);

}  // namespace koth
