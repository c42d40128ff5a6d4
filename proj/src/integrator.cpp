#include "koth/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace koth {

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("integrator tolerances must be > 0");
  if (!(output_dt > 0.0)) throw std::invalid_argument("integrator output_dt must be > 0");
  if (!(max_step > 0.0)) throw std::invalid_argument("integrator max_step must be > 0");
  if (!(initial_step > 0.0)) throw std::invalid_argument("integrator initial_step must be > 0");
}

void Trajectory::push(double t, std::span<const double> y) {
  if (y.size() != dim_) throw std::invalid_argument("trajectory sample has wrong dimension");
  times_.push_back(t);
  data_.insert(data_.end(), y.begin(), y.end());
}

void Trajectory::append(const Trajectory& next) {
  if (next.empty()) return;
  if (empty()) {
    *this = next;
    return;
  }
  if (next.dim_ != dim_) throw std::invalid_argument("cannot append trajectories of different dimension");
  const std::size_t skip = next.times_.front() == times_.back() ? 1 : 0;
  for (std::size_t k = skip; k < next.size(); ++k) push(next.time(k), next.state(k));
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

std::vector<double> output_grid(double t0, double t1, double dt) {
  std::vector<double> grid;
  const double span = t1 - t0;
  const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  for (std::size_t k = 0; k < n; ++k) grid.push_back(t0 + static_cast<double>(k) * dt);
  grid.push_back(t1);
  if (grid.size() >= 2 && !(grid[grid.size() - 2] < t1)) grid.erase(grid.end() - 2);
  return grid;
}

}  // namespace

Trajectory integrate_segment(const Rhs& rhs, std::span<const double> y0, double t0, double t1,
                             const IntegratorConfig& config, int agent_count,
                             const std::function<long(std::size_t)>& agent_of, IntegrationStats* stats) {
  config.validate();
  if (!(t1 > t0)) throw std::invalid_argument("integrate_segment requires t1 > t0");
  const std::size_t n = y0.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(y0[i])) throw std::invalid_argument("initial state is not finite");

  auto fail_nonfinite = [&](double t, std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::isfinite(v[i])) continue;
      const long agent = agent_of ? agent_of(i) : -1;
      std::ostringstream msg;
      msg << "non-finite " << what << " at t=" << t << " in component " << i << " (agent " << agent << ")";
      throw IntegrationError(msg.str(), t, static_cast<long>(i), agent);
    }
  };

  IntegrationStats local;
  IntegrationStats& st = stats ? *stats : local;

  std::vector<double> y(y0.begin(), y0.end()), ynew(n), ytmp(n), err(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> r2(n), r3(n), r4(n), r5(n), yout(n);

  const auto grid = output_grid(t0, t1, config.output_dt);
  Trajectory traj(n, agent_count);
  traj.push(t0, y);
  std::size_t next = 1;

  double t = t0;
  double h = std::min({config.initial_step, config.max_step, t1 - t0});
  rhs(t, y, k1);
  ++st.evaluations;
  fail_nonfinite(t, k1, "derivative");

  bool last_rejected = false;
  while (t < t1) {
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < min_step) {
      std::ostringstream msg;
      msg << "step size underflow at t=" << t;
      throw IntegrationError(msg.str(), t, -1, -1);
    }
    bool final_step = false;
    if (t + h >= t1) {
      h = t1 - t;
      final_step = true;
    }

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tnew = final_step ? t1 : t + h;
    rhs(tnew, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(tnew, ynew, k7);
    st.evaluations += 6;

    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = config.atol + config.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = err[i] / sc;
      norm += q * q;
    }
    norm = std::sqrt(norm / static_cast<double>(n));

    if (!std::isfinite(norm)) {
      fail_nonfinite(tnew, k7, "derivative");
      fail_nonfinite(tnew, ynew, "state");
      h *= 0.2;
      last_rejected = true;
      ++st.rejected;
      continue;
    }

    if (norm <= 1.0) {
      ++st.accepted;
      // Dense output for grid points inside (t, tnew].
      if (next < grid.size() && grid[next] <= tnew) {
        for (std::size_t i = 0; i < n; ++i) {
          const double diff = ynew[i] - y[i];
          const double bspl = h * k1[i] - diff;
          r2[i] = diff;
          r3[i] = bspl;
          r4[i] = diff - h * k7[i] - bspl;
          r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        while (next < grid.size() && grid[next] <= tnew) {
          if (grid[next] == tnew) {
            traj.push(tnew, ynew);
          } else {
            const double th = (grid[next] - t) / h;
            const double th1 = 1.0 - th;
            for (std::size_t i = 0; i < n; ++i)
              yout[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
            traj.push(grid[next], yout);
          }
          ++next;
        }
      }
      t = tnew;
      y.swap(ynew);
      k1.swap(k7);
      double fac = 0.9 * std::pow(std::max(norm, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h = std::min(h * fac, config.max_step);
      last_rejected = false;
    } else {
      ++st.rejected;
      h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
      last_rejected = true;
    }
  }
  return traj;
}

Trajectory integrate_segment(const Swarmalator& system, const SimState& start, double t1,
                             const IntegratorConfig& config, IntegrationStats* stats) {
  const auto& net = system.network();
  const auto y0 = start.pack();
  if (y0.size() != system.dimension()) throw DynamicsError("initial state does not match the network");
  std::vector<int> slot_owner(static_cast<std::size_t>(net.swarm_count()));
  for (int i = 0; i < net.size(); ++i)
    if (net.is_swarm(i)) slot_owner[static_cast<std::size_t>(net.swarm_slot(i))] = i;
  const auto L = static_cast<std::size_t>(net.size());
  auto agent_of = [&](std::size_t k) -> long {
    return k < L ? static_cast<long>(k) : slot_owner[(k - L) / 2];
  };
  return integrate_segment([&](double t, std::span<const double> y, std::span<double> dy) { system(t, y, dy); },
                           y0, start.t, t1, config, net.size(), agent_of, stats);
}

int hill_count(const Trajectory& trajectory, std::size_t k, const C2Network& net, Population population,
               double hill_radius) {
  int count = 0;
  for (int id : net.members(population, Echelon::Swarm))
    if (trajectory.position(k, net.swarm_slot(id)).norm() <= hill_radius) ++count;
  return count;
}

double accumulate_occupancy(const Trajectory& trajectory, const C2Network& net, Population population,
                            double hill_radius) {
  if (trajectory.empty()) throw std::invalid_argument("occupancy of an empty trajectory");
  if (trajectory.agent_count() != net.size()) throw std::invalid_argument("trajectory does not match network");
  double score = 0.0;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k)
    score += hill_count(trajectory, k, net, population, hill_radius) * (trajectory.time(k + 1) - trajectory.time(k));
  return score;
}

void write_trajectory(std::ostream& os, const Trajectory& trajectory, const C2Network& net, std::size_t stride) {
  if (stride == 0) stride = 1;
  const auto old = os.precision(12);
  os << "t,agent_id,theta,x,y\n";
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    if (k % stride != 0 && k + 1 != trajectory.size()) continue;
    const auto s = trajectory.state(k);
    for (int i = 0; i < net.size(); ++i) {
      os << trajectory.time(k) << ',' << i << ',' << s[static_cast<std::size_t>(i)] << ',';
      if (net.is_swarm(i)) {
        const auto p = trajectory.position(k, net.swarm_slot(i));
        os << p.x << ',' << p.y;
      } else {
        os << ',';
      }
      os << '\n';
    }
  }
  os.precision(old);
}

}  // namespace koth
