#include "koth/dynamics.hpp"

#include <numbers>
#include <ostream>
#include <string>

namespace koth {

CouplingTable CouplingTable::defaults() {
  CouplingTable t;
  t[LinkClass::IntraHqBlue] = 0.5;
  t[LinkClass::IntraHqRed] = 0.5;
  t[LinkClass::IntraSwarmBlue] = 8.0;
  t[LinkClass::IntraSwarmRed] = 4.0;
  t[LinkClass::HqAdversarial] = 2.0;
  t[LinkClass::SwarmAdversarial] = 0.5;
  t[LinkClass::ControllerToSwarmBlue] = 5.0;
  t[LinkClass::ControllerToSwarmRed] = 5.0;
  return t;
}

namespace {

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

double ModelParams::outside(double r) const {
  if (boundary_width <= 0.0) return r > hill_radius ? 1.0 : 0.0;
  return smoothstep((r - hill_radius) / boundary_width + 0.5);
}

double ModelParams::inside(double r) const {
  if (boundary_width <= 0.0) return r < hill_radius ? 1.0 : 0.0;
  return smoothstep((hill_radius - r) / boundary_width + 0.5);
}

void ModelParams::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DynamicsError(std::string(name) + " must be finite and >= 0");
  };
  for (std::size_t c = 0; c < kLinkClassCount; ++c)
    nonneg(coupling.sigma[c], ("coupling." + std::string(to_string(static_cast<LinkClass>(c)))).c_str());
  nonneg(attenuation, "attenuation");
  nonneg(field_gain, "field_gain");
  nonneg(alpha_suppression, "alpha_suppression");
  nonneg(repulsion, "repulsion");
  nonneg(spatial_coupling, "spatial_coupling");
  nonneg(pair_epsilon, "pair_epsilon");
  nonneg(boundary_width, "boundary_width");
  if (!(frequency_ratio > 1.0) || !std::isfinite(frequency_ratio))
    throw DynamicsError("frequency_ratio must be > 1");
  if (!(hill_radius > 0.0) || !std::isfinite(hill_radius)) throw DynamicsError("hill_radius must be > 0");
  for (int e = 0; e < 2; ++e)
    if (!std::isfinite(beta_self[e]) || !std::isfinite(beta_other[e]))
      throw DynamicsError("degree exponents must be finite");
}

std::vector<double> SimState::pack() const {
  std::vector<double> y;
  y.reserve(phases.size() + 2 * positions.size());
  y.insert(y.end(), phases.begin(), phases.end());
  for (const auto& p : positions) {
    y.push_back(p.x);
    y.push_back(p.y);
  }
  return y;
}

SimState SimState::unpack(double t, std::span<const double> y, int agent_count) {
  const auto L = static_cast<std::size_t>(agent_count);
  if (y.size() < L || (y.size() - L) % 2 != 0) throw DynamicsError("packed state has inconsistent length");
  SimState s;
  s.t = t;
  s.phases.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(L));
  for (std::size_t k = L; k < y.size(); k += 2) s.positions.push_back({y[k], y[k + 1]});
  return s;
}

std::string_view to_string(OodaState s) {
  switch (s) {
    case OodaState::Observe: return "observe";
    case OodaState::Orient: return "orient";
    case OodaState::Decide: return "decide";
    case OodaState::Act: return "act";
  }
  return "?";
}

OodaState ooda_state(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta, two_pi);
  if (w < 0.0) w += two_pi;
  int q = static_cast<int>(w / (std::numbers::pi / 2.0));
  if (q > 3) q = 3;  // w rounded up to 2*pi
  return static_cast<OodaState>(q);
}

double order_parameter(std::span<const double> phases, std::span<const int> subset) {
  if (subset.empty()) throw DynamicsError("order parameter of an empty subset");
  double c = 0.0, s = 0.0;
  for (int id : subset) {
    if (id < 0 || static_cast<std::size_t>(id) >= phases.size()) throw DynamicsError("subset id out of range");
    c += std::cos(phases[static_cast<std::size_t>(id)]);
    s += std::sin(phases[static_cast<std::size_t>(id)]);
  }
  const double n = static_cast<double>(subset.size());
  return std::min(1.0, std::hypot(c, s) / n);
}

Swarmalator::Swarmalator(const C2Network& net, const ModelParams& params, Frustration frustration)
    : net_(&net), params_(params), frustration_(frustration) {
  params_.validate();
  agent_count_ = net.size();
  swarm_count_ = net.swarm_count();
  couplings_.resize(static_cast<std::size_t>(agent_count_));
  swarm_ids_.resize(static_cast<std::size_t>(swarm_count_));
  swarm_pop_.resize(static_cast<std::size_t>(swarm_count_));

  for (int i = 0; i < agent_count_; ++i) {
    const auto& ai = net.agent(i);
    if (ai.echelon == Echelon::Swarm) {
      const auto slot = static_cast<std::size_t>(net.swarm_slot(i));
      swarm_ids_[slot] = i;
      swarm_pop_[slot] = static_cast<std::uint8_t>(index(ai.population));
    }
    const auto e = static_cast<std::size_t>(ai.echelon);
    const double di = std::pow(static_cast<double>(net.degree(i)), params_.beta_self[e]);
    for (const auto& n : net.neighbors(i)) {
      const auto& aj = net.agent(n.id);
      const double dj = std::pow(static_cast<double>(net.degree(n.id)), params_.beta_other[e]);
      Coupling c;
      c.j = n.id;
      c.coef = params_.coupling[n.cls] * n.weight / (di * dj);
      c.attenuated = ai.echelon == Echelon::Swarm && aj.echelon == Echelon::Swarm;
      c.other_scaled = ai.echelon == Echelon::Swarm && aj.echelon == Echelon::Headquarters;
      c.self_scaled = ai.echelon == Echelon::Headquarters && aj.echelon == Echelon::Swarm;
      c.adversarial = is_adversarial(n.cls);
      couplings_[static_cast<std::size_t>(i)].push_back(c);
    }
  }

  const auto L = static_cast<std::size_t>(agent_count_);
  cos_.resize(L);
  sin_.resize(L);
  cos_nu_.resize(L);
  sin_nu_.resize(L);
  radius_.resize(static_cast<std::size_t>(swarm_count_));
  dist_.resize(static_cast<std::size_t>(swarm_count_) * static_cast<std::size_t>(swarm_count_));
}

void Swarmalator::check(std::span<const double> y) const {
  if (y.size() != dimension())
    throw DynamicsError("state length " + std::to_string(y.size()) + " does not match network dimension " +
                        std::to_string(dimension()));
}

int Swarmalator::require_swarm(int i) const {
  const int slot = net_->swarm_slot(i);
  if (slot < 0) throw DynamicsError("agent " + std::to_string(i) + " is not a swarm agent");
  return slot;
}

double Swarmalator::own_swarm_sync(std::span<const double> y, int i) const {
  return order_parameter(y.first(static_cast<std::size_t>(agent_count_)),
                         net_->members(net_->agent(i).population, Echelon::Swarm));
}

double Swarmalator::own_hq_sync(std::span<const double> y, int i) const {
  const auto hq = net_->members(net_->agent(i).population, Echelon::Headquarters);
  if (hq.empty()) return 0.0;
  return order_parameter(y.first(static_cast<std::size_t>(agent_count_)), hq);
}

double Swarmalator::alpha_mod(double ri, double rj) const {
  const double in = params_.inside(ri);
  if (in == 0.0) return 0.0;
  const double c3 = params_.alpha_suppression;
  return params_.spatial_coupling * in * (1.0 - params_.outside(rj) * c3 * rj / (1.0 + c3 * rj));
}

double Swarmalator::spatial_frustration(int i, int j) const {
  const auto pi = net_->agent(i).population;
  return pi == net_->agent(j).population ? 0.0 : frustration_[pi];
}

double Swarmalator::effective_adjacency(std::span<const double> y, int i, int j) const {
  check(y);
  const double a = net_->adjacency(i, j);
  if (a == 0.0) return 0.0;
  const int si = net_->swarm_slot(i), sj = net_->swarm_slot(j);
  if (si < 0 || sj < 0) return a;
  return a / (1.0 + params_.attenuation * (pos(y, sj) - pos(y, si)).norm());
}

double Swarmalator::edge_weight(std::span<const double> y, int i, int j) const {
  check(y);
  for (const auto& c : couplings_[static_cast<std::size_t>(i)]) {
    if (c.j != j) continue;
    if (!c.attenuated) return c.coef;
    const double d = (pos(y, net_->swarm_slot(j)) - pos(y, net_->swarm_slot(i))).norm();
    return c.coef / (1.0 + params_.attenuation * d);
  }
  return 0.0;
}

void Swarmalator::prepare(std::span<const double> y) const {
  const auto L = static_cast<std::size_t>(agent_count_);
  const auto S = static_cast<std::size_t>(swarm_count_);
  const double nu = params_.frequency_ratio;
  for (std::size_t k = 0; k < L; ++k) {
    cos_[k] = std::cos(y[k]);
    sin_[k] = std::sin(y[k]);
    if (!net_->is_swarm(static_cast<int>(k))) {
      cos_nu_[k] = std::cos(nu * y[k]);
      sin_nu_[k] = std::sin(nu * y[k]);
    }
  }
  for (std::size_t a = 0; a < S; ++a) {
    const Vec2 xa = pos(y, static_cast<int>(a));
    radius_[a] = xa.norm();
    dist(a, a) = 0.0;
    for (std::size_t b = a + 1; b < S; ++b) dist(a, b) = dist(b, a) = (pos(y, static_cast<int>(b)) - xa).norm();
  }
}

void Swarmalator::phases_from_cache(std::span<const double> y, std::span<double> dtheta) const {
  (void)y;
  const auto L = static_cast<std::size_t>(agent_count_);
  const double cphi[2] = {std::cos(frustration_.phase[0]), std::cos(frustration_.phase[1])};
  const double sphi[2] = {std::sin(frustration_.phase[0]), std::sin(frustration_.phase[1])};
  const double c1 = params_.attenuation;

  for (std::size_t i = 0; i < L; ++i) {
    const auto& ai = net_->agents()[i];
    const auto pop = index(ai.population);
    const int si = net_->swarm_slot(static_cast<int>(i));
    double acc = 0.0;
    for (const auto& c : couplings_[i]) {
      const auto j = static_cast<std::size_t>(c.j);
      const double ca = c.other_scaled ? cos_nu_[j] : cos_[j];
      const double sa = c.other_scaled ? sin_nu_[j] : sin_[j];
      const double cb = c.self_scaled ? cos_nu_[i] : cos_[i];
      const double sb = c.self_scaled ? sin_nu_[i] : sin_[i];
      // sin(a - b + phi)
      double s = sa * cb - ca * sb;
      if (c.adversarial) s = s * cphi[pop] + (ca * cb + sa * sb) * sphi[pop];
      double w = c.coef;
      if (c.attenuated)
        w /= 1.0 + c1 * dist(static_cast<std::size_t>(si), static_cast<std::size_t>(net_->swarm_slot(c.j)));
      acc += w * s;
    }
    dtheta[i] = ai.omega + acc;
  }
}

void Swarmalator::positions_from_cache(std::span<const double> y, std::span<double> dx) const {
  const auto S = static_cast<std::size_t>(swarm_count_);
  const auto L = static_cast<std::size_t>(agent_count_);
  const auto theta = y.first(L);

  // Order parameters from the cached phasors.
  double swarm_sync[2], hq_sync[2];
  for (Population p : {Population::Blue, Population::Red}) {
    auto mean = [&](std::span<const int> ids) {
      if (ids.empty()) return 0.0;
      double c = 0.0, s = 0.0;
      for (int id : ids) {
        c += cos_[static_cast<std::size_t>(id)];
        s += sin_[static_cast<std::size_t>(id)];
      }
      return std::min(1.0, std::sqrt(c * c + s * s) / static_cast<double>(ids.size()));
    };
    swarm_sync[index(p)] = mean(net_->members(p, Echelon::Swarm));
    hq_sync[index(p)] = mean(net_->members(p, Echelon::Headquarters));
  }

  const double eps = params_.pair_epsilon;
  const double rho = params_.repulsion;
  const double c2sq = params_.field_gain * params_.field_gain;

  for (std::size_t si = 0; si < S; ++si) {
    const int i = swarm_ids_[si];
    const auto pi = swarm_pop_[si];
    const Vec2 xi = pos(y, static_cast<int>(si));
    const double ri = radius_[si];
    const bool engaged = params_.inside(ri) > 0.0;
    Vec2 att, rep;
    for (std::size_t sj = 0; sj < S; ++sj) {
      if (sj == si) continue;
      const double d = dist(si, sj);
      if (!(d > eps)) continue;
      const Vec2 u = (1.0 / d) * (pos(y, static_cast<int>(sj)) - xi);
      const double q = 1.0 + d * d;
      double num = 1.0;
      if (engaged) {
        const double a = alpha_mod(ri, radius_[sj]);
        if (a != 0.0) {
          const int j = swarm_ids_[sj];
          const double phi = swarm_pop_[sj] == pi ? 0.0 : frustration_.phase[pi];
          num += a * std::cos(theta[static_cast<std::size_t>(j)] - theta[static_cast<std::size_t>(i)] + phi);
        }
      }
      att += (num / std::sqrt(q)) * u;
      rep += (rho / (q * q)) * u;
    }
    Vec2 v = swarm_sync[pi] * att - rep;
    const double out = params_.outside(ri);
    if (out > 0.0) v -= (c2sq * hq_sync[pi] * out) * xi;
    dx[2 * si] = v.x;
    dx[2 * si + 1] = v.y;
  }
}

void Swarmalator::phase_rhs(std::span<const double> y, std::span<double> dtheta) const {
  check(y);
  if (dtheta.size() != static_cast<std::size_t>(agent_count_))
    throw DynamicsError("phase derivative buffer has wrong length");
  prepare(y);
  phases_from_cache(y, dtheta);
}

void Swarmalator::spatial_rhs(std::span<const double> y, std::span<double> dx) const {
  check(y);
  if (dx.size() != 2 * static_cast<std::size_t>(swarm_count_))
    throw DynamicsError("spatial derivative buffer has wrong length");
  prepare(y);
  positions_from_cache(y, dx);
}

void Swarmalator::operator()(double /*t*/, std::span<const double> y, std::span<double> dydt) const {
  check(y);
  if (dydt.size() != y.size()) throw DynamicsError("derivative buffer has wrong length");
  const auto L = static_cast<std::size_t>(agent_count_);
  prepare(y);
  phases_from_cache(y, dydt.first(L));
  positions_from_cache(y, dydt.subspan(L));
}

Vec2 Swarmalator::attraction(std::span<const double> y, int i) const {
  check(y);
  const int si = require_swarm(i);
  const Vec2 xi = pos(y, si);
  const double ri = xi.norm();
  Vec2 sum;
  for (int sj = 0; sj < swarm_count_; ++sj) {
    if (sj == si) continue;
    const int j = swarm_ids_[static_cast<std::size_t>(sj)];
    const Vec2 xj = pos(y, sj);
    const Vec2 d = xj - xi;
    const double dist = d.norm();
    if (!(dist > params_.pair_epsilon)) continue;
    const double a = alpha_mod(ri, xj.norm());
    const double num = 1.0 + a * std::cos(y[static_cast<std::size_t>(j)] - y[static_cast<std::size_t>(i)] +
                                          spatial_frustration(i, j));
    sum += (num / std::sqrt(1.0 + dist * dist) / dist) * d;
  }
  return own_swarm_sync(y, i) * sum;
}

Vec2 Swarmalator::repulsion(std::span<const double> y, int i) const {
  check(y);
  const int si = require_swarm(i);
  const Vec2 xi = pos(y, si);
  Vec2 sum;
  for (int sj = 0; sj < swarm_count_; ++sj) {
    if (sj == si) continue;
    const Vec2 d = pos(y, sj) - xi;
    const double dist = d.norm();
    if (!(dist > params_.pair_epsilon)) continue;
    const double q = 1.0 + dist * dist;
    sum += (params_.repulsion / (q * q) / dist) * d;
  }
  return sum;
}

Vec2 Swarmalator::field(std::span<const double> y, int i) const {
  check(y);
  const Vec2 xi = pos(y, require_swarm(i));
  const double out = params_.outside(xi.norm());
  if (out == 0.0) return {};
  return (-params_.field_gain * params_.field_gain * own_hq_sync(y, i) * out) * xi;
}

ForceBreakdown Swarmalator::forces(std::span<const double> y, int i) const {
  return {attraction(y, i), repulsion(y, i), field(y, i)};
}

namespace {

std::vector<double> packed(const SimState& state, const C2Network& net) {
  if (state.phases.size() != static_cast<std::size_t>(net.size()) ||
      state.positions.size() != static_cast<std::size_t>(net.swarm_count()))
    throw DynamicsError("state dimensions do not match the network");
  return state.pack();
}

}  // namespace

double effective_adjacency(const C2Network& net, const SimState& state, double attenuation, int i, int j) {
  ModelParams p;
  p.attenuation = attenuation;
  return Swarmalator(net, p).effective_adjacency(packed(state, net), i, j);
}

std::vector<double> phase_rhs(const SimState& state, const C2Network& net, const ModelParams& params,
                              Frustration frustration) {
  std::vector<double> out(static_cast<std::size_t>(net.size()));
  Swarmalator(net, params, frustration).phase_rhs(packed(state, net), out);
  return out;
}

Vec2 attraction_force(int i, const SimState& state, const C2Network& net, const ModelParams& params,
                      Frustration frustration) {
  return Swarmalator(net, params, frustration).attraction(packed(state, net), i);
}

Vec2 repulsion_force(int i, const SimState& state, const C2Network& net, const ModelParams& params) {
  return Swarmalator(net, params).repulsion(packed(state, net), i);
}

Vec2 field_force(int i, const SimState& state, const C2Network& net, const ModelParams& params) {
  return Swarmalator(net, params).field(packed(state, net), i);
}

std::vector<Vec2> spatial_rhs(const SimState& state, const C2Network& net, const ModelParams& params,
                              Frustration frustration) {
  std::vector<double> dx(2 * static_cast<std::size_t>(net.swarm_count()));
  Swarmalator(net, params, frustration).spatial_rhs(packed(state, net), dx);
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < dx.size(); k += 2) out.push_back({dx[k], dx[k + 1]});
  return out;
}

std::vector<double> full_rhs(const SimState& state, const C2Network& net, const ModelParams& params,
                             Frustration frustration) {
  const auto y = packed(state, net);
  std::vector<double> out(y.size());
  Swarmalator(net, params, frustration)(state.t, y, out);
  return out;
}

void write_force_breakdown(std::ostream& os, const Swarmalator& sys, double t, std::span<const double> y,
                           bool header) {
  if (header) os << "t,agent,att_x,att_y,rep_x,rep_y,field_x,field_y\n";
  const auto old = os.precision(10);
  const auto& net = sys.network();
  for (int i = 0; i < net.size(); ++i) {
    if (!net.is_swarm(i)) continue;
    const auto f = sys.forces(y, i);
    os << t << ',' << i << ',' << f.attraction.x << ',' << f.attraction.y << ',' << f.repulsion.x << ','
       << f.repulsion.y << ',' << f.field.x << ',' << f.field.y << '\n';
  }
  os.precision(old);
}

}  // namespace koth
