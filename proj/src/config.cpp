#include "koth/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace koth {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kPopKeys[2] = {"blue", "red"};

// Reads an object while recording which keys were consumed, so that any
// left over can be reported as unknown.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    const Json* v = take(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(field(key) + " has the wrong type");
    }
  }

  void get_number(const char* key, double& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(field(key) + " must be a number");
    out = v->get<double>();
  }

  void get_int(const char* key, int& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(field(key) + " must be an integer");
    out = v->get<int>();
  }

  void get_pair(const char* key, double& a, double& b) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
      throw ConfigError(field(key) + " must be a two-element number array");
    a = (*v)[0].get<double>();
    b = (*v)[1].get<double>();
  }

  const Json* raw(const char* key) { return take(key); }

  std::optional<Reader> child(const char* key) {
    const Json* v = take(key);
    if (!v) return std::nullopt;
    return Reader(*v, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + field(it.key().c_str()) + "'");
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double angle_field(const Json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ConfigError(field + " must be a number or a multiple of pi");
  try {
    return parse_angle(v.get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

void read_layout(Reader r, ForceLayout& l) {
  if (auto c = r.child("hq_size")) {
    for (int p = 0; p < 2; ++p) c->get_int(kPopKeys[p], l.hq_size[p]);
    c->finish();
  }
  if (auto c = r.child("swarm_size")) {
    for (int p = 0; p < 2; ++p) c->get_int(kPopKeys[p], l.swarm_size[p]);
    c->finish();
  }
  if (auto c = r.child("hq_branching")) {
    for (int p = 0; p < 2; ++p) c->get(kPopKeys[p], l.hq_branching[p]);
    c->finish();
  }
  r.get_pair("hq_frequency", l.hq_frequency.lo, l.hq_frequency.hi);
  r.get_pair("swarm_frequency", l.swarm_frequency.lo, l.swarm_frequency.hi);
  r.get("seed", l.seed);
  r.finish();
}

void read_model(Reader r, ModelParams& m) {
  if (auto c = r.child("coupling")) {
    for (std::size_t k = 0; k < kLinkClassCount; ++k)
      c->get_number(std::string(to_string(static_cast<LinkClass>(k))).c_str(), m.coupling.sigma[k]);
    c->finish();
  }
  r.get_number("attenuation", m.attenuation);
  r.get_number("field_gain", m.field_gain);
  r.get_number("alpha_suppression", m.alpha_suppression);
  r.get_number("repulsion", m.repulsion);
  r.get_number("spatial_coupling", m.spatial_coupling);
  r.get_number("frequency_ratio", m.frequency_ratio);
  r.get_number("hill_radius", m.hill_radius);
  for (const char* key : {"beta_self", "beta_other"}) {
    double* target = std::string_view(key) == "beta_self" ? m.beta_self : m.beta_other;
    if (auto c = r.child(key)) {
      c->get_number("headquarters", target[0]);
      c->get_number("swarm", target[1]);
      c->finish();
    }
  }
  r.get_number("pair_epsilon", m.pair_epsilon);
  r.get_number("boundary_width", m.boundary_width);
  r.finish();
}

void read_integrator(Reader r, IntegratorConfig& c) {
  r.get_number("rtol", c.rtol);
  r.get_number("atol", c.atol);
  r.get_number("output_dt", c.output_dt);
  r.get_number("max_step", c.max_step);
  r.get_number("initial_step", c.initial_step);
  r.finish();
}

void read_initial(Reader r, InitialPlacement& p) {
  r.get_pair("blue_center", p.center[0].x, p.center[0].y);
  r.get_pair("red_center", p.center[1].x, p.center[1].y);
  r.get_number("radius", p.radius);
  r.finish();
}

RunConfig from_json(const Json& root) {
  RunConfig cfg;
  Reader r(root, "");
  int version = kConfigSchemaVersion;
  r.get_int("schema_version", version);
  if (version != kConfigSchemaVersion)
    throw ConfigError("schema_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  if (auto c = r.child("layout")) read_layout(*c, cfg.game.layout);
  if (auto c = r.child("model")) read_model(*c, cfg.game.model);
  if (auto c = r.child("integrator")) read_integrator(*c, cfg.game.integrator);
  if (auto c = r.child("initial")) read_initial(*c, cfg.game.initial);
  if (auto c = r.child("game")) {
    c->get_number("horizon", cfg.game.horizon);
    c->get_int("turns", cfg.game.turns);
    if (const Json* a = c->raw("actions")) {
      if (!a->is_array()) throw ConfigError("game.actions must be an array");
      std::vector<double> values;
      for (std::size_t k = 0; k < a->size(); ++k)
        values.push_back(angle_field((*a)[k], "game.actions[" + std::to_string(k) + "]"));
      try {
        cfg.actions = ActionSet(std::move(values));
      } catch (const GameError& e) {
        throw ConfigError(std::string("game.actions: ") + e.what());
      }
    }
    c->finish();
  }
  if (const Json* s = r.raw("seeds")) {
    if (!s->is_array()) throw ConfigError("seeds must be an array of non-negative integers");
    cfg.seeds.clear();
    for (const auto& v : *s) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("seeds must be an array of non-negative integers");
      cfg.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  r.get("output_dir", cfg.output_dir);
  if (const Json* t = r.raw("threads")) {
    if (!t->is_number_integer() || t->get<long long>() < 0) throw ConfigError("threads must be an integer >= 0");
    cfg.threads = t->get<unsigned>();
  }
  if (auto c = r.child("density")) {
    c->get_pair("window", cfg.density.window_lo, cfg.density.window_hi);
    c->get_int("resolution", cfg.density.resolution);
    c->finish();
  }
  r.get("score_traces", cfg.score_traces);
  r.finish();
  cfg.validate();
  return cfg;
}

Json to_json(const RunConfig& cfg) {
  const auto& g = cfg.game;
  const auto& l = g.layout;
  const auto& m = g.model;
  Json j;
  j["schema_version"] = kConfigSchemaVersion;

  Json layout;
  for (int p = 0; p < 2; ++p) {
    layout["hq_size"][kPopKeys[p]] = l.hq_size[p];
    layout["swarm_size"][kPopKeys[p]] = l.swarm_size[p];
    layout["hq_branching"][kPopKeys[p]] = l.hq_branching[p];
  }
  layout["hq_frequency"] = {l.hq_frequency.lo, l.hq_frequency.hi};
  layout["swarm_frequency"] = {l.swarm_frequency.lo, l.swarm_frequency.hi};
  layout["seed"] = l.seed;
  j["layout"] = layout;

  Json model;
  for (std::size_t k = 0; k < kLinkClassCount; ++k)
    model["coupling"][std::string(to_string(static_cast<LinkClass>(k)))] = m.coupling.sigma[k];
  model["attenuation"] = m.attenuation;
  model["field_gain"] = m.field_gain;
  model["alpha_suppression"] = m.alpha_suppression;
  model["repulsion"] = m.repulsion;
  model["spatial_coupling"] = m.spatial_coupling;
  model["frequency_ratio"] = m.frequency_ratio;
  model["hill_radius"] = m.hill_radius;
  model["beta_self"] = {{"headquarters", m.beta_self[0]}, {"swarm", m.beta_self[1]}};
  model["beta_other"] = {{"headquarters", m.beta_other[0]}, {"swarm", m.beta_other[1]}};
  model["pair_epsilon"] = m.pair_epsilon;
  model["boundary_width"] = m.boundary_width;
  j["model"] = model;

  const auto& ic = g.integrator;
  j["integrator"] = {{"rtol", ic.rtol},
                     {"atol", ic.atol},
                     {"output_dt", ic.output_dt},
                     {"max_step", ic.max_step},
                     {"initial_step", ic.initial_step}};
  j["initial"] = {{"blue_center", {g.initial.center[0].x, g.initial.center[0].y}},
                  {"red_center", {g.initial.center[1].x, g.initial.center[1].y}},
                  {"radius", g.initial.radius}};
  j["game"] = {{"horizon", g.horizon}, {"turns", g.turns}, {"actions", cfg.actions.values()}};
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["density"] = {{"window", {cfg.density.window_lo, cfg.density.window_hi}},
                  {"resolution", cfg.density.resolution}};
  j["score_traces"] = cfg.score_traces;
  return j;
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1, start = 0;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
      start = k + 1;
    } else {
      ++col;
    }
  }
  auto end = text.find('\n', start);
  if (end == std::string_view::npos) end = text.size();
  std::ostringstream os;
  os << "line " << line << ", column " << col << ": " << text.substr(start, end - start);
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  try {
    game.layout.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("layout: ") + e.what());
  }
  try {
    game.model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model.") + e.what());
  }
  try {
    game.integrator.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(game.horizon > 0.0) || !std::isfinite(game.horizon)) throw ConfigError("game.horizon must be > 0");
  if (game.turns < 1) throw ConfigError("game.turns must be >= 1");
  if (!(game.initial.radius >= 0.0)) throw ConfigError("initial.radius must be >= 0");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (!(density.window_hi > density.window_lo)) throw ConfigError("density.window must satisfy lo < hi");
  if (density.resolution < 1) throw ConfigError("density.resolution must be >= 1");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.game.layout == b.game.layout && a.game.model == b.game.model && a.game.integrator == b.game.integrator &&
         a.game.initial == b.game.initial && a.game.horizon == b.game.horizon && a.game.turns == b.game.turns &&
         a.actions == b.actions && a.seeds == b.seeds && a.output_dir == b.output_dir && a.threads == b.threads &&
         a.density == b.density && a.score_traces == b.score_traces;
}

double parse_angle(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  auto number = [&](const std::string& t) {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  };
  try {
    const auto p = s.find("pi");
    if (p == std::string::npos) return number(s);
    std::string num = s.substr(0, p);
    if (!num.empty() && num.back() == '*') num.pop_back();
    const std::string den = s.substr(p + 2);
    const double a = num.empty() ? 1.0 : num == "-" ? -1.0 : number(num);
    double b = 1.0;
    if (!den.empty()) {
      if (den.front() != '/') throw std::invalid_argument(den);
      b = number(den.substr(1));
    }
    return a * std::numbers::pi / b;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse angle '" + std::string(text) + "'");
  }
}

Strategy parse_strategy(std::string_view text) {
  Strategy out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of(",;", start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(parse_angle(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

RunConfig parse_config(std::string_view text) {
  bool blank = true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  if (blank) return RunConfig{};
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config parse error at " + line_context(text, e.byte));
  }
  return from_json(root);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << dump_config(config);
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump_config(config)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace koth
