#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "koth/config.hpp"

using namespace koth;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
  for (const char* text : {"", "  \n", "{}"}) {
    const auto c = parse_config(text);
    CHECK(c.game.layout.hq_size[0] == 21);
    CHECK(c.game.layout.hq_size[1] == 21);
    CHECK(c.game.layout.swarm_size[0] == 20);
    CHECK(c.game.layout.swarm_size[1] == 25);
    CHECK(c.actions == ActionSet{});
    CHECK(c.game.turns == 2);
    CHECK(c.game.model.coupling[LinkClass::IntraSwarmBlue] == 8.0);
    CHECK(c.game.model.coupling[LinkClass::ControllerToSwarmRed] == 5.0);
    CHECK(c.game.model.frequency_ratio == 4.0);
    CHECK(c == RunConfig{});
  }
}

TEST_CASE("validation names the field") {
  CHECK(error_of(R"({"model": {"repulsion": -1}})").find("model.repulsion") != std::string::npos);
  CHECK(error_of(R"({"game": {"turns": 0}})").find("game.turns") != std::string::npos);
  CHECK(error_of(R"({"seeds": []})").find("seeds") != std::string::npos);
  CHECK(error_of(R"({"layout": {"hq_branching": {"blue": [1, 4]}}})").find("layout") != std::string::npos);
  CHECK(error_of(R"({"model": {"attenuation": "big"}})").find("model.attenuation") != std::string::npos);
  CHECK(error_of(R"({"game": {"actions": [1.0, 0.5]}})").find("game.actions") != std::string::npos);
  CHECK(error_of(R"({"schema_version": 2})").find("schema_version") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
  CHECK(error_of(R"({"modle": {}})").find("'modle'") != std::string::npos);
  CHECK(error_of(R"({"model": {"repulsoin": 2}})").find("'model.repulsoin'") != std::string::npos);
  CHECK(error_of(R"({"model": {"coupling": {"intra_hq_green": 2}}})").find("model.coupling.intra_hq_green") !=
        std::string::npos);
}

TEST_CASE("parse errors carry line context") {
  const auto e = error_of("{\n  \"seeds\": [1, 2,\n  \"threads\": 2\n}");
  CHECK(e.find("line 3") != std::string::npos);
}

TEST_CASE("angles") {
  CHECK(parse_angle("pi") == doctest::Approx(fixtures::pi));
  CHECK(parse_angle("pi/3") == doctest::Approx(fixtures::pi / 3));
  CHECK(parse_angle("2pi/3") == doctest::Approx(2 * fixtures::pi / 3));
  CHECK(parse_angle("0.5*pi") == doctest::Approx(fixtures::pi / 2));
  CHECK(parse_angle(" 1.25 ") == 1.25);
  CHECK_THROWS_AS(parse_angle("pie"), ConfigError);
  CHECK_THROWS_AS(parse_angle("1.2x"), ConfigError);
  CHECK(parse_strategy("pi/3,0") == Strategy{parse_angle("pi/3"), 0.0});
  CHECK(parse_strategy("0;pi") == Strategy{0.0, parse_angle("pi")});

  const auto c = parse_config(R"({"game": {"actions": [0, "pi/2", "pi"]}})");
  CHECK(c.actions.size() == 3);
  CHECK(c.actions[1] == parse_angle("pi/2"));
}

TEST_CASE("save and load round-trip") {
  RunConfig c;
  c.game.layout = fixtures::small_layout(5, 3, 7);
  c.game.layout.seed = 99;
  c.game.model.repulsion = 3.25;
  c.game.model.coupling[LinkClass::HqAdversarial] = 0.1 + 0.2;  // not exactly representable in decimal
  c.game.integrator.rtol = 1e-7;
  c.game.initial.center[1] = {2.5, -0.125};
  c.game.horizon = 12.0;
  c.game.turns = 3;
  c.actions = ActionSet({0.0, 1.0 / 3.0});
  c.seeds = {4, 5, 18446744073709551615ull};
  c.output_dir = "elsewhere";
  c.threads = 3;
  c.density = {-2.0, 2.0, 50};
  c.score_traces = false;

  const auto path = std::filesystem::temp_directory_path() / "koth_test_config.json";
  save_config(c, path);
  const auto back = load_config(path);
  CHECK(back == c);
  CHECK(dump_config(back) == dump_config(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(back).size() == 16);
  CHECK(config_hash(RunConfig{}) != config_hash(c));
  CHECK(parse_config(dump_config(RunConfig{})) == RunConfig{});

  CHECK_THROWS_AS(load_config("/nonexistent/koth.json"), ConfigError);
}
