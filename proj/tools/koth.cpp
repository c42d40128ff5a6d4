// Command-line front end: simulate | sweep | analyze | network | config.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "koth/config.hpp"
#include "koth/harness.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration (defaults when omitted)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides $KOTH_OUTPUT_DIR and the config)");
  cmd->add_option("--seed", c.seed, "seed for this run");
  cmd->add_option("--threads", c.threads, "worker threads, 0 = all cores");
}

koth::RunConfig resolve(const Common& c) {
  koth::RunConfig cfg = c.config_path.empty() ? koth::RunConfig{} : koth::load_config(c.config_path);
  if (const char* env = std::getenv(koth::kOutputDirEnv); env && *env) cfg.output_dir = env;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.threads) cfg.threads = *c.threads;
  if (c.seed) cfg.seeds = {*c.seed};
  cfg.validate();
  return cfg;
}

void report(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"King-of-the-hill C2 swarmalator game"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Common sim_c, sweep_c, an_c, net_c;
  std::string blue_s, red_s;
  std::size_t stride = 1;
  auto* sim = app.add_subcommand("simulate", "play one game and write its trajectory and scores");
  add_common(sim, sim_c);
  sim->add_option("--blue", blue_s, "Blue frustrations per turn, e.g. \"pi/3,pi/3\"");
  sim->add_option("--red", red_s, "Red frustrations per turn");
  sim->add_option("--stride", stride, "write every n-th trajectory sample")->check(CLI::PositiveNumber);

  std::vector<std::uint64_t> seeds;
  bool quiet = false;
  auto* sweep = app.add_subcommand("sweep", "enumerate every strategy pair and analyze the payoff matrix");
  add_common(sweep, sweep_c);
  sweep->add_option("--seeds", seeds, "seed list (overrides the config)")->excludes("--seed");
  sweep->add_flag("--quiet", quiet, "no progress on stderr");

  std::string matrix;
  auto* analyze = app.add_subcommand("analyze", "dominance, maximin and utility summary for a payoff matrix");
  add_common(analyze, an_c);
  analyze->add_option("--matrix", matrix, "payoff_matrix.csv from a sweep")->required()->check(CLI::ExistingFile);

  auto* network = app.add_subcommand("network", "export the interaction graph and agent roster");
  add_common(network, net_c);

  Common cfg_c;
  auto* config = app.add_subcommand("config", "print the effective configuration as JSON");
  add_common(config, cfg_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) {
      auto cfg = resolve(sim_c);
      const std::size_t turns = static_cast<std::size_t>(cfg.game.turns);
      const koth::Strategy def(turns, cfg.actions[0]);
      const auto blue = blue_s.empty() ? def : koth::parse_strategy(blue_s);
      const auto red = red_s.empty() ? def : koth::parse_strategy(red_s);
      auto rep = koth::run_simulation(cfg, blue, red, cfg.seeds.front(), cfg.output_dir, stride);
      std::printf("U_B = %.6f  U_R = %.6f\n", rep.result.utility_blue, rep.result.utility_red);
      report(rep.files);
    } else if (*sweep) {
      auto cfg = resolve(sweep_c);
      if (!seeds.empty()) cfg.seeds = seeds;
      cfg.validate();
      koth::SweepProgress progress;
      if (!quiet)
        progress.on_game = [](std::size_t done, std::size_t total) {
          if (done == total || done % 16 == 0) std::fprintf(stderr, "\r%zu/%zu games", done, total);
          if (done == total) std::fprintf(stderr, "\n");
        };
      auto rep = koth::run_sweep(cfg, cfg.output_dir, progress);
      if (!rep.matrix.failures.empty())
        std::fprintf(stderr, "%zu games failed; see failures.json\n", rep.matrix.failures.size());
      report(rep.files);
    } else if (*analyze) {
      std::string out = an_c.out;
      if (out.empty()) {
        if (const char* env = std::getenv(koth::kOutputDirEnv); env && *env) out = env;
      }
      if (out.empty()) out = std::filesystem::path(matrix).parent_path().string();
      if (out.empty()) out = ".";
      const auto m = koth::read_payoff_matrix(std::filesystem::path(matrix));
      report(koth::write_analysis(m, out));
    } else if (*network) {
      auto cfg = resolve(net_c);
      report(koth::export_network(cfg, cfg.seeds.front(), cfg.output_dir));
    } else if (*config) {
      std::cout << koth::dump_config(resolve(cfg_c));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
