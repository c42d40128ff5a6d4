#pragma once

// Run configuration: a versioned JSON document. Every key is optional and
// falls back to the documented default; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "koth/game.hpp"

namespace koth {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "KOTH_OUTPUT_DIR";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DensityOptions {
  double window_lo = -3.0;
  double window_hi = 3.0;
  int resolution = 120;
  bool operator==(const DensityOptions&) const = default;
};

struct RunConfig {
  GameConfig game;
  ActionSet actions;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";
  unsigned threads = 0;
  DensityOptions density;
  bool score_traces = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON with every field spelled out.
std::string dump_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::filesystem::path& path);
/// A number or a multiple of pi: "1.2", "pi", "pi/3", "2pi/3", "0.5*pi".
double parse_angle(std::string_view text);
/// Comma- or semicolon-separated angles.
Strategy parse_strategy(std::string_view text);

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace koth
