#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "flatblow/errors.hpp"
#include "flatblow/modulation.hpp"
#include "flatblow/params.hpp"
#include "flatblow/pde_solver.hpp"

namespace flatblow {

inline constexpr std::array<const char*, 5> kCommands{"simulate", "shoot", "verify", "spectral", "profile-table"};

struct RunConfig {
  std::string command = "simulate";
  ModelParams mp;
  YGrid yg;
  RGrid rg;
  WSettings ws;
  RadialSettings rs;

  // simulate / shoot
  std::array<double, 6> d6{};
  double s_end = 12.0;
  bool physical = false;  // simulate: run the radial PDE to blow-up instead
  double s_target = 13.0;
  int budget = 500;
  int bisect_steps = 8;
  int threads = 0;

  // spectral: CSV with columns y,value
  std::string input;

  // profile-table
  double profile_s = 10.0;
  double y_max = 10.0;
  int ny = 201;

  std::string out;  // verify: report path (default out_dir/verify.json)
  std::string out_dir = "out";
  bool svg = true;
};

// Thrown for --help; what() holds the text. Not an error.
struct HelpRequested : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// argv[1] is the subcommand. Precedence: defaults < --config file < explicit flags.
RunConfig parse_config(int argc, const char* const* argv);
RunConfig parse_config(const std::vector<std::string>& args);

// Flat JSON with the flag names as keys. Unknown keys throw UsageError naming the key.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// Ranges beyond ModelParams::validate (grids, tolerances, budgets, command options).
void validate(const RunConfig& c);

std::string help_text(const std::string& command = {});

}  // namespace flatblow
