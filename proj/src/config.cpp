#include "flatblow/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>

#include "CLI11.hpp"

namespace flatblow {

namespace {

using Ref = std::variant<double*, int*, long*, bool*, std::string*, std::array<double, 6>*>;

struct Field {
  const char* key;
  const char* help;
  Ref ref;
  bool global;  // shown for every subcommand
};

std::vector<Field> fields(RunConfig& c) {
  return {
      {"p", "nonlinearity exponent, > 1", &c.mp.p, true},
      {"d", "space dimension, >= 2, (d-2)p <= d+2", &c.mp.d, true},
      {"r0", "radius of the blow-up sphere", &c.mp.r0, true},
      {"eps0", "cutoff scale, in (0,1)", &c.mp.eps0, true},
      {"A", "shrinking-set scale, >= 1", &c.mp.A, true},
      {"eta0", "regular-region bound, in (0,1]", &c.mp.eta0, true},
      {"s0", "initial similarity time", &c.mp.s0, true},
      {"L", "y grid half-width", &c.yg.L, true},
      {"dy", "y grid spacing", &c.yg.dy, true},
      {"r_max", "radial domain [0, r_max]", &c.rg.r_max, true},
      {"dr_fine", "radial spacing near the sphere", &c.rg.dr_fine, true},
      {"fine_halfwidth", "half-width of the fine radial band", &c.rg.fine_halfwidth, true},
      {"dr_coarse", "radial spacing far from the sphere", &c.rg.dr_coarse, true},
      {"growth", "geometric growth of radial cells", &c.rg.growth, true},
      {"rtol", "w-solver relative tolerance", &c.ws.rtol, true},
      {"atol", "w-solver absolute tolerance", &c.ws.atol, true},
      {"c_safe", "w-solver explicit stability factor", &c.ws.c_safe, true},
      {"snapshot_ds", "frame spacing in s", &c.ws.snapshot_ds, true},
      {"upwind", "first-order upwind drift", &c.ws.upwind, true},
      {"radial_rtol", "radial solver relative tolerance", &c.rs.rtol, true},
      {"radial_atol", "radial solver absolute tolerance", &c.rs.atol, true},
      {"d6", "initial data d0..d5, comma separated, each in [-2,2]", &c.d6, false},
      {"s_end", "simulate: final similarity time", &c.s_end, false},
      {"physical", "simulate: radial PDE to blow-up", &c.physical, false},
      {"s_target", "shoot: target exit time", &c.s_target, false},
      {"budget", "shoot: trajectory evaluations", &c.budget, false},
      {"bisect_steps", "shoot: bisection steps per coordinate", &c.bisect_steps, false},
      {"threads", "shoot: worker threads (0: FLATBLOW_THREADS or hardware)", &c.threads, false},
      {"input", "spectral: CSV with columns y,value", &c.input, false},
      {"profile_s", "profile-table: similarity time", &c.profile_s, false},
      {"y_max", "profile-table: y range [-y_max, y_max]", &c.y_max, false},
      {"ny", "profile-table: number of rows", &c.ny, false},
      {"out", "verify: report JSON path (CSV written next to it)", &c.out, false},
      {"out_dir", "output directory", &c.out_dir, true},
      {"svg", "write SVG plots next to CSV", &c.svg, true},
  };
}

std::array<double, 6> parse_d6(const std::string& text) {
  std::array<double, 6> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t k = 0;
  while (std::getline(ss, item, ',')) {
    if (k >= 6) throw UsageError("d6", "expects 6 comma-separated numbers");
    try {
      std::size_t used = 0;
      out[k] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("d6", "not a number: '" + item + "'");
    }
    ++k;
  }
  if (k != 6) throw UsageError("d6", "expects 6 comma-separated numbers");
  return out;
}

std::string d6_text(const std::array<double, 6>& d) {
  std::string s;
  char buf[32];
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", d[k]);
    if (k) s += ',';
    s += buf;
  }
  return s;
}

// One JSON value into a field; type mismatches are usage errors on that key.
void assign(const Field& f, const nlohmann::json& v) {
  const std::string key = f.key;
  auto number = [&]() -> double {
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw UsageError(key, "expects a number");
    return v.get<double>();
  };
  auto integer = [&]() -> long {
    if (!v.is_number_integer()) throw UsageError(key, "expects an integer");
    return v.get<long>();
  };
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          *p = number();
        } else if constexpr (std::is_same_v<T, int>) {
          *p = static_cast<int>(integer());
        } else if constexpr (std::is_same_v<T, long>) {
          *p = integer();
        } else if constexpr (std::is_same_v<T, bool>) {
          if (!v.is_boolean()) throw UsageError(key, "expects true or false");
          *p = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) throw UsageError(key, "expects a string");
          *p = v.get<std::string>();
        } else {
          if (v.is_string()) {
            *p = parse_d6(v.get<std::string>());
          } else if (v.is_array() && v.size() == 6) {
            for (std::size_t k = 0; k < 6; ++k) {
              if (!v[k].is_number()) throw UsageError(key, "expects 6 numbers");
              (*p)[k] = v[k].get<double>();
            }
          } else {
            throw UsageError(key, "expects 6 numbers");
          }
        }
      },
      f.ref);
}

nlohmann::json value_of(const Field& f) {
  return std::visit(
      [](auto* p) -> nlohmann::json {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          if (std::isinf(*p)) return nullptr;
          return *p;
        } else if constexpr (std::is_same_v<T, std::array<double, 6>>) {
          return nlohmann::json(std::vector<double>(p->begin(), p->end()));
        } else {
          return *p;
        }
      },
      f.ref);
}

bool known_command(const std::string& c) {
  for (const char* k : kCommands) {
    if (c == k) return true;
  }
  return false;
}

void require(bool ok, const char* key, const std::string& msg) {
  if (!ok) throw UsageError(key, msg);
}

// Key named in a CLI11 message, e.g. "--p: ..." or "... --foo".
std::string key_in(const std::string& msg) {
  const auto at = msg.find("--");
  if (at == std::string::npos) return "argument";
  auto end = msg.find_first_of(" :,\n", at);
  return msg.substr(at + 2, end == std::string::npos ? std::string::npos : end - at - 2);
}

void add_options(CLI::App& app, RunConfig& c, std::string& config_path, std::string& d6_str, bool command_fields) {
  app.add_option("--config", config_path, "flat JSON file with the same keys as the flags");
  for (const Field& f : fields(c)) {
    if (!f.global && !command_fields) continue;
    const std::string flag = std::string("--") + f.key;
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, bool>) {
            app.add_option(flag, *p, f.help)->capture_default_str();
          } else if constexpr (std::is_same_v<T, std::array<double, 6>>) {
            d6_str = d6_text(*p);
            app.add_option(flag, d6_str, f.help)->capture_default_str();
          } else {
            app.add_option(flag, *p, f.help)->capture_default_str();
          }
        },
        f.ref);
  }
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, RunConfig base) {
  if (!j.is_object()) throw UsageError("config", "expects a flat JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "command") {
      if (!it.value().is_string() || !known_command(it.value().get<std::string>())) {
        throw UsageError("command", "unknown command");
      }
      base.command = it.value().get<std::string>();
      continue;
    }
    bool found = false;
    for (const Field& f : fields(base)) {
      if (it.key() == f.key) {
        assign(f, it.value());
        found = true;
        break;
      }
    }
    if (!found) throw UsageError(it.key(), "unknown key");
  }
  return base;
}

nlohmann::json config_to_json(const RunConfig& c) {
  RunConfig copy = c;
  nlohmann::json j;
  j["command"] = c.command;
  for (const Field& f : fields(copy)) j[f.key] = value_of(f);
  return j;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j, std::move(base));
}

void validate(const RunConfig& c) {
  c.mp.validate();
  require(known_command(c.command), "command", "unknown command '" + c.command + "'");
  require(c.yg.L > 0.0 && std::isfinite(c.yg.L), "L", "must be positive");
  require(c.yg.dy > 0.0 && c.yg.dy < c.yg.L, "dy", "must lie in (0, L)");
  require(c.rg.r_max > c.mp.r0, "r_max", "must exceed r0");
  require(c.rg.dr_fine > 0.0, "dr_fine", "must be positive");
  require(c.rg.dr_coarse >= c.rg.dr_fine, "dr_coarse", "must be >= dr_fine");
  require(c.rg.fine_halfwidth > 0.0, "fine_halfwidth", "must be positive");
  require(c.rg.growth > 1.0, "growth", "must exceed 1");
  require(c.ws.rtol > 0.0 && c.ws.rtol < 1.0, "rtol", "must lie in (0,1)");
  require(c.ws.atol > 0.0, "atol", "must be positive");
  require(c.ws.c_safe > 0.0 && c.ws.c_safe <= 1.0, "c_safe", "must lie in (0,1]");
  require(c.ws.snapshot_ds > 0.0, "snapshot_ds", "must be positive");
  require(c.rs.rtol > 0.0 && c.rs.rtol < 1.0, "radial_rtol", "must lie in (0,1)");
  require(c.rs.atol > 0.0, "radial_atol", "must be positive");
  for (double v : c.d6) require(v >= -2.0 && v <= 2.0, "d6", "entries must lie in [-2,2]");
  require(c.command != "simulate" || c.physical || c.s_end > c.mp.s0, "s_end", "must exceed s0");
  require(c.command != "shoot" || c.s_target > c.mp.s0, "s_target", "must exceed s0");
  require(c.budget >= 1, "budget", "must be at least 1");
  require(c.bisect_steps >= 1, "bisect_steps", "must be at least 1");
  require(c.threads >= 0, "threads", "must be >= 0");
  require(c.command != "spectral" || !c.input.empty(), "input", "spectral needs --input");
  require(c.y_max > 0.0, "y_max", "must be positive");
  require(c.ny >= 2, "ny", "must be at least 2");
  require(!c.out_dir.empty(), "out_dir", "must not be empty");
}

RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") throw HelpRequested(help_text());
  RunConfig c;
  c.command = args[0];
  if (!known_command(c.command)) throw UsageError("command", "unknown command '" + c.command + "'");

  // --config first so that explicit flags override the file.
  for (std::size_t k = 1; k < args.size(); ++k) {
    std::string path;
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[k + 1];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    }
    if (!path.empty()) {
      c = load_config_file(path, c);
      c.command = args[0];
    }
  }

  CLI::App app{"flatblow " + c.command, "flatblow " + c.command};
  std::string config_path, d6_str;
  add_options(app, c, config_path, d6_str, true);
  const std::string d6_before = d6_str;
  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);  // CLI11 consumes from the back
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(help_text(c.command));
  } catch (const CLI::ParseError& e) {
    throw UsageError(key_in(e.what()), e.what());
  }
  if (d6_str != d6_before) c.d6 = parse_d6(d6_str);
  validate(c);
  return c;
}

RunConfig parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return parse_config(args);
}

std::string help_text(const std::string& command) {
  RunConfig c;
  if (!command.empty()) c.command = command;
  CLI::App app{command.empty() ? "flatblow: flat blow-up on a sphere for u_t = Lap u + |u|^{p-1} u"
                               : "flatblow " + command,
               command.empty() ? "flatblow <command>" : "flatblow " + command};
  std::string config_path, d6_str;
  add_options(app, c, config_path, d6_str, !command.empty());
  std::string out = app.help();
  if (command.empty()) {
    out += "\nSubcommands:\n"
           "  simulate       w-equation run from d6 (or --physical: radial PDE to blow-up)\n"
           "  shoot          coordinate-bisection search over d6\n"
           "  verify         expansion audit and decay-rate suite\n"
           "  spectral       Hermite projection of user grid data\n"
           "  profile-table  phi, V and R on a y grid\n"
           "\nExit codes: 0 success, 2 usage, 3 numeric fault, 4 shoot budget exhausted without reaching s_target.\n"
           "FLATBLOW_THREADS caps worker threads; FLATBLOW_SIMD=scalar forces scalar kernels.\n";
  }
  return out;
}

}  // namespace flatblow
