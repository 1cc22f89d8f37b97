#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "app.hpp"
#include "heatmoment/errors.hpp"

using heatmoment::Json;
namespace app = heatmoment::app;

namespace {

struct Flag {
  const char* name;
  const char* help;
};

const std::map<std::string, std::vector<Flag>> kFlags = {
    {"basis",
     {{"N", "number of modes"}, {"points", "grid points on [0,1]"}, {"s", "Sobolev index"},
      {"C", "lower-bound constant"}, {"alpha", "lower-bound exponent"}, {"beta", "HS integral exponent"},
      {"T", "HS integral horizon"}}},
    {"delta-scan",
     {{"p", "delta position in (0,1)"}, {"alpha", "exponent in the lower bound"}, {"N", "modes to scan"},
      {"s", "Sobolev index"}}},
    {"biortho", {{"N", "number of exponentials"}, {"T", "horizon (number or inf)"}, {"K", "factors in the d_inf product"}}},
    {"synth",
     {{"T", "horizon"}, {"N", "controlled modes"}, {"z0", "initial state (list or preset, e.g. e1+e2+e3)"},
      {"N-check", "modes checked for residuals"}, {"points", "time-series grid points"},
      {"alpha", "gaussian-decay exponent when no profile is given"}, {"C", "gaussian-decay constant"},
      {"s", "Sobolev index"}}},
    {"verify",
     {{"control", "control JSON from synth"}, {"z0", "initial state"}, {"T", "horizon"},
      {"N-check", "modes checked"}, {"tol", "fail (exit 5) above this controlled residual"},
      {"alpha", "gaussian-decay exponent when no profile is given"}}},
    {"simulate",
     {{"x", "initial state"}, {"T", "horizon"}, {"N", "modes"}, {"samples", "Monte Carlo samples"},
      {"method", "exact or euler"}, {"steps", "Euler steps"}, {"phi", "observable selector (repeatable)"},
      {"dump-samples", "write at most this many raw samples to samples.csv"},
      {"alpha", "gaussian-decay exponent when no profile is given"}, {"block-size", "samples per RNG block"}}},
    {"gradient",
     {{"x", "base point"}, {"y", "direction"}, {"phi", "observable selector"}, {"T", "horizon"}, {"N", "modes"},
      {"samples", "Monte Carlo samples"}, {"fd-eps", "also run the finite-difference oracle"},
      {"alpha", "gaussian-decay exponent when no profile is given"}, {"block-size", "samples per RNG block"}}},
    {"full-pipeline",
     {{"T", "horizon"}, {"N", "controlled modes"}, {"z0", "initial state"}, {"N-check", "modes checked"},
      {"alpha", "gaussian-decay exponent"}, {"C", "gaussian-decay constant"}, {"s", "Sobolev index"},
      {"samples", "Monte Carlo samples"}, {"fd-eps", "finite-difference step"}, {"x", "gradient base point"},
      {"y", "gradient direction"}, {"trials", "random directions in the norm sweep"},
      {"K", "factors in the d_inf product"}, {"block-size", "samples per RNG block"}}},
    {"plot",
     {{"report", "report JSON"}, {"kind", "control_timeseries|residual_spectrum|theta_profiles|gradient_comparison"},
      {"points", "grid points"}, {"output", "CSV file name inside --output-dir"}}},
};

std::string key_of(std::string flag) {
  for (char& c : flag) {
    if (c == '-') c = '_';
  }
  return flag;
}

// Finite numbers become JSON numbers; everything else stays text.
Json scalar(const std::string& text) {
  char* end = nullptr;
  const double d = std::strtod(text.c_str(), &end);
  if (end != text.c_str() && *end == '\0' && std::isfinite(d)) return d;
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Moment-method null controls and gradient bounds for the stochastic heat equation"};
  cli.set_version_flag("--version", HEATMOMENT_VERSION);
  cli.require_subcommand(0, 1);
  cli.fallthrough();

  std::string config_path, profile_path, output_dir;
  std::uint64_t seed = 0;
  long precision_bits = 0;
  unsigned threads = 1;
  auto* o_config = cli.add_option("--config", config_path, "config or manifest JSON to run");
  auto* o_profile = cli.add_option("--profile", profile_path, "noise profile JSON");
  auto* o_out = cli.add_option("--output-dir", output_dir, "directory for artifacts");
  auto* o_seed = cli.add_option("--seed", seed, "RNG seed");
  auto* o_bits = cli.add_option("--precision-bits", precision_bits, "initial MPFR precision (0: automatic)");
  auto* o_threads = cli.add_option("--threads", threads, "worker threads (0: all cores)");

  std::map<std::string, std::map<std::string, std::vector<std::string>>> values;
  for (const auto& [command, flags] : kFlags) {
    CLI::App* sub = cli.add_subcommand(command);
    for (const Flag& f : flags) {
      sub->add_option(std::string("--") + f.name, values[command][f.name], f.help)->take_all();
    }
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kConfigError;
  }

  app::RunConfig config;
  try {
    if (!config_path.empty()) config = app::load_config(config_path);
    if (!cli.get_subcommands().empty()) {
      const std::string command = cli.get_subcommands().front()->get_name();
      if (!config_path.empty() && command != config.command) {
        throw heatmoment::Error(heatmoment::ErrorKind::ConfigError,
                                "subcommand '" + command + "' does not match config command '" + config.command + "'")
            .with_field("command");
      }
      config.command = command;
      for (const auto& [flag, given] : values[command]) {
        if (given.empty()) continue;
        if (given.size() == 1) {
          config.params[key_of(flag)] = scalar(given.front());
        } else {
          config.params[key_of(flag)] = given;
        }
      }
    } else if (config_path.empty()) {
      throw heatmoment::Error(heatmoment::ErrorKind::ConfigError, "no subcommand and no --config given")
          .with_field("command");
    }
  } catch (const heatmoment::Error& e) {
    std::cerr << app::error_json(e).dump(2) << '\n';
    return app::exit_code_for(e.kind());
  }

  if (o_profile->count()) {
    config.profile_path = profile_path;
    config.profile = Json();
  }
  if (o_out->count()) config.output_dir = output_dir;
  if (o_seed->count()) config.seed = seed;
  if (o_bits->count()) config.precision_bits = precision_bits;
  if (o_threads->count()) config.threads = threads;
  (void)o_config;

  const app::RunResult result = app::run(config);
  if (result.exit_code == app::kOk || !result.report.contains("error")) {
    std::cout << result.report.dump(2) << '\n';
  } else {
    std::cerr << result.report.dump(2) << '\n';
  }
  return result.exit_code;
}
