#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heatmoment/errors.hpp"
#include "heatmoment/serialize.hpp"

namespace heatmoment::app {

using heatmoment::to_json;

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDegenerate = 3,
  kPrecisionExhausted = 4,
  kValidationFailure = 5,
};

inline const std::vector<std::string> kCommands = {"basis",    "delta-scan", "biortho",  "synth",
                                                   "verify",   "simulate",   "gradient", "full-pipeline",
                                                   "plot"};

struct RunConfig {
  std::string command;
  // Either a path to a profile JSON or the profile document itself.
  std::optional<std::string> profile_path;
  Json profile;  // null when absent
  Json params = Json::object();
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;
  long precision_bits = 0;  // 0: automatic
  unsigned threads = 1;
};

// Accepts a config document or a manifest written by a previous run.
// Throws ConfigError naming the offending field.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);
Json to_json(const RunConfig& config);

struct RunResult {
  int exit_code = kOk;
  Json report;                     // main report, or {"error": ...}
  std::vector<std::string> artifacts;  // file names inside output_dir
};

// Dispatches, writes artifacts and manifest.json into config.output_dir, and
// never throws for module errors: those become an error JSON and exit code.
RunResult run(const RunConfig& config);

int exit_code_for(ErrorKind kind) noexcept;
Json error_json(const Error& e);

enum class PlotKind { ControlTimeseries, ResidualSpectrum, ThetaProfiles, GradientComparison };

PlotKind parse_plot_kind(const std::string& name);
std::string to_string(PlotKind kind);

struct PlotOptions {
  std::size_t points = 0;  // 0: per-kind default (1001 for controls, 201 for thetas)
};

// Throws ReportKindMismatch when `report` is not the kind of document `kind` reads.
void emit_plot_data(const Json& report, PlotKind kind, const std::filesystem::path& csv_path,
                    const PlotOptions& options = {});

}  // namespace heatmoment::app
