#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collapse/asymptotics.hpp"
#include "collapse/coupling.hpp"
#include "collapse/dynamics.hpp"
#include "collapse/error.hpp"
#include "collapse/sweep.hpp"

namespace collapse::lab {

/// Malformed or inconsistent configuration document (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Command { Simulate, Spectrum, Sweep, Integrals, Recurrence };

[[nodiscard]] std::string_view to_string(Command command);
[[nodiscard]] Command command_from_string(std::string_view name);

struct ProfileConfig {
  ProfileKind kind = ProfileKind::PaperUniform;
  std::size_t Q = 10;
  double a = 1.0;
  double R = 1.0;
  double N = 1.0;
  std::vector<double> values;  // only for kind = explicit

  friend bool operator==(const ProfileConfig&, const ProfileConfig&) = default;
};

struct PerturbationConfig {
  double magnitude = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const PerturbationConfig&, const PerturbationConfig&) = default;
};

struct OutputConfig {
  std::string directory = "collapse-out";
  std::vector<std::string> formats{"csv", "json", "svg"};

  [[nodiscard]] bool wants(std::string_view format) const;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct FitConfig {
  std::optional<FitWindow> short_time;
  std::optional<FitWindow> long_time;

  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct SweepConfig {
  std::vector<double> R{2, 4, 8, 16};
  std::vector<double> N{2, 4};
  std::vector<double> a{0.5, 1};
  std::vector<std::size_t> Q{64};

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct IntegralsConfig {
  std::vector<double> t{0, 0.5, 1, 2, 4, 6, 8, 10};
  double B = 1.0;
  double A = 0.01;

  friend bool operator==(const IntegralsConfig&, const IntegralsConfig&) = default;
};

struct RecurrenceConfig {
  double threshold = 0.7;
  double t_min = 1.0;

  friend bool operator==(const RecurrenceConfig&, const RecurrenceConfig&) = default;
};

/// One experiment, parsed from a single JSON document. Every section is
/// optional and defaults as above; the grid defaults to 10000 steps of 0.01.
struct ExperimentConfig {
  Command command = Command::Simulate;
  ProfileConfig profile;
  TimeGrid grid;
  PerturbationConfig perturbation;
  OutputConfig output;
  FitConfig fit;
  SweepConfig sweep;
  IntegralsConfig integrals;
  RecurrenceConfig recurrence;
  unsigned threads = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict parse: unknown keys, wrong types and invalid values throw ConfigError.
[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& document);
/// Fully populated document (defaults included) that parse_config accepts.
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

/// Applies "a.b.c=value" overrides to a raw document before parsing. The
/// value is read as JSON when it parses as such, otherwise as a string.
void apply_override(nlohmann::json& document, std::string_view assignment);

[[nodiscard]] nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace collapse::lab
