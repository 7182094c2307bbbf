#pragma once

#include <cstddef>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "collapse/config.hpp"

namespace collapse::lab {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct RunReport {
  std::filesystem::path directory;
  /// Emitted files relative to directory, in write order; manifest.json last.
  std::vector<std::string> files;
  /// Sweep cells that recorded an error (their rows are still written).
  std::size_t failed_cells = 0;

  [[nodiscard]] int exit_code() const { return failed_cells == 0 ? kExitSuccess : kExitNumerical; }
};

/// Executes one experiment and writes its artifacts plus manifest.json into
/// config.output.directory (created if missing). On any exception the files
/// written so far are removed, as is the directory if this run created it,
/// and the exception propagates.
RunReport run(const ExperimentConfig& config);

/// Exit code for an exception escaping run() or config parsing.
[[nodiscard]] int exit_code_for(const std::exception& error);

/// {"error": {"kind": ..., "message": ...}} for stderr.
[[nodiscard]] nlohmann::json error_document(const std::exception& error);

/// Tool and library versions recorded in every manifest (no timestamps).
[[nodiscard]] nlohmann::json version_info();

}  // namespace collapse::lab
