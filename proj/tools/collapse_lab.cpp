// collapse-lab <command> --config <path> [--set key=value ...] [--out <dir>]

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "collapse/config.hpp"
#include "collapse/runner.hpp"

namespace lab = collapse::lab;

int main(int argc, char** argv) {
  CLI::App app{"Collapse experiments on coupled oscillator cascades"};
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  app.add_option("command", command, "simulate | spectrum | sweep | integrals | recurrence")->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--set", overrides, "Override a config field, e.g. --set profile.Q=100")->take_all();
  app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
  app.set_version_flag("--version", std::string(lab::version_info()["collapse-lab"]));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lab::kExitConfig;
  }

  try {
    nlohmann::json document = lab::load_json_file(config_path);
    for (const auto& assignment : overrides) lab::apply_override(document, assignment);
    // The positional command wins over the one in the file.
    lab::apply_override(document, "command=\"" + std::string(lab::to_string(lab::command_from_string(command))) + "\"");
    if (!out_dir.empty()) lab::apply_override(document, "output.directory=" + nlohmann::json(out_dir).dump());

    const lab::ExperimentConfig config = lab::parse_config(document);
    const lab::RunReport report = lab::run(config);
    nlohmann::json summary{{"directory", report.directory.string()},
                           {"files", report.files},
                           {"failed_cells", report.failed_cells}};
    std::cout << summary.dump() << '\n';
    if (report.exit_code() != lab::kExitSuccess) {
      std::cerr << nlohmann::json{{"error",
                                   {{"kind", "numerical"},
                                    {"exit_code", report.exit_code()},
                                    {"message", std::to_string(report.failed_cells) + " sweep cell(s) failed"}}}}
                       .dump()
                << '\n';
    }
    return report.exit_code();
  } catch (const std::exception& e) {
    std::cerr << lab::error_document(e).dump() << '\n';
    return lab::exit_code_for(e);
  }
}
