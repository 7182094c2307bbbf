#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "collapse/config.hpp"
#include "collapse/coupling.hpp"
#include "collapse/dynamics.hpp"
#include "collapse/output.hpp"
#include "collapse/runner.hpp"
#include "collapse/spectral.hpp"

using namespace collapse;
using namespace collapse::lab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

// Fresh scratch directory under the build tree.
fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

ExperimentConfig config_for(Command c, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.command = c;
  cfg.output.directory = out.string();
  return cfg;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(COLLAPSE_LAB_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults") {
  const auto cfg = parse_config(json::object());
  CHECK(cfg.command == Command::Simulate);
  CHECK(cfg.grid.dt == 0.01);
  CHECK(cfg.grid.steps == 10000);
  CHECK(cfg.profile.kind == ProfileKind::PaperUniform);
  CHECK(cfg.output.formats == std::vector<std::string>{"csv", "json", "svg"});
  CHECK_FALSE(cfg.fit.short_time.has_value());
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS((void)parse_config(json{{"colour", 1}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"profile", {{"q", 10}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"grid", {{"dt", -1}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"grid", {{"steps", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"command", "plot"}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"profile", {{"kind", "cubic"}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"output", {{"formats", {"png"}}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"fit", {{"short_time", {2, 1}}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json{{"profile", {{"values", {1, 2}}}}}), ConfigError);
  CHECK_THROWS_AS((void)parse_config(json::array()), ConfigError);
}

TEST_CASE("explicit profiles derive Q") {
  const auto cfg = parse_config(json{{"profile", {{"kind", "explicit"}, {"values", {2, 3}}}}});
  CHECK(cfg.profile.Q == 3);
  CHECK_THROWS_AS((void)parse_config(json{{"profile", {{"kind", "explicit"}, {"values", {2, 3}}, {"Q", 5}}}}),
                  ConfigError);
}

TEST_CASE("config round-trips through to_json") {
  ExperimentConfig cfg;
  cfg.command = Command::Sweep;
  cfg.profile.kind = ProfileKind::Geometric;
  cfg.profile.Q = 17;
  cfg.profile.R = 0.1 + 0.2;  // not representable in short decimal
  cfg.grid = TimeGrid{-1.5, 0.003, 777};
  cfg.perturbation = {0.02, 123456789012345ULL};
  cfg.fit.long_time = FitWindow{2.0, 9.5};
  cfg.sweep.Q = {8, 16};
  cfg.threads = 3;
  const json doc = to_json(cfg);
  CHECK(parse_config(doc) == cfg);
  CHECK(parse_config(json::parse(doc.dump())) == cfg);
  CHECK(parse_config(to_json(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("dot-path overrides") {
  json doc = json::object();
  apply_override(doc, "profile.Q=100");
  apply_override(doc, "profile.kind=uniform");
  apply_override(doc, "sweep.R=[1,2]");
  apply_override(doc, "output.directory=\"42\"");
  const auto cfg = parse_config(doc);
  CHECK(cfg.profile.Q == 100);
  CHECK(cfg.profile.kind == ProfileKind::Uniform);
  CHECK(cfg.sweep.R == std::vector<double>{1, 2});
  CHECK(cfg.output.directory == "42");
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "profile..Q=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "profile.Q.x=1"), ConfigError);
}

TEST_CASE("CSV emission") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  emit_csv(Table{{"t", "alpha1"}, {}}, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") == "t,alpha1\n");

  emit_csv(Table{{"x", "n", "s"}, {{0.1, std::int64_t{7}, std::string{}}, {1.0 / 3.0, std::int64_t{-2}, std::string{"a,b"}}}},
           dir / "rows.csv");
  CHECK(slurp(dir / "rows.csv") == "x,n,s\n0.10000000000000001,7,\n0.33333333333333331,-2,\"a,b\"\n");

  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK_THROWS_AS(emit_csv(Table{{"x"}, {{std::nan("")}}}, dir / "nan.csv"), InvalidArgument);
  CHECK_THROWS_AS(emit_csv(Table{{"x", "y"}, {{1.0}}}, dir / "ragged.csv"), InvalidArgument);
  try {
    emit_csv(Table{{"x"}, {}}, dir / "missing" / "out.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
}

TEST_CASE("SVG emission") {
  const fs::path dir = scratch("svg");
  fs::create_directories(dir);
  emit_svg(Series{"one", "t (s)", "y (1)", {1.0}, {2.0}}, dir / "one.svg");
  const std::string one = slurp(dir / "one.svg");
  CHECK(one.find("<svg") != std::string::npos);
  CHECK(one.find("</svg>") != std::string::npos);
  CHECK(one.find("<circle") != std::string::npos);
  CHECK(one.find("<polyline") == std::string::npos);
  CHECK(one.find("t (s)") != std::string::npos);
  CHECK(one.find("href") == std::string::npos);

  emit_svg(Series{"a < b & c", "x", "y", {0, 1, 2}, {0, 1, 0}}, dir / "esc.svg");
  CHECK(slurp(dir / "esc.svg").find("a &lt; b &amp; c") != std::string::npos);

  CHECK_THROWS_AS(emit_svg(Series{"", "", "", {}, {}}, dir / "empty.svg"), InvalidArgument);
  CHECK_THROWS_AS(emit_svg(Series{"", "", "", {1, 2}, {1}}, dir / "bad.svg"), InvalidArgument);
}

TEST_CASE("min/max decimation keeps extremes") {
  Series s{"", "", "", {}, {}};
  for (int i = 0; i < 100000; ++i) {
    s.x.push_back(i);
    s.y.push_back(std::sin(i * 0.01) * (i == 51234 ? 5.0 : 1.0));
  }
  const auto d = decimate_min_max(s);
  CHECK(d.x.size() <= kMaxPlotPoints);
  CHECK(d.x.size() >= kMaxPlotPoints / 2);
  CHECK(*std::max_element(d.y.begin(), d.y.end()) == *std::max_element(s.y.begin(), s.y.end()));
  CHECK(*std::min_element(d.y.begin(), d.y.end()) == *std::min_element(s.y.begin(), s.y.end()));
  CHECK(std::is_sorted(d.x.begin(), d.x.end()));
  const auto small = decimate_min_max(Series{"", "", "", {1, 2, 3}, {3, 2, 1}});
  CHECK(small.x.size() == 3);
}

TEST_CASE("Q = 10^4 trace plot stays small") {
  const auto spectrum =
      eigen_tridiagonal_first_row(parity_split(assemble_matrix(build_profile(ProfileKind::PaperUniform, 10000))).odd);
  const auto trace = evolve_spectral(spectrum, TimeGrid{});
  const fs::path dir = scratch("big");
  fs::create_directories(dir);
  emit_svg(Series{"Q = 10^4", "t", "|alpha_1|", trace.times(), trace.abs_alpha1()}, dir / "trace.svg");
  const std::string svg = slurp(dir / "trace.svg");
  CHECK(svg.size() < 2u * 1024 * 1024);
  const auto start = svg.find("points=\"");
  REQUIRE(start != std::string::npos);
  const auto end = svg.find('"', start + 8);
  const std::string points = svg.substr(start + 8, end - start - 8);
  CHECK(static_cast<std::size_t>(std::count(points.begin(), points.end(), ',')) <= kMaxPlotPoints);
}

TEST_CASE("sha256") {
  const fs::path dir = scratch("sha");
  fs::create_directories(dir);
  write_text(dir / "abc.txt", "abc");
  CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_text(dir / "empty.txt", "");
  CHECK(sha256_file(dir / "empty.txt") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK_THROWS_AS((void)sha256_file(dir / "nope"), IoError);
}

TEST_CASE("simulate run: files, manifest and determinism") {
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  auto cfg = config_for(Command::Simulate, a);
  cfg.profile.Q = 10;
  const auto report = run(cfg);
  CHECK(report.exit_code() == 0);
  for (const char* f : {"trace.csv", "trace.svg", "summary.json", "manifest.json"}) CHECK(fs::exists(a / f));
  CHECK(count_lines(slurp(a / "trace.csv")) == 10002);
  CHECK(slurp(a / "trace.csv").rfind("t,alpha1,abs_alpha1\n", 0) == 0);

  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(parse_config(manifest["config"]) == cfg);
  CHECK(manifest["outputs"].size() == 3);
  for (const auto& entry : manifest["outputs"]) {
    CHECK(entry["sha256"] == sha256_file(a / entry["file"].get<std::string>()));
  }

  // The same config written elsewhere yields byte-identical data files.
  auto cfg_b = cfg;
  cfg_b.output.directory = b.string();
  (void)run(cfg_b);
  for (const char* f : {"trace.csv", "trace.svg", "summary.json"}) CHECK(slurp(a / f) == slurp(b / f));
  (void)run(cfg);
  CHECK(slurp(a / "manifest.json") == manifest.dump(2) + "\n");

  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary["abs_alpha1_max_after_t1"].get<double>() > 0.7);
}

TEST_CASE("perturbed runs are reproducible per seed") {
  const fs::path a = scratch("pert_a");
  const fs::path b = scratch("pert_b");
  auto cfg = config_for(Command::Spectrum, a);
  cfg.profile.Q = 100;
  cfg.perturbation = {0.05, 9};
  (void)run(cfg);
  cfg.output.directory = b.string();
  (void)run(cfg);
  CHECK(slurp(a / "weights.csv") == slurp(b / "weights.csv"));
}

TEST_CASE("spectrum run") {
  const fs::path dir = scratch("spectrum");
  auto cfg = config_for(Command::Spectrum, dir);
  cfg.profile.Q = 100;
  (void)run(cfg);
  const std::string weights = slurp(dir / "weights.csv");
  CHECK(weights.rfind("index,omega_sq,omega,weight_sq", 0) == 0);
  CHECK(count_lines(weights) == 51);
  CHECK(count_lines(slurp(dir / "eigenvalues.csv")) == 51);
  const json doc = json::parse(slurp(dir / "spectrum.json"));
  CHECK(std::fabs(doc["weight_sum"].get<double>() - 1.0) < 1e-10);
}

TEST_CASE("integrals run at t = 0") {
  const fs::path dir = scratch("integrals");
  auto cfg = config_for(Command::Integrals, dir);
  cfg.integrals.t = {0.0};
  cfg.output.formats = {"csv"};
  (void)run(cfg);
  const std::string csv = slurp(dir / "integrals.csv");
  CHECK(count_lines(csv) == 2);
  const std::string row = csv.substr(csv.find('\n') + 1);
  CHECK(row.rfind("0,0.906402", 0) == 0);
  CHECK_FALSE(fs::exists(dir / "integrals.svg"));
}

TEST_CASE("recurrence and sweep runs") {
  const fs::path rec = scratch("recurrence");
  auto cfg = config_for(Command::Recurrence, rec);
  (void)run(cfg);
  CHECK(count_lines(slurp(rec / "revivals.csv")) > 1);

  const fs::path sw = scratch("sweep");
  auto scfg = config_for(Command::Sweep, sw);
  scfg.sweep = SweepConfig{{2, 4}, {2}, {0.0, 1.0}, {16}};
  const auto report = run(scfg);
  CHECK(report.failed_cells == 2);
  CHECK(report.exit_code() == kExitNumerical);
  const std::string csv = slurp(sw / "sweep.csv");
  CHECK(csv.rfind("R,N,a,Q,fitted_st_rate,predicted_st_rate,fitted_lt_rate,predicted_lt_rate,residuals", 0) == 0);
  CHECK(count_lines(csv) == 5);
}

TEST_CASE("failed runs leave no partial output") {
  const fs::path dir = scratch("failed");
  auto cfg = config_for(Command::Simulate, dir);
  cfg.fit.short_time = FitWindow{500.0, 600.0};  // outside the grid, fails after the trace is written
  CHECK_THROWS_AS((void)run(cfg), InvalidArgument);
  CHECK_FALSE(fs::exists(dir));

  // A pre-existing directory survives, minus this run's files.
  fs::create_directories(dir);
  write_text(dir / "keep.txt", "x");
  CHECK_THROWS((void)run(cfg));
  CHECK(fs::exists(dir / "keep.txt"));
  CHECK_FALSE(fs::exists(dir / "trace.csv"));
}

TEST_CASE("exit codes and error documents") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(InvalidArgument("x")) == 2);
  CHECK(exit_code_for(NumericalError("x")) == 3);
  CHECK(exit_code_for(FitError("x")) == 3);
  CHECK(exit_code_for(IoError("x")) == 4);
  const json doc = error_document(IoError("disk full"));
  CHECK(doc["error"]["kind"] == "io");
  CHECK(doc["error"]["message"] == "disk full");
}

TEST_CASE("command-line tool") {
  const fs::path dir = scratch("tool");
  fs::create_directories(dir);
  write_text(dir / "cfg.json", R"({"profile": {"Q": 6}, "grid": {"steps": 500}})");
  write_text(dir / "bad.json", R"({"profile": {"Q": 6, "extra": true}})");
  write_text(dir / "broken.json", "{");
  const std::string cfg = (dir / "cfg.json").string();

  CHECK(run_tool("simulate --config " + cfg + " --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "manifest.json"));
  const json manifest = json::parse(slurp(dir / "ok" / "manifest.json"));
  CHECK(manifest["config"]["profile"]["Q"] == 6);

  CHECK(run_tool("spectrum --config " + cfg + " --set profile.Q=20 --set output.formats=[\\\"csv\\\"] --out " +
                 (dir / "spectrum_run").string()) == 0);
  CHECK(fs::exists(dir / "spectrum_run" / "weights.csv"));
  CHECK_FALSE(fs::exists(dir / "spectrum_run" / "weights.svg"));

  CHECK(run_tool("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "bad").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "bad"));
  CHECK(run_tool("simulate --config " + (dir / "broken.json").string()) == 2);
  CHECK(run_tool("simulate --config " + (dir / "absent.json").string()) == 2);
  CHECK(run_tool("fly --config " + cfg) == 2);
  CHECK(run_tool("simulate") == 2);
  CHECK(run_tool("simulate --config " + cfg + " --set profile.Q=0") == 2);
  CHECK(run_tool("simulate --config " + cfg + " --out /proc/collapse-lab-test") == 4);
}
