#include "collapse/runner.hpp"

#include <openssl/crypto.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <system_error>

#include "collapse/asymptotics.hpp"
#include "collapse/coupling.hpp"
#include "collapse/dynamics.hpp"
#include "collapse/output.hpp"
#include "collapse/spectral.hpp"
#include "collapse/sweep.hpp"

namespace collapse::lab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Owns the output directory for one run and remembers what it wrote, so a
// failed run can be rolled back.
class OutputSet {
 public:
  explicit OutputSet(fs::path directory) : directory_(std::move(directory)) {
    std::error_code ec;
    if (fs::exists(directory_, ec)) {
      if (!fs::is_directory(directory_, ec)) {
        throw IoError("output path '" + directory_.string() + "' exists and is not a directory");
      }
    } else {
      fs::create_directories(directory_, ec);
      if (ec) throw IoError("cannot create '" + directory_.string() + "': " + ec.message());
      created_ = true;
    }
  }

  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  fs::path claim(const std::string& name) {
    files_.push_back(name);
    return directory_ / name;
  }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& name : files_) fs::remove(directory_ / name, ec);
    if (created_) fs::remove(directory_, ec);
  }

  [[nodiscard]] const fs::path& directory() const { return directory_; }
  [[nodiscard]] const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path directory_;
  std::vector<std::string> files_;
  bool created_ = false;
};

struct Model {
  CouplingProfile profile;
  SkipTridiagonalMatrix matrix;
  Spectrum spectrum;
};

CascadeParams params_of(const ProfileConfig& p) { return CascadeParams{p.R, p.N, p.a}; }

Model build_model(const ExperimentConfig& cfg) {
  CouplingProfile profile = cfg.profile.kind == ProfileKind::Explicit
                                ? explicit_profile(cfg.profile.values)
                                : build_profile(cfg.profile.kind, cfg.profile.Q, params_of(cfg.profile));
  SkipTridiagonalMatrix matrix = assemble_matrix(profile);
  EigenOptions eig;
  if (cfg.perturbation.magnitude > 0.0) {
    matrix = perturb_matrix(matrix, cfg.perturbation.magnitude, cfg.perturbation.seed);
    // Scaling entries independently can break positive semi-definiteness.
    eig.negative_policy = NegativePolicy::Clamp;
  }
  Spectrum spectrum = eigen_tridiagonal_first_row(parity_split(matrix).odd, eig);
  return Model{std::move(profile), std::move(matrix), std::move(spectrum)};
}

EvolutionTrace simulate_trace(const ExperimentConfig& cfg, const Spectrum& spectrum) {
  SynthesisOptions opts;
  opts.threads = cfg.threads;
  return evolve_spectral(spectrum, cfg.grid, opts);
}

json model_json(const Model& m) {
  const Interval g = gershgorin_interval(m.matrix);
  return json{{"Q", m.profile.dimension()},
              {"odd_block_size", m.spectrum.size()},
              {"weight_sum", m.spectrum.weight_sum()},
              {"clamped_eigenvalues", m.spectrum.clamped},
              {"gershgorin", {{"lower", g.lower}, {"upper", g.upper}}}};
}

json fit_json(const EnvelopeFit& f) {
  return json{{"model", to_string(f.model)}, {"rate", f.rate},
              {"amplitude", f.amplitude},    {"window", {f.window.lo, f.window.hi}},
              {"rms_residual", f.rms_residual}, {"points", f.points},
              {"decaying", f.decaying}};
}

void write_json(OutputSet& out, const std::string& name, const json& doc) {
  write_text(out.claim(name), doc.dump(2) + "\n");
}

void write_trace(OutputSet& out, const ExperimentConfig& cfg, const EvolutionTrace& trace, const std::string& title) {
  const std::vector<double> t = trace.times();
  const std::vector<double> mag = trace.abs_alpha1();
  if (cfg.output.wants("csv")) {
    Table table{{"t", "alpha1", "abs_alpha1"}, {}};
    table.rows.reserve(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) table.rows.push_back({t[k], trace.alpha1[k], mag[k]});
    emit_csv(table, out.claim("trace.csv"));
  }
  if (cfg.output.wants("svg")) {
    emit_svg(Series{title, "t (natural units)", "|alpha_1| (dimensionless)", t, mag}, out.claim("trace.svg"));
  }
}

std::size_t run_simulate(OutputSet& out, const ExperimentConfig& cfg) {
  const Model model = build_model(cfg);
  const EvolutionTrace trace = simulate_trace(cfg, model.spectrum);
  write_trace(out, cfg, trace, "|alpha_1(t)|, Q = " + std::to_string(model.profile.dimension()));
  if (!cfg.output.wants("json")) return 0;

  json summary = model_json(model);
  const auto& a = trace.alpha1;
  summary["alpha1_final"] = a.back();
  summary["abs_alpha1_max_after_t1"] = nullptr;
  double late_max = -1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (trace.grid.time(k) > 1.0) late_max = std::max(late_max, std::fabs(a[k]));
  }
  if (late_max >= 0.0) summary["abs_alpha1_max_after_t1"] = late_max;
  double norm_dev = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double t = cfg.grid.t0 + cfg.grid.span() * i / 10.0;
    norm_dev = std::max(norm_dev, std::fabs(complex_norm_diagnostic(model.spectrum, t) - 1.0));
  }
  summary["norm_diagnostic_max_deviation"] = norm_dev;
  if (cfg.fit.short_time) summary["short_time_fit"] = fit_json(fit_envelope(trace, EnvelopeModel::GaussianST, *cfg.fit.short_time));
  if (cfg.fit.long_time) summary["long_time_fit"] = fit_json(fit_envelope(trace, EnvelopeModel::ExponentialLT, *cfg.fit.long_time));
  if (const auto zero = first_zero_crossing(trace, cfg.grid.t0)) summary["first_zero_crossing"] = *zero;
  write_json(out, "summary.json", summary);
  return 0;
}

std::size_t run_spectrum(OutputSet& out, const ExperimentConfig& cfg) {
  const Model model = build_model(cfg);
  const Spectrum& s = model.spectrum;
  const std::vector<double> omega = s.frequencies();
  const bool has_params = cfg.profile.kind == ProfileKind::Uniform || cfg.profile.kind == ProfileKind::Geometric;
  const CascadeParams params = params_of(cfg.profile);

  if (cfg.output.wants("csv")) {
    Table eig{{"index", "omega_sq", "omega", "weight_sq"}, {}};
    Table wts{{"index", "omega_sq", "omega", "weight_sq", "weight_large_approx", "weight_small_approx"}, {}};
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto idx = static_cast<std::int64_t>(i + 1);
      eig.rows.push_back({idx, s.omega_sq[i], omega[i], s.weights_sq[i]});
      std::vector<Cell> row{idx, s.omega_sq[i], omega[i], s.weights_sq[i], std::string{}, std::string{}};
      if (has_params) {
        row[4] = weight_large_approx(s.omega_sq[i], params);
        row[5] = weight_small_approx(s.omega_sq[i], params);
      }
      wts.rows.push_back(std::move(row));
    }
    emit_csv(eig, out.claim("eigenvalues.csv"));
    emit_csv(wts, out.claim("weights.csv"));
  }
  if (cfg.output.wants("svg")) {
    std::vector<double> index(s.size());
    std::iota(index.begin(), index.end(), 1.0);
    const std::string q = std::to_string(model.profile.dimension());
    emit_svg(Series{"Squared weights, Q = " + q, "Omega (natural units)", "w^2 (dimensionless)", omega, s.weights_sq},
             out.claim("weights.svg"));
    emit_svg(Series{"Eigenvalues, Q = " + q, "index i (dimensionless)", "Omega_i^2 (natural units)", index, s.omega_sq},
             out.claim("eigenvalues.svg"));
  }
  if (cfg.output.wants("json")) {
    json doc = model_json(model);
    const SpacingStats sp = spacing_stats(s);
    doc["spacing"] = {{"min_gap", sp.min_gap},
                      {"mean_gap", sp.mean_gap},
                      {"nondegenerate", sp.nondegenerate},
                      {"histogram", {{"edges", sp.histogram.edges}, {"counts", sp.histogram.counts}}}};
    if (s.size() >= 2) {
      const DensityEstimate d = density_of_eigenvalues(s, has_params ? std::optional(params) : std::nullopt);
      doc["density"] = {{"density_of_states_slope", d.uniform_fit},
                        {"bulk_variation", d.bulk_variation},
                        {"normalization_constant", d.normalization ? json(*d.normalization) : json(nullptr)}};
    }
    write_json(out, "spectrum.json", doc);
  }
  return 0;
}

std::size_t run_sweep(OutputSet& out, const ExperimentConfig& cfg) {
  SweepGrid grid{cfg.sweep.R, cfg.sweep.N, cfg.sweep.a, cfg.sweep.Q, ProfileKind::Uniform};
  SweepOptions opts;
  opts.grid = cfg.grid;
  opts.windows = SweepFitWindows{cfg.fit.short_time, cfg.fit.long_time};
  opts.threads = cfg.threads;
  const SweepResult result = scaling_sweep(grid, opts);

  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.error ? 1 : 0;

  auto opt_cell = [](const std::optional<EnvelopeFit>& f, auto field) -> Cell {
    if (!f) return std::string{};
    return field(*f);
  };
  if (cfg.output.wants("csv")) {
    Table table{{"R", "N", "a", "Q", "fitted_st_rate", "predicted_st_rate", "fitted_lt_rate", "predicted_lt_rate",
                 "residuals", "st_rms_residual", "lt_rms_residual", "error"},
                {}};
    for (const auto& row : result.rows) {
      Cell rel = std::string{};
      if (row.lt_fit) rel = (row.lt_fit->rate - row.predicted_lt_rate) / row.predicted_lt_rate;
      table.rows.push_back({row.params.R, row.params.N, row.params.a, static_cast<std::int64_t>(row.Q),
                            opt_cell(row.st_fit, [](const EnvelopeFit& f) { return f.rate; }), row.predicted_st_rate,
                            opt_cell(row.lt_fit, [](const EnvelopeFit& f) { return f.rate; }), row.predicted_lt_rate,
                            rel, opt_cell(row.st_fit, [](const EnvelopeFit& f) { return f.rms_residual; }),
                            opt_cell(row.lt_fit, [](const EnvelopeFit& f) { return f.rms_residual; }),
                            row.error.value_or(std::string{})});
    }
    emit_csv(table, out.claim("sweep.csv"));
  }
  if (cfg.output.wants("svg")) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : result.rows) {
      if (row.st_fit) pts.emplace_back(row.params.growth() * row.params.a * row.params.a, row.st_fit->rate);
    }
    std::sort(pts.begin(), pts.end());
    if (!pts.empty()) {
      Series series{"Fitted short-time rate", "R sqrt(N) a^2 (dimensionless)", "k fitted (1/time^2)", {}, {}};
      for (const auto& [x, y] : pts) {
        series.x.push_back(x);
        series.y.push_back(y);
      }
      emit_svg(series, out.claim("sweep.svg"));
    }
  }
  if (cfg.output.wants("json")) {
    auto reg = [](const std::optional<RegressionSummary>& r) -> json {
      if (!r) return nullptr;
      return {{"slope", r->slope}, {"intercept", r->intercept}, {"r_squared", r->r_squared}, {"points", r->points}};
    };
    json rows = json::array();
    for (const auto& row : result.rows) {
      json j{{"R", row.params.R},
             {"N", row.params.N},
             {"a", row.params.a},
             {"Q", row.Q},
             {"predicted_st_rate", row.predicted_st_rate},
             {"predicted_lt_rate", row.predicted_lt_rate},
             {"predicted_lt_rate_coarse", row.predicted_lt_rate_coarse},
             {"st_fit", row.st_fit ? fit_json(*row.st_fit) : json(nullptr)},
             {"lt_fit", row.lt_fit ? fit_json(*row.lt_fit) : json(nullptr)},
             {"error", row.error ? json(*row.error) : json(nullptr)}};
      rows.push_back(std::move(j));
    }
    write_json(out, "sweep.json",
               {{"cells", rows},
                {"failed_cells", failed},
                {"st_regression", reg(result.st_regression)},
                {"lt_regression", reg(result.lt_regression)}});
  }
  return failed;
}

std::size_t run_integrals(OutputSet& out, const ExperimentConfig& cfg) {
  const double B = cfg.integrals.B;
  const double A = cfg.integrals.A;
  const double scale = std::pow(B, -0.25);  // I(t, B) = B^{-1/4} I(t B^{-1/4}, 1)

  Table table{{"t", "quartic_quadrature", "quartic_small_t", "quartic_large_t", "lorentzian_quadrature",
               "lorentzian_closed"},
              {}};
  json rows = json::array();
  std::vector<double> ts = cfg.integrals.t;
  std::vector<double> quartic;
  for (double t : ts) {
    const double q = quartic_cos_integral(t, B);
    const double small = scale * quartic_cos_small_t(t * scale);
    Cell large_cell = std::string{};
    json large_json = nullptr;
    if (t > 0.0) {
      const double large = scale * quartic_cos_large_t(t * scale);
      large_cell = large;
      large_json = large;
    }
    const double lq = lorentzian_sq_cos_integral(t, A);
    const double lc = lorentzian_sq_cos_closed(t, A);
    table.rows.push_back({t, q, small, large_cell, lq, lc});
    rows.push_back({{"t", t},
                    {"quartic_quadrature", q},
                    {"quartic_small_t", small},
                    {"quartic_large_t", large_json},
                    {"lorentzian_quadrature", lq},
                    {"lorentzian_closed", lc}});
    quartic.push_back(q);
  }
  if (cfg.output.wants("csv")) emit_csv(table, out.claim("integrals.csv"));
  if (cfg.output.wants("svg") && !ts.empty()) {
    std::vector<std::size_t> order(ts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return ts[i] < ts[j]; });
    Series s{"Quartic Gaussian cosine transform", "t (natural units)", "I(t) (dimensionless)", {}, {}};
    for (std::size_t i : order) {
      s.x.push_back(ts[i]);
      s.y.push_back(quartic[i]);
    }
    emit_svg(s, out.claim("integrals.svg"));
  }
  if (cfg.output.wants("json")) write_json(out, "integrals.json", {{"B", B}, {"A", A}, {"rows", rows}});
  return 0;
}

std::size_t run_recurrence(OutputSet& out, const ExperimentConfig& cfg) {
  const Model model = build_model(cfg);
  const EvolutionTrace trace = simulate_trace(cfg, model.spectrum);
  const auto events = recurrence_scan(trace, cfg.recurrence.threshold, cfg.recurrence.t_min);
  write_trace(out, cfg, trace, "|alpha_1(t)|, Q = " + std::to_string(model.profile.dimension()));
  if (cfg.output.wants("csv")) {
    Table table{{"t", "abs_alpha1"}, {}};
    for (const auto& e : events) table.rows.push_back({e.time, e.magnitude});
    emit_csv(table, out.claim("revivals.csv"));
  }
  if (cfg.output.wants("json")) {
    json doc = model_json(model);
    doc["threshold"] = cfg.recurrence.threshold;
    doc["t_min"] = cfg.recurrence.t_min;
    doc["revivals"] = events.size();
    double peak = 0.0;
    for (const auto& e : events) peak = std::max(peak, e.magnitude);
    doc["max_revival"] = events.empty() ? json(nullptr) : json(peak);
    write_json(out, "recurrence.json", doc);
  }
  return 0;
}

}  // namespace

json version_info() {
  return json{{"collapse-lab", COLLAPSE_VERSION},
              {"compiler", __VERSION__},
              {"cplusplus", __cplusplus},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"openssl", OpenSSL_version(OPENSSL_VERSION)}};
}

RunReport run(const ExperimentConfig& cfg) {
  OutputSet out(cfg.output.directory);
  try {
    std::size_t failed = 0;
    switch (cfg.command) {
      case Command::Simulate: failed = run_simulate(out, cfg); break;
      case Command::Spectrum: failed = run_spectrum(out, cfg); break;
      case Command::Sweep: failed = run_sweep(out, cfg); break;
      case Command::Integrals: failed = run_integrals(out, cfg); break;
      case Command::Recurrence: failed = run_recurrence(out, cfg); break;
    }
    json outputs = json::array();
    for (const auto& name : out.files()) {
      outputs.push_back({{"file", name},
                         {"sha256", sha256_file(out.directory() / name)},
                         {"bytes", fs::file_size(out.directory() / name)}});
    }
    json manifest{{"command", to_string(cfg.command)},
                  {"config", to_json(cfg)},
                  {"versions", version_info()},
                  {"outputs", outputs},
                  {"failed_cells", failed}};
    write_json(out, "manifest.json", manifest);
    return RunReport{out.directory(), out.files(), failed};
  } catch (...) {
    out.rollback();
    throw;
  }
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const InvalidArgument*>(&error)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&error) || dynamic_cast<const fs::filesystem_error*>(&error)) return kExitIo;
  return kExitNumerical;
}

json error_document(const std::exception& error) {
  std::string kind = "numerical";
  switch (exit_code_for(error)) {
    case kExitConfig: kind = "config"; break;
    case kExitIo: kind = "io"; break;
    default: break;
  }
  return json{{"error", {{"kind", kind}, {"exit_code", exit_code_for(error)}, {"message", error.what()}}}};
}

}  // namespace collapse::lab
