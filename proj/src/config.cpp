#include "collapse/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace collapse::lab {

using nlohmann::json;

namespace {

// Reads one object section, rejecting keys it was not asked about.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + " must be an object");
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  /// Rejects keys that no accessor asked for.
  void done() const {
    for (const auto& item : node_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError("unknown key '" + qualified(item.key()) + "'");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(qualified(key) + " must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(qualified(key) + " must be finite");
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
        throw ConfigError(qualified(key) + " must be a non-negative integer");
      }
      out = v->get<Int>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(qualified(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(qualified(key) + " must be an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(qualified(key) + " must be an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  void sizes(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(qualified(key) + " must be an array of integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_unsigned()) throw ConfigError(qualified(key) + " must be an array of positive integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }

  void window(const std::string& key, std::optional<FitWindow>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(qualified(key) + " must be null or [lo, hi]");
      }
      FitWindow w{(*v)[0].get<double>(), (*v)[1].get<double>()};
      if (!(w.hi > w.lo)) throw ConfigError(qualified(key) + " needs hi > lo");
      out = w;
    }
  }

  [[nodiscard]] std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

json window_json(const std::optional<FitWindow>& w) {
  if (!w) return nullptr;
  return json::array({w->lo, w->hi});
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Spectrum: return "spectrum";
    case Command::Sweep: return "sweep";
    case Command::Integrals: return "integrals";
    case Command::Recurrence: return "recurrence";
  }
  return "unknown";
}

Command command_from_string(std::string_view name) {
  for (auto c : {Command::Simulate, Command::Spectrum, Command::Sweep, Command::Integrals, Command::Recurrence}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

bool OutputConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ExperimentConfig parse_config(const json& document) {
  ExperimentConfig cfg;
  Section root(document, "");

  std::string command = std::string(to_string(cfg.command));
  root.text("command", command);
  cfg.command = command_from_string(command);
  root.integer("threads", cfg.threads);
  if (cfg.threads == 0) throw ConfigError("threads must be at least 1");

  if (const json* node = root.find("profile")) {
    Section s(*node, "profile");
    std::string kind = std::string(to_string(cfg.profile.kind));
    s.text("kind", kind);
    try {
      cfg.profile.kind = profile_kind_from_string(kind);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("profile.kind: ") + e.what());
    }
    const bool has_q = node->contains("Q");
    s.integer("Q", cfg.profile.Q);
    s.number("a", cfg.profile.a);
    s.number("R", cfg.profile.R);
    s.number("N", cfg.profile.N);
    s.numbers("values", cfg.profile.values);
    if (cfg.profile.kind == ProfileKind::Explicit) {
      if (has_q && cfg.profile.Q != cfg.profile.values.size() + 1) {
        throw ConfigError("profile.Q must equal len(profile.values) + 1 for explicit profiles");
      }
      cfg.profile.Q = cfg.profile.values.size() + 1;
    } else if (!cfg.profile.values.empty()) {
      throw ConfigError("profile.values is only allowed for explicit profiles");
    }
    s.done();
  }
  if (cfg.profile.Q == 0) throw ConfigError("profile.Q must be at least 1");

  if (const json* node = root.find("grid")) {
    Section s(*node, "grid");
    s.number("t0", cfg.grid.t0);
    s.number("dt", cfg.grid.dt);
    s.integer("steps", cfg.grid.steps);
    s.done();
  }
  try {
    cfg.grid.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  if (const json* node = root.find("perturbation")) {
    Section s(*node, "perturbation");
    s.number("magnitude", cfg.perturbation.magnitude);
    s.integer("seed", cfg.perturbation.seed);
    s.done();
  }
  if (cfg.perturbation.magnitude < 0.0) throw ConfigError("perturbation.magnitude must be non-negative");

  if (const json* node = root.find("output")) {
    Section s(*node, "output");
    s.text("directory", cfg.output.directory);
    if (const json* f = s.find("formats")) {
      if (!f->is_array()) throw ConfigError("output.formats must be an array");
      cfg.output.formats.clear();
      for (const auto& e : *f) {
        if (!e.is_string()) throw ConfigError("output.formats entries must be strings");
        const auto name = e.get<std::string>();
        if (name != "csv" && name != "json" && name != "svg") {
          throw ConfigError("output.formats: unsupported format '" + name + "'");
        }
        if (!cfg.output.wants(name)) cfg.output.formats.push_back(name);
      }
    }
    s.done();
  }
  if (cfg.output.directory.empty()) throw ConfigError("output.directory must not be empty");

  if (const json* node = root.find("fit")) {
    Section s(*node, "fit");
    s.window("short_time", cfg.fit.short_time);
    s.window("long_time", cfg.fit.long_time);
    s.done();
  }

  if (const json* node = root.find("sweep")) {
    Section s(*node, "sweep");
    s.numbers("R", cfg.sweep.R);
    s.numbers("N", cfg.sweep.N);
    s.numbers("a", cfg.sweep.a);
    s.sizes("Q", cfg.sweep.Q);
    s.done();
  }

  if (const json* node = root.find("integrals")) {
    Section s(*node, "integrals");
    s.numbers("t", cfg.integrals.t);
    s.number("B", cfg.integrals.B);
    s.number("A", cfg.integrals.A);
    s.done();
  }
  for (double t : cfg.integrals.t) {
    if (!(t >= 0.0)) throw ConfigError("integrals.t entries must be non-negative");
  }
  if (!(cfg.integrals.B > 0.0) || !(cfg.integrals.A > 0.0)) {
    throw ConfigError("integrals.A and integrals.B must be positive");
  }

  if (const json* node = root.find("recurrence")) {
    Section s(*node, "recurrence");
    s.number("threshold", cfg.recurrence.threshold);
    s.number("t_min", cfg.recurrence.t_min);
    s.done();
  }
  if (!(cfg.recurrence.threshold > 0.0 && cfg.recurrence.threshold < 1.0)) {
    throw ConfigError("recurrence.threshold must lie in (0, 1)");
  }
  root.done();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json profile = {{"kind", to_string(cfg.profile.kind)},
                  {"Q", cfg.profile.Q},
                  {"a", cfg.profile.a},
                  {"R", cfg.profile.R},
                  {"N", cfg.profile.N},
                  {"values", cfg.profile.values}};
  return json{
      {"command", to_string(cfg.command)},
      {"threads", cfg.threads},
      {"profile", profile},
      {"grid", {{"t0", cfg.grid.t0}, {"dt", cfg.grid.dt}, {"steps", cfg.grid.steps}}},
      {"perturbation", {{"magnitude", cfg.perturbation.magnitude}, {"seed", cfg.perturbation.seed}}},
      {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}},
      {"fit", {{"short_time", window_json(cfg.fit.short_time)}, {"long_time", window_json(cfg.fit.long_time)}}},
      {"sweep", {{"R", cfg.sweep.R}, {"N", cfg.sweep.N}, {"a", cfg.sweep.a}, {"Q", cfg.sweep.Q}}},
      {"integrals", {{"t", cfg.integrals.t}, {"B", cfg.integrals.B}, {"A", cfg.integrals.A}}},
      {"recurrence", {{"threshold", cfg.recurrence.threshold}, {"t_min", cfg.recurrence.t_min}}},
  };
}

void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  if (!document.is_object()) throw ConfigError("config document must be an object");
  json* node = &document;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    node = &child;
    start = dot + 1;
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not valid JSON");
  return doc;
}

}  // namespace collapse::lab
