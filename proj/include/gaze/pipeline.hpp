#pragma once

// Config-driven batch processing: one declarative TOML file names the input
// (a registered dataset or a local path), the transform steps, the detectors
// with their parameters, the per-event properties, and the outputs. Every
// run of the same config over the same input produces byte-identical files,
// whatever the --jobs setting — sessions are processed in parallel but
// written and summarised in deterministic session order.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/dataset/registry.hpp"
#include "gaze/dataset/scan.hpp"
#include "gaze/detect.hpp"
#include "gaze/io/csv.hpp"
#include "gaze/io/ipc.hpp"
#include "gaze/properties.hpp"
#include "gaze/transform.hpp"
#include "gaze/viz/svg.hpp"

namespace gaze {

namespace detail_pipe {

[[noreturn]] inline void bad_config(const std::string& msg) {
  detail::raise(ErrorKind::Config, msg);
}

}  // namespace detail_pipe

using DetectorParams =
    std::variant<IvtParams, IdtParams, MicrosaccadeParams>;

struct DetectorConfig {
  std::string kind;  // "ivt", "idt" or "microsaccade"
  std::string name;  // event name stamped on this detector's output
  DetectorParams params;

  bool needs_velocity() const {
    return !std::holds_alternative<IdtParams>(params);
  }
};

enum class PlotKind { Heatmap, Trace };

struct PipelineConfig {
  // [input]
  std::optional<std::string> dataset;
  std::optional<std::filesystem::path> input_path;
  std::optional<std::string> input_pattern;      // for directory inputs
  std::optional<DatasetSchema> input_schema;     // required with a path
  std::optional<ExperimentGeometry> geometry;    // required with a path

  // [transform]
  bool pix2deg = true;
  std::optional<VelocityMethod> velocity = VelocityMethod::FivePoint;

  // [[detector]]
  std::vector<DetectorConfig> detectors;

  // [properties]
  std::vector<Property> properties;

  // [output]
  std::filesystem::path output_dir;
  bool out_gaze_csv = false;
  bool out_gaze_ipc = false;
  bool out_events_csv = true;
  std::vector<PlotKind> plots;

  void validate() const;
  static PipelineConfig parse(std::string_view text);
  static PipelineConfig parse_file(const std::filesystem::path& path);
};

namespace detail_pipe {

inline VelocityMethod parse_velocity(const std::string& s) {
  if (s == "preceding") return VelocityMethod::Preceding;
  if (s == "neighbors") return VelocityMethod::Neighbors;
  if (s == "fivepoint") return VelocityMethod::FivePoint;
  bad_config("[transform] velocity must be one of none, preceding, "
             "neighbors, fivepoint; got '" + s + "'");
}

inline Property parse_property(const std::string& s) {
  if (s == "duration") return Property::Duration;
  if (s == "amplitude") return Property::Amplitude;
  if (s == "dispersion") return Property::Dispersion;
  if (s == "peak_velocity") return Property::PeakVelocity;
  if (s == "position") return Property::Position;
  bad_config("[properties] unknown property '" + s + "'");
}

inline double number_or(const toml::Table& t, const std::string& key,
                        double fallback) {
  const auto* v = toml::find(t, key);
  if (!v) return fallback;
  if (!v->is_float() && !v->is_int())
    bad_config("detector key '" + key + "' must be a number");
  return v->as_float();
}

inline DetectorConfig parse_detector(const toml::Table& t, std::size_t index) {
  const std::string ctx = "[[detector]] #" + std::to_string(index + 1);
  const auto* kind = toml::find(t, "kind");
  if (!kind || !kind->is_string())
    bad_config(ctx + " needs a string key 'kind'");
  DetectorConfig d;
  d.kind = kind->as_string();
  if (d.kind == "ivt") {
    IvtParams p;
    p.velocity_threshold =
        number_or(t, "velocity_threshold", p.velocity_threshold);
    p.min_duration_ms = number_or(t, "min_duration_ms", p.min_duration_ms);
    d.params = p;
    d.name = event_name::fixation;
  } else if (d.kind == "idt") {
    IdtParams p;
    p.dispersion_threshold =
        number_or(t, "dispersion_threshold", p.dispersion_threshold);
    p.min_duration_ms = number_or(t, "min_duration_ms", p.min_duration_ms);
    d.params = p;
    d.name = event_name::fixation;
  } else if (d.kind == "microsaccade") {
    MicrosaccadeParams p;
    p.lambda = number_or(t, "lambda", p.lambda);
    p.min_duration_samples = static_cast<std::size_t>(
        number_or(t, "min_duration_samples",
                  static_cast<double>(p.min_duration_samples)));
    p.sigma_floor = number_or(t, "sigma_floor", p.sigma_floor);
    d.params = p;
    d.name = event_name::microsaccade;
  } else {
    bad_config(ctx + ": unknown detector kind '" + d.kind + "'");
  }
  if (const auto* name = toml::find(t, "name")) {
    if (!name->is_string() || name->as_string().empty())
      bad_config(ctx + ": 'name' must be a non-empty string");
    d.name = name->as_string();
  }
  try {
    std::visit([](const auto& p) { p.validate(); }, d.params);
  } catch (const Error& e) {
    bad_config(ctx + ": " + e.what());
  }
  return d;
}

}  // namespace detail_pipe

inline void PipelineConfig::validate() const {
  using detail_pipe::bad_config;
  if (!dataset && !input_path)
    bad_config("[input] needs either 'dataset' or 'path'");
  if (dataset && input_path)
    bad_config("[input] 'dataset' and 'path' are mutually exclusive");
  if (input_path) {
    if (!input_schema) bad_config("[input] with a path needs a [input.schema] table");
    if (!geometry) bad_config("a path input needs a [geometry] table");
  }
  if (output_dir.empty()) bad_config("[output] needs a non-empty 'dir'");
  if (!out_gaze_csv && !out_gaze_ipc && !out_events_csv && plots.empty())
    bad_config("[output] enables nothing: set gaze_csv, gaze_ipc, "
               "events_csv or plots");
  for (const auto& d : detectors) {
    if (d.needs_velocity() && !velocity)
      bad_config("detector '" + d.name +
                 "' needs velocities; set [transform] velocity");
    if (!pix2deg)
      bad_config("detector '" + d.name +
                 "' operates in degrees; [transform] pix2deg must be true");
  }
  if (velocity && !pix2deg)
    bad_config("[transform] velocity requires pix2deg = true");
  for (Property p : properties) {
    if ((p == Property::Amplitude || p == Property::Dispersion ||
         p == Property::Position) &&
        !pix2deg)
      bad_config(std::string("property '") + property_name(p) +
                 "' requires [transform] pix2deg = true");
    if (p == Property::PeakVelocity && !velocity)
      bad_config("property 'peak_velocity' requires [transform] velocity");
  }
  if (!properties.empty()) {
    try {
      (void)PropertySpec(properties);  // rejects duplicates
    } catch (const Error& e) {
      bad_config(e.what());
    }
  }
  // Plots and gaze tables never consume events, so detectors whose output
  // is not exported are configuration mistakes, not choices.
  if (!detectors.empty() && !out_events_csv)
    bad_config("[output] discards detector events: enable events_csv or "
               "drop the [[detector]] tables");
}

inline PipelineConfig PipelineConfig::parse(std::string_view text) {
  using detail_pipe::bad_config;
  toml::Table root;
  try {
    root = toml::parse(text);
  } catch (const Error& e) {
    bad_config(std::string("config is not valid TOML: ") + e.what());
  }
  PipelineConfig cfg;

  const auto* input = toml::find(root, "input");
  if (!input || !input->is_table())
    bad_config("missing required table [input]");
  const toml::Table& in = input->as_table();
  if (const auto* d = toml::find(in, "dataset")) {
    if (!d->is_string()) bad_config("[input] dataset must be a string");
    cfg.dataset = d->as_string();
  }
  if (const auto* p = toml::find(in, "path")) {
    if (!p->is_string()) bad_config("[input] path must be a string");
    cfg.input_path = std::filesystem::path(p->as_string());
  }
  if (const auto* pat = toml::find(in, "pattern")) {
    if (!pat->is_string()) bad_config("[input] pattern must be a string");
    cfg.input_pattern = pat->as_string();
  }
  if (const auto* schema = toml::find(in, "schema")) {
    if (!schema->is_table()) bad_config("[input.schema] must be a table");
    try {
      cfg.input_schema = detail_def::parse_schema(schema->as_table());
    } catch (const Error& e) {
      bad_config(std::string("[input.schema]: ") + e.what());
    }
  }

  if (const auto* geom = toml::find(root, "geometry")) {
    if (!geom->is_table()) bad_config("[geometry] must be a table");
    try {
      cfg.geometry = detail_def::parse_geometry(geom->as_table());
    } catch (const Error& e) {
      bad_config(std::string("[geometry]: ") + e.what());
    }
  }

  if (const auto* tr = toml::find(root, "transform")) {
    if (!tr->is_table()) bad_config("[transform] must be a table");
    const toml::Table& t = tr->as_table();
    if (const auto* v = toml::find(t, "pix2deg")) {
      if (!v->is_bool()) bad_config("[transform] pix2deg must be a boolean");
      cfg.pix2deg = v->as_bool();
    }
    if (const auto* v = toml::find(t, "velocity")) {
      if (!v->is_string())
        bad_config("[transform] velocity must be a string");
      if (v->as_string() == "none")
        cfg.velocity.reset();
      else
        cfg.velocity = detail_pipe::parse_velocity(v->as_string());
    }
  }

  if (const auto* det = toml::find(root, "detector")) {
    if (!det->is_array()) bad_config("'detector' must be [[detector]] tables");
    std::size_t index = 0;
    for (const auto& d : det->as_array()) {
      if (!d.is_table()) bad_config("'detector' must be [[detector]] tables");
      cfg.detectors.push_back(
          detail_pipe::parse_detector(d.as_table(), index++));
    }
  }

  if (const auto* props = toml::find(root, "properties")) {
    if (!props->is_table()) bad_config("[properties] must be a table");
    if (const auto* list = toml::find(props->as_table(), "compute")) {
      if (!list->is_array())
        bad_config("[properties] compute must be an array of strings");
      for (const auto& p : list->as_array()) {
        if (!p.is_string())
          bad_config("[properties] compute must be an array of strings");
        cfg.properties.push_back(detail_pipe::parse_property(p.as_string()));
      }
    }
  }

  const auto* output = toml::find(root, "output");
  if (!output || !output->is_table())
    bad_config("missing required table [output]");
  const toml::Table& out = output->as_table();
  if (const auto* dir = toml::find(out, "dir")) {
    if (!dir->is_string()) bad_config("[output] dir must be a string");
    cfg.output_dir = std::filesystem::path(dir->as_string());
  } else {
    bad_config("[output] needs a 'dir' key");
  }
  auto flag = [&](const char* key, bool& target) {
    if (const auto* v = toml::find(out, key)) {
      if (!v->is_bool())
        bad_config(std::string("[output] ") + key + " must be a boolean");
      target = v->as_bool();
    }
  };
  flag("gaze_csv", cfg.out_gaze_csv);
  flag("gaze_ipc", cfg.out_gaze_ipc);
  flag("events_csv", cfg.out_events_csv);
  if (const auto* plots = toml::find(out, "plots")) {
    if (!plots->is_array())
      bad_config("[output] plots must be an array of strings");
    for (const auto& p : plots->as_array()) {
      if (!p.is_string())
        bad_config("[output] plots must be an array of strings");
      if (p.as_string() == "heatmap")
        cfg.plots.push_back(PlotKind::Heatmap);
      else if (p.as_string() == "trace")
        cfg.plots.push_back(PlotKind::Trace);
      else
        bad_config("[output] unknown plot kind '" + p.as_string() + "'");
    }
  }

  cfg.validate();
  return cfg;
}

inline PipelineConfig PipelineConfig::parse_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    detail::raise(ErrorKind::Io, "cannot open config: " + path.string());
  std::string text{std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>()};
  return parse(text);
}

struct SessionOutcome {
  std::string label;
  std::filesystem::path source;
  bool ok = false;
  std::string error;
  std::size_t samples = 0;
  // detector name -> event count, in config order
  std::vector<std::pair<std::string, std::size_t>> event_counts;
  std::vector<std::filesystem::path> outputs;
};

struct PipelineRunReport {
  std::vector<SessionOutcome> sessions;   // deterministic session order
  std::vector<LoadFailure> load_failures; // files that never parsed
  bool all_ok() const {
    if (!load_failures.empty()) return false;
    for (const auto& s : sessions)
      if (!s.ok) return false;
    return true;
  }

  /// Stable, human-readable run summary (one line per session).
  std::string summary() const {
    std::ostringstream out;
    std::size_t ok = 0;
    for (const auto& s : sessions) {
      if (s.ok) {
        out << "session " << s.label << ": samples=" << s.samples;
        for (const auto& [name, count] : s.event_counts)
          out << " " << name << "=" << count;
        out << "\n";
        ++ok;
      } else {
        out << "session " << s.label << ": FAILED (" << s.error << ")\n";
      }
    }
    for (const auto& f : load_failures)
      out << "unreadable " << f.path.string() << ": " << f.message << "\n";
    out << "processed " << ok << "/" << sessions.size() + load_failures.size()
        << " sessions\n";
    return out.str();
  }
};

namespace detail_pipe {

struct ResolvedInput {
  DatasetDefinition def;
  std::filesystem::path raw_dir;
};

/// Turn the [input] section into a definition + directory that scan/load
/// understand. Dataset inputs are fetched (or materialised from bundled
/// bytes) under data_home first.
inline ResolvedInput resolve_input(const PipelineConfig& cfg,
                                   const Registry& registry,
                                   const std::filesystem::path& data_home,
                                   unsigned jobs) {
  namespace fs = std::filesystem;
  if (cfg.dataset) {
    const Registry::Entry& entry = registry.get(*cfg.dataset);
    const auto report =
        ensure_dataset(entry.def, data_home / entry.def.name, jobs,
                       entry.bundled);
    return {entry.def, report.raw_dir};
  }

  const fs::path& path = *cfg.input_path;
  if (!fs::exists(path))
    detail::raise(ErrorKind::Io, "input path does not exist: " + path.string());

  std::string pattern;
  fs::path dir;
  if (fs::is_directory(path)) {
    if (!cfg.input_pattern)
      bad_config("[input] a directory input needs 'pattern'");
    pattern = *cfg.input_pattern;
    dir = path;
  } else {
    // Single file: match exactly that basename, no capture groups.
    std::string base = path.filename().string();
    pattern.reserve(base.size() * 2);
    for (char c : base) {
      if (std::string_view("\\^$.|?*+()[]{}").find(c) !=
          std::string_view::npos)
        pattern += '\\';
      pattern += c;
    }
    dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  }
  // Ad-hoc definition: local inputs have no resources to download.
  DatasetDefinition def{"local", {}, FilenamePattern(pattern), *cfg.geometry,
                        *cfg.input_schema};
  return {std::move(def), dir};
}

inline std::string session_label(const SessionMeta& meta) {
  return meta.id();
}

}  // namespace detail_pipe

/// Execute the full pipeline described by cfg. `data_home` is where dataset
/// inputs are downloaded/extracted; `jobs` bounds both download and
/// per-session processing parallelism.
inline PipelineRunReport run_pipeline(const PipelineConfig& cfg,
                                      const Registry& registry,
                                      const std::filesystem::path& data_home,
                                      unsigned jobs = 1) {
  namespace fs = std::filesystem;
  cfg.validate();
  if (jobs == 0)
    detail::raise(ErrorKind::InvalidArgument, "jobs must be >= 1");

  const auto resolved =
      detail_pipe::resolve_input(cfg, registry, data_home, jobs);
  const ExperimentGeometry& geom = resolved.def.geometry;
  LoadReport loaded = load_dataset(resolved.def, resolved.raw_dir, jobs);

  fs::create_directories(cfg.output_dir);

  PipelineRunReport report;
  report.load_failures = loaded.failures;
  report.sessions.resize(loaded.sessions.size());

  std::atomic<std::size_t> next{0};
  auto process_one = [&](std::size_t i) {
    const LoadedSession& session = loaded.sessions[i];
    SessionOutcome& outcome = report.sessions[i];
    outcome.label = detail_pipe::session_label(session.meta);
    outcome.source = session.path;
    try {
      GazeFrame frame = session.frame;
      if (cfg.pix2deg) frame = positions_to_degrees(frame, geom);
      if (cfg.velocity)
        frame = degrees_to_velocity(frame, geom.sampling_rate_hz,
                                    *cfg.velocity);
      outcome.samples = frame.size();

      EventList all_events;
      for (const DetectorConfig& d : cfg.detectors) {
        EventList events = std::visit(
            [&](const auto& params) -> EventList {
              using P = std::decay_t<decltype(params)>;
              if constexpr (std::is_same_v<P, IvtParams>)
                return detect_ivt(frame, params, geom.sampling_rate_hz);
              else if constexpr (std::is_same_v<P, IdtParams>)
                return detect_idt(frame, params, geom.sampling_rate_hz);
              else
                return detect_microsaccades(frame, params);
            },
            d.params);
        if (!cfg.properties.empty())
          events =
              compute_properties(frame, events, PropertySpec(cfg.properties));
        std::vector<EventRecord> renamed;
        renamed.reserve(events.size());
        for (const EventRecord& e : events)
          renamed.emplace_back(d.name, e.onset_t(), e.offset_t(), e.onset_i(),
                               e.offset_i(), e.properties());
        EventList named(std::move(renamed));
        outcome.event_counts.emplace_back(d.name, named.size());
        all_events = merge_events(all_events, named);
      }

      auto out_path = [&](const char* suffix) {
        return cfg.output_dir / (outcome.label + suffix);
      };
      if (cfg.out_gaze_csv) {
        const auto p = out_path("_gaze.csv");
        write_gaze_csv(frame, p);
        outcome.outputs.push_back(p);
      }
      if (cfg.out_gaze_ipc) {
        const auto p = out_path("_gaze.arrow");
        write_gaze_ipc(frame, p);
        outcome.outputs.push_back(p);
      }
      if (cfg.out_events_csv) {
        const auto p = out_path("_events.csv");
        write_events_csv(all_events, p);
        outcome.outputs.push_back(p);
      }
      for (PlotKind plot : cfg.plots) {
        if (plot == PlotKind::Heatmap) {
          HeatmapSpec spec;
          spec.extent = Extent{0.0, geom.screen_width_px, 0.0,
                               geom.screen_height_px};
          const auto hist = histogram2d(frame, spec);
          const Grid blurred =
              gaussian_blur(hist.grid, spec.smoothing_sigma_bins);
          const auto p = out_path("_heatmap.svg");
          render_heatmap(blurred, spec, p);
          outcome.outputs.push_back(p);
        } else {
          const auto p = out_path("_trace.svg");
          render_traceplot(frame, p);
          outcome.outputs.push_back(p);
        }
      }
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
  };

  const unsigned n = static_cast<unsigned>(
      std::min<std::size_t>(jobs, loaded.sessions.size()));
  if (n <= 1) {
    for (std::size_t i = 0; i < loaded.sessions.size(); ++i) process_one(i);
  } else {
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= loaded.sessions.size()) return;
        process_one(i);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

}  // namespace gaze
