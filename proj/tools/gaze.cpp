// gaze — command-line front end for the gazekit library.
//
// Subcommands: dataset list / dataset download, process, plot. Logs go to
// stderr, data and summaries to stdout. Exit codes are a stable contract:
// 0 success, 1 runtime/data failure, 2 usage or config error, 3 integrity
// error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "gaze/dataset/registry.hpp"
#include "gaze/io/csv.hpp"
#include "gaze/pipeline.hpp"
#include "gaze/viz/svg.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIntegrity = 3;

int exit_code_for(const gaze::Error& e) {
  switch (e.kind()) {
    case gaze::ErrorKind::Integrity:
      return kExitIntegrity;
    case gaze::ErrorKind::Config:
    case gaze::ErrorKind::Definition:
    case gaze::ErrorKind::InvalidArgument:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

fs::path data_home() {
  if (const char* env = std::getenv("GAZE_DATA_HOME"); env && *env)
    return fs::path(env);
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".gazekit";
  return fs::path("gazekit-data");
}

gaze::Registry build_registry() {
  auto registry = gaze::Registry::with_builtin();
  registry.add_definitions_dir(data_home() / "definitions");
  return registry;
}

int cmd_dataset_list() {
  const auto registry = build_registry();
  for (const auto& name : registry.names()) {
    const auto count = registry.get(name).def.resources.size();
    std::cout << name << " (" << count
              << (count == 1 ? " resource)" : " resources)") << "\n";
  }
  return kExitOk;
}

int cmd_dataset_download(const std::string& name, const std::string& dir,
                         unsigned jobs) {
  const auto registry = build_registry();
  const auto& entry = registry.get(name);  // unknown name -> usage error
  const fs::path dest = dir.empty() ? data_home() / name : fs::path(dir);
  std::cerr << "fetching dataset '" << name << "' into " << dest.string()
            << "\n";
  const auto report = gaze::ensure_dataset(entry.def, dest, jobs,
                                           entry.bundled);
  for (const auto& d : report.downloads)
    std::cerr << d.path.filename().string()
              << (d.from_cache ? ": cached" : ": downloaded") << "\n";
  std::cerr << report.files.size() << " file(s) ready under "
            << report.raw_dir.string() << "\n";
  return kExitOk;
}

int cmd_process(const std::string& config_path, unsigned jobs) {
  const auto cfg = gaze::PipelineConfig::parse_file(config_path);
  const auto registry = build_registry();
  std::cerr << "processing " << config_path << " with " << jobs
            << " job(s)\n";
  const auto report = gaze::run_pipeline(cfg, registry, data_home(), jobs);
  std::cout << report.summary();
  return report.all_ok() ? kExitOk : kExitRuntime;
}

/// Column sniffing for `gaze plot`: accept both the canonical export header
/// (x_px/y_px) and the bundled datasets' short names (x/y).
gaze::GazeFrame read_plot_input(const fs::path& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in)
    gaze::detail::raise(gaze::ErrorKind::Io,
                        "cannot open input: " + input.string());
  std::string header;
  std::getline(in, header);
  in.close();
  auto has = [&](const std::string& name) {
    for (const auto& field : gaze::detail::split(header, ','))
      if (gaze::detail::trim(field) == name) return true;
    return false;
  };
  gaze::CsvSchema schema;
  if (has("x_px") && has("y_px")) {
    schema.x_px = "x_px";
    schema.y_px = "y_px";
  } else if (has("x") && has("y")) {
    schema.x_px = "x";
    schema.y_px = "y";
  } else {
    gaze::detail::raise(gaze::ErrorKind::Schema,
                        input.string() +
                            ": no position columns (x_px/y_px or x/y)");
  }
  if (has("pupil")) schema.pupil = "pupil";
  return gaze::read_gaze_csv(input, schema);
}

int cmd_plot(const std::string& kind, const std::string& input,
             const std::string& output) {
  const auto frame = read_plot_input(input);
  if (kind == "heatmap") {
    gaze::HeatmapSpec spec;  // extent derived from the data
    const auto hist = gaze::histogram2d(frame, spec);
    const auto blurred =
        gaze::gaussian_blur(hist.grid, spec.smoothing_sigma_bins);
    gaze::render_heatmap(blurred, spec, output);
  } else {
    gaze::render_traceplot(frame, output);
  }
  std::cerr << "wrote " << output << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaze — eye-movement data processing toolkit"};
  app.require_subcommand(1);

  auto* dataset = app.add_subcommand("dataset", "Manage datasets");
  dataset->require_subcommand(1);
  dataset->add_subcommand("list", "List registered datasets");
  auto* download =
      dataset->add_subcommand("download", "Download and extract a dataset");
  std::string ds_name, ds_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  download->add_option("name", ds_name, "Registered dataset name")->required();
  download->add_option("--dir", ds_dir,
                       "Destination directory (default: data home)");
  download->add_option("--jobs", jobs, "Concurrent downloads");

  auto* process = app.add_subcommand("process", "Run a processing config");
  std::string config_path;
  unsigned process_jobs = std::max(1u, std::thread::hardware_concurrency());
  process->add_option("--config", config_path, "Pipeline config (TOML)")
      ->required();
  process->add_option("--jobs", process_jobs, "Parallel sessions");

  auto* plot = app.add_subcommand("plot", "Render a plot from a gaze CSV");
  std::string plot_kind, plot_input, plot_output;
  plot->add_option("kind", plot_kind, "Plot kind")
      ->required()
      ->check(CLI::IsMember({"heatmap", "trace"}));
  plot->add_option("--input", plot_input, "Gaze CSV to plot")->required();
  plot->add_option("--output", plot_output, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (dataset->parsed()) {
      if (download->parsed())
        return cmd_dataset_download(ds_name, ds_dir, jobs);
      return cmd_dataset_list();
    }
    if (process->parsed()) return cmd_process(config_path, process_jobs);
    if (plot->parsed()) return cmd_plot(plot_kind, plot_input, plot_output);
  } catch (const gaze::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
