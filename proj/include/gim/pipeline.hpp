#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gim/image.hpp"
#include "gim/masks.hpp"
#include "gim/spatial_opt.hpp"
#include "gim/tonal_opt.hpp"

namespace gim {

/// Settings shared by the CLI subcommands.
struct RunConfig {
  std::filesystem::path input;
  std::vector<FeatureKind> features{FeatureKind::kDirichlet};
  double density = 0.05;
  int iterations = 30;
  double epsilon = 1e-9;
  int max_iterations = 50000;
  double tonal_inner_epsilon = 1e-6;
  double tonal_epsilon = 1e-4;
  int tonal_iterations = 100;
  std::filesystem::path output_dir = ".";
  bool tonal = false;
  bool debug_maps = false;

  void validate() const;
  SolverConfig solver() const { return {epsilon, max_iterations}; }
  TonalConfig tonal_config() const;
};

/// Comma-separated feature names, e.g. "dirichlet,dx,dy,avg2,avg16".
std::vector<FeatureKind> parse_feature_list(const std::string& text);
std::string format_feature_list(const std::vector<FeatureKind>& features);

/// key=value lines ('#' starts a comment). Keys: input, features, density,
/// iters, epsilon, max-iterations, tonal-inner-epsilon, tonal-epsilon,
/// tonal-iters, output-dir, tonal, debug-maps.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Shortest round-trip decimal form; byte-stable across runs.
std::string format_number(double v);

/// Output files of a densify run.
struct DensifyOutputs {
  std::filesystem::path masks;
  std::filesystem::path reconstruction;
  std::filesystem::path trace;
};

/// Writes masks.gim, reconstruction.p[gp]m and trace.csv into output_dir
/// (plus tonal.* when cfg.tonal is set).
DensifyOutputs run_densify(const RunConfig& cfg, std::ostream& log);

struct TonalOutputs {
  std::filesystem::path masks;
  std::filesystem::path reconstruction;
  std::filesystem::path report;
  double mse_before = 0.0;
  double mse_after = 0.0;
};

TonalOutputs run_tonal(const std::filesystem::path& mask_file, const std::filesystem::path& image,
                       const RunConfig& cfg, std::ostream& log);

/// Reconstructs the image encoded by a mask file.
PixelGrid run_inpaint(const std::filesystem::path& mask_file, const SolverConfig& solver);

/// Trace CSV: iteration,points_total,points_<feature>...,mse
std::string trace_csv(const std::vector<FeatureKind>& catalogue,
                      const std::vector<DensifyTraceRow>& trace);
/// channel,mse rows followed by all,<mse>.
std::string error_report_csv(const ErrorReport& report);

/// Writes via a temporary file and rename so a failed run leaves nothing behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Extension for a grid: .pgm for greyscale, .ppm for colour.
std::string pnm_extension(const PixelGrid& grid);

}  // namespace gim
