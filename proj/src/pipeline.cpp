#include "gim/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace gim {

void RunConfig::validate() const {
  if (features.empty()) throw ValidationError("feature list must be non-empty");
  for (std::size_t a = 0; a < features.size(); ++a) {
    for (std::size_t b = a + 1; b < features.size(); ++b) {
      if (features[a] == features[b]) throw ValidationError("feature list contains duplicates");
    }
  }
  const double m = double(features.size());
  if (!(density > 0.0) || density > m)
    throw ValidationError("density must lie in (0, " + format_number(m) + "]");
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  solver().validate();
  tonal_config().outer.validate();
  tonal_config().inner.validate();
}

TonalConfig RunConfig::tonal_config() const {
  TonalConfig t;
  t.outer = {tonal_epsilon, tonal_iterations};
  t.inner = {tonal_inner_epsilon, max_iterations};
  t.reconstruction = solver();
  return t;
}

std::vector<FeatureKind> parse_feature_list(const std::string& text) {
  std::vector<FeatureKind> out;
  std::stringstream in(text);
  for (std::string name; std::getline(in, name, ',');) {
    name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }),
               name.end());
    const auto kind = parse_feature(name);
    if (!kind) throw ValidationError("unknown feature '" + name + "'");
    out.push_back(*kind);
  }
  if (out.empty()) throw ValidationError("feature list must be non-empty");
  return out;
}

std::string format_feature_list(const std::vector<FeatureKind>& features) {
  std::string out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) out += ',';
    out += feature_name(features[i]);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ValidationError("invalid number for " + key + ": '" + value + "'");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ValidationError("invalid integer for " + key + ": '" + value + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ValidationError("invalid boolean for " + key + ": '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

}  // namespace

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::map<std::string, std::string> out;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "input") cfg.input = value;
  else if (key == "features") cfg.features = parse_feature_list(value);
  else if (key == "density") cfg.density = to_double(key, value);
  else if (key == "iters") cfg.iterations = to_int(key, value);
  else if (key == "epsilon") cfg.epsilon = to_double(key, value);
  else if (key == "max-iterations") cfg.max_iterations = to_int(key, value);
  else if (key == "tonal-inner-epsilon") cfg.tonal_inner_epsilon = to_double(key, value);
  else if (key == "tonal-epsilon") cfg.tonal_epsilon = to_double(key, value);
  else if (key == "tonal-iters") cfg.tonal_iterations = to_int(key, value);
  else if (key == "output-dir") cfg.output_dir = value;
  else if (key == "tonal") cfg.tonal = to_bool(key, value);
  else if (key == "debug-maps") cfg.debug_maps = to_bool(key, value);
  else throw ValidationError("unknown config key '" + key + "'");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out) {
      std::filesystem::remove(tmp);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename to " + path.string() + ": " + ec.message());
  }
}

std::string pnm_extension(const PixelGrid& grid) { return grid.channels() == 1 ? ".pgm" : ".ppm"; }

std::string trace_csv(const std::vector<FeatureKind>& catalogue,
                      const std::vector<DensifyTraceRow>& trace) {
  std::string out = "iteration,points_total";
  for (FeatureKind kind : catalogue) out += ",points_" + std::string(feature_name(kind));
  out += ",mse\n";
  for (const auto& row : trace) {
    out += std::to_string(row.iteration) + ',' + std::to_string(row.points_total);
    for (Eigen::Index count : row.points_per_feature) out += ',' + std::to_string(count);
    out += ',' + format_number(row.mse) + '\n';
  }
  return out;
}

std::string error_report_csv(const ErrorReport& report) {
  std::string out = "channel,mse\n";
  for (std::size_t c = 0; c < report.per_channel_mse.size(); ++c)
    out += std::to_string(c) + ',' + format_number(report.per_channel_mse[c]) + '\n';
  out += "all," + format_number(report.mse) + '\n';
  return out;
}

namespace {

namespace fs = std::filesystem;

// Saves masks through a temporary so an interrupted run leaves no mask file.
void save_masks_atomic(const MaskSet& masks, const ConstraintSet& b, const fs::path& path) {
  auto tmp = path;
  tmp += ".partial";
  try {
    save_masks(masks, b, tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename to " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void write_pnm_atomic(const PixelGrid& grid, const fs::path& path) {
  auto tmp = path;
  tmp += ".partial";
  try {
    write_pnm(grid, tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename to " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

PixelGrid scaled_to_bytes(const GridGeometry& geom, const Vector& values) {
  const double hi = values.size() ? values.maxCoeff() : 0.0;
  Vector scaled = hi > 0.0 ? Vector(values * (255.0 / hi)) : Vector(Vector::Zero(values.size()));
  return PixelGrid(geom.width, geom.height, 1, std::move(scaled));
}

/// Writes the per-iteration panels: pointwise error maps, the best integrated
/// error per cell, and the Voronoi cell boundaries over the reconstruction.
class DebugMapWriter : public DensifyObserver {
 public:
  DebugMapWriter(fs::path dir, std::vector<FeatureKind> catalogue)
      : dir_(std::move(dir)), catalogue_(std::move(catalogue)) {
    fs::create_directories(dir_);
  }

  void on_iteration(int iteration, const PixelGrid& u, const std::vector<Vector>& maps,
                    const VoronoiLabeling& labeling, const std::vector<CellScore>& scores) override {
    const GridGeometry geom(u.width(), u.height());
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "iter%03d_", iteration);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      write_pnm(scaled_to_bytes(geom, maps[i]),
                dir_ / (prefix + std::string(feature_name(catalogue_[i])) + "_error.pgm"));
    }
    Vector integrated(geom.size());
    for (Eigen::Index j = 0; j < geom.size(); ++j)
      integrated[j] = scores[std::size_t(labeling.labels[std::size_t(j)])].integrated_error;
    write_pnm(scaled_to_bytes(geom, integrated), dir_ / (prefix + std::string("integrated.pgm")));

    PixelGrid overlay(geom.width, geom.height, 1, Vector(u.channel(0)));
    for (int y = 0; y < geom.height; ++y) {
      for (int x = 0; x < geom.width; ++x) {
        const int label = labeling.labels[std::size_t(geom.index(x, y))];
        const bool edge = (x + 1 < geom.width && labeling.labels[std::size_t(geom.index(x + 1, y))] != label) ||
                          (y + 1 < geom.height && labeling.labels[std::size_t(geom.index(x, y + 1))] != label);
        if (edge) overlay.at(x, y) = 255.0;
      }
    }
    for (const Site& s : labeling.sites) overlay.at(s.x, s.y) = 0.0;
    write_pnm(overlay, dir_ / (prefix + std::string("voronoi.pgm")));
  }

 private:
  fs::path dir_;
  std::vector<FeatureKind> catalogue_;
};

void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string tonal_report_csv(double before, double after) {
  return "mse_before,mse_after\n" + format_number(before) + ',' + format_number(after) + '\n';
}

}  // namespace

DensifyOutputs run_densify(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const PixelGrid f = read_pnm(cfg.input);
  make_output_dir(cfg.output_dir);

  DensifyConfig dcfg;
  dcfg.target_points = Eigen::Index(std::floor(cfg.density * double(f.pixel_count()) + 1e-9));
  dcfg.iterations = cfg.iterations;
  dcfg.solver = cfg.solver();

  std::unique_ptr<DebugMapWriter> debug;
  if (cfg.debug_maps) debug = std::make_unique<DebugMapWriter>(cfg.output_dir / "debug", cfg.features);

  log << "densify: " << f.width() << "x" << f.height() << "x" << f.channels() << ", features "
      << format_feature_list(cfg.features) << ", " << dcfg.target_points << " points in "
      << dcfg.iterations << " iterations\n";
  const DensifyResult result = densify(f, cfg.features, dcfg, debug.get());

  DensifyOutputs out{cfg.output_dir / "masks.gim",
                     cfg.output_dir / ("reconstruction" + pnm_extension(f)),
                     cfg.output_dir / "trace.csv"};
  write_pnm_atomic(result.reconstruction, out.reconstruction);
  write_file_atomic(out.trace, trace_csv(cfg.features, result.trace));
  save_masks_atomic(result.masks, result.b, out.masks);
  log << "densify: final mse " << format_number(result.trace.back().mse) << "\n";

  if (cfg.tonal) {
    const TonalResult tonal = tonal_optimise(f, result.masks, result.b, cfg.tonal_config());
    write_pnm_atomic(tonal.u, cfg.output_dir / ("tonal" + pnm_extension(f)));
    write_file_atomic(cfg.output_dir / "tonal.csv", tonal_report_csv(tonal.mse_before, tonal.mse_after));
    save_masks_atomic(result.masks, tonal.b, cfg.output_dir / "tonal.gim");
    log << "tonal: mse " << format_number(tonal.mse_before) << " -> " << format_number(tonal.mse_after)
        << "\n";
  }
  return out;
}

TonalOutputs run_tonal(const fs::path& mask_file, const fs::path& image, const RunConfig& cfg,
                       std::ostream& log) {
  const PixelGrid f = read_pnm(image);
  const MaskFile loaded = load_masks(mask_file);
  const GridGeometry& geom = loaded.masks.geometry();
  if (geom.width != f.width() || geom.height != f.height() || int(loaded.values.size()) != f.channels())
    throw ValidationError("mask file geometry does not match " + image.string());
  make_output_dir(cfg.output_dir);

  const TonalResult tonal = tonal_optimise(f, loaded.masks, loaded.values, cfg.tonal_config());
  TonalOutputs out{cfg.output_dir / "tonal.gim", cfg.output_dir / ("tonal" + pnm_extension(f)),
                   cfg.output_dir / "tonal.csv", tonal.mse_before, tonal.mse_after};
  write_pnm_atomic(tonal.u, out.reconstruction);
  write_file_atomic(out.report, tonal_report_csv(tonal.mse_before, tonal.mse_after));
  save_masks_atomic(loaded.masks, tonal.b, out.masks);
  log << "tonal: mse " << format_number(tonal.mse_before) << " -> " << format_number(tonal.mse_after)
      << "\n";
  return out;
}

PixelGrid run_inpaint(const fs::path& mask_file, const SolverConfig& solver) {
  const MaskFile loaded = load_masks(mask_file);
  return inpaint({loaded.masks, loaded.values, solver}).u;
}

}  // namespace gim
