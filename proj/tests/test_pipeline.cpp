#include "gim/pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace gim {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gim_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PixelGrid test_image(int w, int h, int channels) {
  PixelGrid f(w, h, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) f.at(x, y, c) = double((x * 7 + y * 13 + c * 50 + x * y) % 256);
  return f;
}

TEST(FeatureList, ParsesAndFormats) {
  const auto features = parse_feature_list("dirichlet, dx,dy,avg2,avg16");
  EXPECT_EQ(features.size(), 5u);
  EXPECT_EQ(format_feature_list(features), "dirichlet,dx,dy,avg2,avg16");
  EXPECT_THROW(parse_feature_list("dirichlet,laplace"), ValidationError);
  EXPECT_THROW(parse_feature_list(""), ValidationError);
}

TEST(RunConfig, Validation) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.density = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.density = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.features = parse_feature_list("dirichlet,dx");
  EXPECT_NO_THROW(cfg.validate());
  cfg.features = parse_feature_list("dx,dx");
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = RunConfig{};
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = RunConfig{};
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(ConfigFile, KeyValuesApply) {
  const fs::path dir = scratch("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# comment\nfeatures = dirichlet,avg2\ndensity=0.1  # trailing\niters=4\ntonal=true\n\n";
  }
  RunConfig cfg;
  for (const auto& [k, v] : read_key_values(dir / "run.cfg")) apply_key_value(cfg, k, v);
  EXPECT_EQ(cfg.features, (std::vector<FeatureKind>{FeatureKind::kDirichlet, FeatureKind::kAvg2}));
  EXPECT_EQ(cfg.density, 0.1);
  EXPECT_EQ(cfg.iterations, 4);
  EXPECT_TRUE(cfg.tonal);
  EXPECT_THROW(apply_key_value(cfg, "colour", "x"), ValidationError);
  EXPECT_THROW(apply_key_value(cfg, "density", "0.1x"), ValidationError);
  EXPECT_THROW(read_key_values(dir / "missing.cfg"), IoError);
}

TEST(Csv, TraceAndErrorReportFormats) {
  std::vector<DensifyTraceRow> trace = {{1, 3, {2, 1}, 12.5}, {2, 6, {4, 2}, 0.1}};
  EXPECT_EQ(trace_csv({FeatureKind::kDirichlet, FeatureKind::kAvg16}, trace),
            "iteration,points_total,points_dirichlet,points_avg16,mse\n1,3,2,1,12.5\n2,6,4,2,0.1\n");
  EXPECT_EQ(error_report_csv({1.5, {1, 2, 1.5}}), "channel,mse\n0,1\n1,2\n2,1.5\nall,1.5\n");
}

TEST(RunDensify, WritesOutputsAndIsDeterministic) {
  const fs::path dir = scratch("densify");
  write_pnm(test_image(16, 12, 3), dir / "in.ppm");
  RunConfig cfg;
  cfg.input = dir / "in.ppm";
  cfg.features = parse_feature_list("dirichlet,dx,dy,avg2,avg16");
  cfg.density = 0.1;
  cfg.iterations = 4;
  cfg.tonal = true;
  cfg.debug_maps = true;

  std::ostringstream log;
  cfg.output_dir = dir / "a";
  const auto a = run_densify(cfg, log);
  cfg.output_dir = dir / "b";
  const auto b = run_densify(cfg, log);

  EXPECT_EQ(a.reconstruction.extension(), ".ppm");
  for (const char* name : {"masks.gim", "reconstruction.ppm", "trace.csv", "tonal.gim", "tonal.ppm", "tonal.csv"})
    EXPECT_EQ(slurp(dir / "a" / name), slurp(dir / "b" / name)) << name;
  EXPECT_TRUE(fs::exists(dir / "a" / "debug" / "iter001_voronoi.pgm"));

  const MaskFile loaded = load_masks(a.masks);
  EXPECT_EQ(loaded.masks.total_points(), 19);  // floor(0.1 * 192)
  const std::string trace = slurp(a.trace);
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 5);
  for (const auto& entry : fs::directory_iterator(dir / "a"))
    EXPECT_NE(entry.path().extension(), ".partial");
}

TEST(RunDensify, FailureLeavesNoMaskFile) {
  const fs::path dir = scratch("fail");
  write_pnm(test_image(8, 8, 1), dir / "in.pgm");
  RunConfig cfg;
  cfg.input = dir / "in.pgm";
  cfg.output_dir = dir / "in.pgm" / "out";
  cfg.iterations = 2;
  std::ostringstream log;
  EXPECT_THROW(run_densify(cfg, log), IoError);
  EXPECT_FALSE(fs::exists(dir / "masks.gim"));

  // Unwritable mask target: the other outputs may exist but no mask file does.
  cfg.output_dir = dir / "out";
  fs::create_directories(dir / "out" / "masks.gim" / "blocker");
  EXPECT_THROW(run_densify(cfg, log), IoError);
  EXPECT_FALSE(fs::is_regular_file(dir / "out" / "masks.gim"));
  EXPECT_FALSE(fs::exists(dir / "out" / "masks.gim.partial"));

  cfg.input = dir / "absent.pgm";
  EXPECT_THROW(run_densify(cfg, log), IoError);
}

TEST(RunTonal, RejectsMismatchedImage) {
  const fs::path dir = scratch("tonal");
  write_pnm(test_image(8, 8, 1), dir / "in.pgm");
  write_pnm(test_image(9, 8, 1), dir / "other.pgm");
  RunConfig cfg;
  cfg.input = dir / "in.pgm";
  cfg.output_dir = dir;
  cfg.iterations = 2;
  std::ostringstream log;
  const auto out = run_densify(cfg, log);
  EXPECT_THROW(run_tonal(out.masks, dir / "other.pgm", cfg, log), ValidationError);
  const auto tonal = run_tonal(out.masks, dir / "in.pgm", cfg, log);
  EXPECT_LE(tonal.mse_after, tonal.mse_before);
  EXPECT_EQ(slurp(tonal.report).rfind("mse_before,mse_after\n", 0), 0u);
}

TEST(RunInpaint, ReproducesDensifyReconstruction) {
  const fs::path dir = scratch("inpaint");
  write_pnm(test_image(10, 10, 1), dir / "in.pgm");
  RunConfig cfg;
  cfg.input = dir / "in.pgm";
  cfg.output_dir = dir;
  cfg.iterations = 3;
  cfg.features = parse_feature_list("dirichlet,avg2");
  std::ostringstream log;
  const auto out = run_densify(cfg, log);
  const MaskFile loaded = load_masks(out.masks);
  const PixelGrid u = run_inpaint(out.masks, cfg.solver());
  const PixelGrid direct = inpaint({loaded.masks, loaded.values, cfg.solver()}).u;
  EXPECT_LE((u.values() - direct.values()).cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace
}  // namespace gim
