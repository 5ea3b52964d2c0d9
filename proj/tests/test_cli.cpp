#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gim/image.hpp"
#include "gim/masks.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gim_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd =
      std::string("\"") + GIM_CLI_PATH + "\" " + args + " > \"" + stdout_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_image(const fs::path& dir, int w, int h, int channels) {
  gim::PixelGrid f(w, h, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) f.at(x, y, c) = double((3 * x + 5 * y + x * y / 4 + 40 * c) % 256);
  const fs::path p = dir / (channels == 1 ? "in.pgm" : "in.ppm");
  gim::write_pnm(f, p);
  return p;
}

TEST(Cli, DensifyInpaintEvalRoundTrip) {
  const fs::path dir = scratch("roundtrip");
  const fs::path image = write_image(dir, 20, 16, 1);
  ASSERT_EQ(run("densify \"" + image.string() + "\" --features dirichlet,dx,avg2 --density 0.1 --iters 3 -o \"" +
                (dir / "out").string() + "\""),
            0);
  const fs::path masks = dir / "out" / "masks.gim";
  ASSERT_TRUE(fs::exists(masks));
  EXPECT_EQ(gim::load_masks(masks).masks.total_points(), 32);

  ASSERT_EQ(run("inpaint \"" + masks.string() + "\" -o \"" + (dir / "u.pgm").string() + "\""), 0);
  EXPECT_EQ(slurp(dir / "u.pgm"), slurp(dir / "out" / "reconstruction.pgm"));

  ASSERT_EQ(run("eval \"" + (dir / "u.pgm").string() + "\" \"" + (dir / "u.pgm").string() + "\" --csv \"" +
                    (dir / "self.csv").string() + "\"",
                dir / "stdout.txt"),
            0);
  EXPECT_EQ(slurp(dir / "self.csv"), "channel,mse\n0,0\nall,0\n");
  EXPECT_EQ(slurp(dir / "stdout.txt"), slurp(dir / "self.csv"));

  ASSERT_EQ(run("tonal \"" + masks.string() + "\" \"" + image.string() + "\" -o \"" + (dir / "tonal").string() + "\""),
            0);
  EXPECT_TRUE(fs::exists(dir / "tonal" / "tonal.gim"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("config");
  const fs::path image = write_image(dir, 12, 12, 3);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "features=dirichlet,avg16\ndensity=0.5\niters=2\n";
  }
  ASSERT_EQ(run("densify \"" + image.string() + "\" --config \"" + (dir / "run.cfg").string() +
                "\" --density 0.25 -o \"" + dir.string() + "\""),
            0);
  const auto loaded = gim::load_masks(dir / "masks.gim");
  EXPECT_EQ(loaded.masks.total_points(), 36);
  EXPECT_EQ(loaded.masks.feature_count(), 2);
  EXPECT_EQ(loaded.values.size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "reconstruction.ppm"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  const fs::path image = write_image(dir, 8, 8, 1);
  const fs::path other = dir / "other.pgm";
  gim::write_pnm(gim::PixelGrid(9, 8, 1), other);

  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("densify \"" + image.string() + "\" --density 0 -o \"" + dir.string() + "\""), 1);
  EXPECT_FALSE(fs::exists(dir / "masks.gim"));
  EXPECT_EQ(run("densify \"" + image.string() + "\" --features dirichlet,bogus"), 1);
  EXPECT_EQ(run("densify \"" + (dir / "missing.pgm").string() + "\" -o \"" + dir.string() + "\""), 2);
  EXPECT_EQ(run("eval \"" + image.string() + "\" \"" + other.string() + "\""), 1);
  EXPECT_EQ(run("inpaint \"" + image.string() + "\" -o \"" + (dir / "x.pgm").string() + "\""), 2);

  {
    std::ofstream bad(dir / "bad.pgm", std::ios::binary);
    bad << "P5\n8 8\n255\nabc";
  }
  EXPECT_EQ(run("eval \"" + (dir / "bad.pgm").string() + "\" \"" + image.string() + "\""), 2);
}

TEST(Cli, DensifyIsByteDeterministic) {
  const fs::path dir = scratch("determinism");
  const fs::path image = write_image(dir, 16, 16, 1);
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(run("densify \"" + image.string() + "\" --features dirichlet,dx,dy,avg2,avg16 --iters 4 --tonal -o \"" +
                  (dir / out).string() + "\""),
              0);
  }
  for (const char* name : {"masks.gim", "trace.csv", "reconstruction.pgm", "tonal.gim", "tonal.csv"})
    EXPECT_EQ(slurp(dir / "a" / name), slurp(dir / "b" / name)) << name;
}

}  // namespace
