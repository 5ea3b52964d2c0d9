// gim: sparse image representation with generalised inpainting.
//
//   gim densify [options] <image>          optimise masks, write masks + reconstruction + trace
//   gim tonal [options] <masks> <image>    optimise stored values
//   gim inpaint [options] <masks> -o <out> reconstruct an image from a mask file
//   gim eval <u> <f> [--csv <file>]        mean squared error report
//
// Exit codes: 0 success, 1 validation, 2 I/O, 3 solver failure.

#include <CLI11.hpp>

#include <iostream>

#include "gim/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kIo = 2, kSolver = 3 };

struct Flags {
  std::string config_file;
  std::string features;
  double density = 0.0;
  int iterations = 0;
  double epsilon = 0.0;
  int max_iterations = 0;
  double tonal_inner_epsilon = 0.0;
  double tonal_epsilon = 0.0;
  int tonal_iterations = 0;
  std::string output_dir;
  bool tonal = false;
  bool debug_maps = false;
};

struct Registered {
  CLI::Option* config = nullptr;
  CLI::Option* features = nullptr;
  CLI::Option* density = nullptr;
  CLI::Option* iterations = nullptr;
  CLI::Option* epsilon = nullptr;
  CLI::Option* max_iterations = nullptr;
  CLI::Option* tonal_inner_epsilon = nullptr;
  CLI::Option* tonal_epsilon = nullptr;
  CLI::Option* tonal_iterations = nullptr;
  CLI::Option* output_dir = nullptr;
  CLI::Option* tonal = nullptr;
  CLI::Option* debug_maps = nullptr;
};

void add_solver_flags(CLI::App* cmd, Flags& flags, Registered& reg) {
  reg.config = cmd->add_option("--config", flags.config_file, "key=value config file; flags override it");
  reg.epsilon = cmd->add_option("--epsilon", flags.epsilon, "SYMMLQ tolerance for inpainting solves");
  reg.max_iterations = cmd->add_option("--max-iterations", flags.max_iterations, "SYMMLQ iteration cap");
}

void add_tonal_flags(CLI::App* cmd, Flags& flags, Registered& reg) {
  reg.tonal_inner_epsilon =
      cmd->add_option("--tonal-inner-epsilon", flags.tonal_inner_epsilon, "SYMMLQ tolerance inside R and R^T");
  reg.tonal_epsilon = cmd->add_option("--tonal-epsilon", flags.tonal_epsilon, "CGNR tolerance");
  reg.tonal_iterations = cmd->add_option("--tonal-iters", flags.tonal_iterations, "CGNR iteration cap");
}

// Config file first, then explicitly given flags.
gim::RunConfig resolve(const Flags& flags, const Registered& reg) {
  gim::RunConfig cfg;
  if (reg.config && reg.config->count()) {
    for (const auto& [key, value] : gim::read_key_values(flags.config_file)) gim::apply_key_value(cfg, key, value);
  }
  auto given = [](const CLI::Option* opt) { return opt && opt->count() > 0; };
  if (given(reg.features)) cfg.features = gim::parse_feature_list(flags.features);
  if (given(reg.density)) cfg.density = flags.density;
  if (given(reg.iterations)) cfg.iterations = flags.iterations;
  if (given(reg.epsilon)) cfg.epsilon = flags.epsilon;
  if (given(reg.max_iterations)) cfg.max_iterations = flags.max_iterations;
  if (given(reg.tonal_inner_epsilon)) cfg.tonal_inner_epsilon = flags.tonal_inner_epsilon;
  if (given(reg.tonal_epsilon)) cfg.tonal_epsilon = flags.tonal_epsilon;
  if (given(reg.tonal_iterations)) cfg.tonal_iterations = flags.tonal_iterations;
  if (given(reg.output_dir)) cfg.output_dir = flags.output_dir;
  if (given(reg.tonal)) cfg.tonal = flags.tonal;
  if (given(reg.debug_maps)) cfg.debug_maps = flags.debug_maps;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse image representation with generalised inpainting"};
  app.require_subcommand(1);

  Flags flags;
  Registered densify_reg, tonal_reg, inpaint_reg;
  std::string image, mask_file, output, u_path, f_path, csv_path;

  auto* densify = app.add_subcommand("densify", "Voronoi densification of feature masks");
  densify->add_option("image", image, "input P5/P6 image")->required();
  densify_reg.features =
      densify->add_option("--features", flags.features, "comma list of dirichlet,dx,dy,avg2,avg16");
  densify_reg.density = densify->add_option("--density", flags.density, "total mask density (default 0.05)");
  densify_reg.iterations = densify->add_option("--iters", flags.iterations, "densification iterations (default 30)");
  densify_reg.output_dir = densify->add_option("-o,--output-dir", flags.output_dir, "output directory");
  densify_reg.tonal = densify->add_flag("--tonal", flags.tonal, "run tonal optimisation afterwards");
  densify_reg.debug_maps = densify->add_flag("--debug-maps", flags.debug_maps, "write per-iteration error maps");
  add_solver_flags(densify, flags, densify_reg);
  add_tonal_flags(densify, flags, densify_reg);

  auto* tonal = app.add_subcommand("tonal", "Least-squares optimisation of stored feature values");
  tonal->add_option("masks", mask_file, "mask file")->required();
  tonal->add_option("image", image, "original image")->required();
  tonal_reg.output_dir = tonal->add_option("-o,--output-dir", flags.output_dir, "output directory");
  add_solver_flags(tonal, flags, tonal_reg);
  add_tonal_flags(tonal, flags, tonal_reg);

  auto* inpaint = app.add_subcommand("inpaint", "Reconstruct an image from a mask file");
  inpaint->add_option("masks", mask_file, "mask file")->required();
  inpaint->add_option("-o,--output", output, "output P5/P6 image")->required();
  add_solver_flags(inpaint, flags, inpaint_reg);

  auto* eval = app.add_subcommand("eval", "Mean squared error between two images");
  eval->add_option("u", u_path, "reconstruction")->required();
  eval->add_option("f", f_path, "reference")->required();
  eval->add_option("--csv", csv_path, "also write the report as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*densify) {
      gim::RunConfig cfg = resolve(flags, densify_reg);
      cfg.input = image;
      const auto out = gim::run_densify(cfg, std::cerr);
      std::cout << out.masks.string() << "\n" << out.reconstruction.string() << "\n" << out.trace.string() << "\n";
    } else if (*tonal) {
      const gim::RunConfig cfg = resolve(flags, tonal_reg);
      cfg.validate();
      const auto out = gim::run_tonal(mask_file, image, cfg, std::cerr);
      std::cout << "mse_before " << gim::format_number(out.mse_before) << "\n"
                << "mse_after " << gim::format_number(out.mse_after) << "\n";
    } else if (*inpaint) {
      const gim::RunConfig cfg = resolve(flags, inpaint_reg);
      cfg.solver().validate();
      gim::write_pnm(gim::run_inpaint(mask_file, cfg.solver()), output);
    } else if (*eval) {
      const gim::ErrorReport report = gim::mse(gim::read_pnm(u_path), gim::read_pnm(f_path));
      std::cout << gim::error_report_csv(report);
      if (!csv_path.empty()) gim::write_file_atomic(csv_path, gim::error_report_csv(report));
    }
  } catch (const gim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const gim::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const gim::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
