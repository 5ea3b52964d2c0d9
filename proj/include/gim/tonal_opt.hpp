#pragma once

#include "gim/image.hpp"
#include "gim/inpaint.hpp"
#include "gim/masks.hpp"

namespace gim {

struct TonalConfig {
  /// Outer CGNR tolerance and iteration cap.
  SolverConfig outer{1e-4, 100};
  /// Inner SYMMLQ solves inside R and R^T.
  SolverConfig inner{1e-6, 50000};
  /// Solve used for the final reconstruction.
  SolverConfig reconstruction{1e-9, 50000};
};

struct TonalResult {
  ConstraintSet b;
  PixelGrid u;
  double mse_before = 0.0;
  double mse_after = 0.0;
  std::vector<SolverReport> reports;
  /// Largest relative inner-solve residual per channel.
  std::vector<double> inner_residuals;
};

/// Least-squares optimisation of the stored values: min_b ||R b - f||^2 on
/// the mask support, per channel, starting from b0.
TonalResult tonal_optimise(const PixelGrid& f, const MaskSet& masks,
                           const ConstraintSet& b0, const TonalConfig& cfg = {});

}  // namespace gim
