#pragma once

#include <vector>

#include "gim/image.hpp"
#include "gim/masks.hpp"
#include "gim/solvers.hpp"

namespace gim {

/// The saddle-point matrix [L A^T; A 0] restricted to the mask support:
/// unknowns are z = [u; lambda_K] with one multiplier per mask point.
/// Multipliers of non-mask rows of the full system never leave zero, so
/// this operator produces the same Krylov iterates as the full one.
class SaddleSystem {
 public:
  explicit SaddleSystem(const MaskSet& masks);

  const GridGeometry& geometry() const { return geom_; }
  const std::vector<MaskPoint>& points() const { return points_; }
  Eigen::Index pixel_count() const { return geom_.size(); }
  Eigen::Index constraint_count() const { return Eigen::Index(points_.size()); }
  Eigen::Index rows() const { return pixel_count() + constraint_count(); }
  Eigen::Index cols() const { return rows(); }

  Vector apply(const Vector& z) const;
  Vector apply_adjoint(const Vector& z) const { return apply(z); }

  /// A_K u, one value per mask point.
  Vector constrain(const Vector& u) const;
  /// A_K^T lambda.
  Vector constrain_adjoint(const Vector& lambda) const;

 private:
  GridGeometry geom_;
  std::vector<MaskPoint> points_;
  // Stencil of each constraint row: entries [row_start_[k], row_start_[k + 1]).
  std::vector<Eigen::Index> row_start_;
  std::vector<Eigen::Index> columns_;
  std::vector<double> weights_;
};

/// u = R b with b given on the mask support (length K), and R^T. Each
/// application is one SYMMLQ solve of the saddle system.
class ReconstructionOperator {
 public:
  ReconstructionOperator(const MaskSet& masks, SolverConfig cfg);

  Eigen::Index rows() const { return system_.pixel_count(); }
  Eigen::Index cols() const { return system_.constraint_count(); }

  Vector apply(const Vector& b_support) const;
  Vector apply_adjoint(const Vector& v) const;

  const SaddleSystem& system() const { return system_; }
  /// Report of the most recent inner solve.
  const SolverReport& last_report() const { return last_; }
  /// Largest relative residual ||M z - rhs|| / ||rhs|| seen in inner solves.
  double worst_inner_residual() const { return worst_residual_; }

 private:
  Vector solve(const Vector& rhs) const;

  SaddleSystem system_;
  SolverConfig cfg_;
  mutable SolverReport last_;
  mutable double worst_residual_ = 0.0;
};

struct InpaintProblem {
  MaskSet masks;
  ConstraintSet b;  // one entry per channel
  SolverConfig solver;
};

struct InpaintResult {
  PixelGrid u;
  std::vector<SolverReport> reports;
  /// ||A u - b|| per channel.
  std::vector<double> constraint_residuals;
};

/// Solves [L A^T; A 0][u; lambda] = [0; b] channel by channel.
InpaintResult inpaint(const InpaintProblem& problem);

/// u = R b (full-length b, feature-major).
Vector apply_R(const MaskSet& masks, const ConstraintVector& b, const SolverConfig& cfg);
/// R^T v: the multiplier block of the solve with right-hand side [v; 0],
/// zero off the mask support.
ConstraintVector apply_Rt(const MaskSet& masks, const Vector& v, const SolverConfig& cfg);

}  // namespace gim
