#include "gim/inpaint.hpp"

#include <algorithm>

namespace gim {

SaddleSystem::SaddleSystem(const MaskSet& masks) : geom_(masks.geometry()), points_(masks.points()) {
  row_start_.reserve(points_.size() + 1);
  row_start_.push_back(0);
  for (const MaskPoint& p : points_) {
    for_each_stencil_entry(masks.catalogue()[std::size_t(p.feature)], geom_, p.pixel,
                           [&](Eigen::Index col, double w) {
                             columns_.push_back(col);
                             weights_.push_back(w);
                           });
    row_start_.push_back(Eigen::Index(columns_.size()));
  }
}

Vector SaddleSystem::constrain(const Vector& u) const {
  Vector out(constraint_count());
  for (Eigen::Index k = 0; k < constraint_count(); ++k) {
    double sum = 0.0;
    for (Eigen::Index q = row_start_[std::size_t(k)]; q < row_start_[std::size_t(k) + 1]; ++q)
      sum += weights_[std::size_t(q)] * u[columns_[std::size_t(q)]];
    out[k] = sum;
  }
  return out;
}

Vector SaddleSystem::constrain_adjoint(const Vector& lambda) const {
  Vector out = Vector::Zero(pixel_count());
  for (Eigen::Index k = 0; k < constraint_count(); ++k) {
    for (Eigen::Index q = row_start_[std::size_t(k)]; q < row_start_[std::size_t(k) + 1]; ++q)
      out[columns_[std::size_t(q)]] += weights_[std::size_t(q)] * lambda[k];
  }
  return out;
}

Vector SaddleSystem::apply(const Vector& z) const {
  if (z.size() != rows()) throw ValidationError("saddle system: length mismatch");
  const Eigen::Index n = pixel_count();
  Vector out(rows());
  laplacian_apply(geom_, z.data(), out.data());
  const double* u = z.data();
  const double* lambda = z.data() + n;
  double* out_u = out.data();
  double* out_lambda = out.data() + n;
  const Eigen::Index* cols = columns_.data();
  const double* w = weights_.data();
  for (Eigen::Index k = 0; k < constraint_count(); ++k) {
    const Eigen::Index begin = row_start_[std::size_t(k)];
    const Eigen::Index end = row_start_[std::size_t(k) + 1];
    double sum = 0.0;
    const double scale = lambda[k];
    for (Eigen::Index q = begin; q < end; ++q) {
      sum += w[q] * u[cols[q]];
      out_u[cols[q]] += w[q] * scale;
    }
    out_lambda[k] = sum;
  }
  return out;
}

ReconstructionOperator::ReconstructionOperator(const MaskSet& masks, SolverConfig cfg)
    : system_(masks), cfg_(cfg) {
  if (masks.total_points() == 0) throw ValidationError("reconstruction needs at least one mask point");
}

Vector ReconstructionOperator::solve(const Vector& rhs) const {
  auto result = symmlq<double>([this](const Vector& z) { return system_.apply(z); }, rhs,
                               Vector::Zero(rhs.size()), cfg_);
  last_ = result.report;
  const double scale = rhs.norm();
  if (scale > 0.0) {
    worst_residual_ = std::max(worst_residual_, (system_.apply(result.x) - rhs).norm() / scale);
  }
  return std::move(result.x);
}

Vector ReconstructionOperator::apply(const Vector& b_support) const {
  if (b_support.size() != cols()) throw ValidationError("R: length mismatch");
  Vector rhs = Vector::Zero(system_.rows());
  rhs.tail(cols()) = b_support;
  return solve(rhs).head(rows());
}

Vector ReconstructionOperator::apply_adjoint(const Vector& v) const {
  if (v.size() != rows()) throw ValidationError("R^T: length mismatch");
  Vector rhs = Vector::Zero(system_.rows());
  rhs.head(rows()) = v;
  return solve(rhs).tail(cols());
}

InpaintResult inpaint(const InpaintProblem& problem) {
  const MaskSet& masks = problem.masks;
  if (masks.total_points() == 0) throw ValidationError("inpaint: mask is empty");
  const int channels = int(problem.b.size());
  if (channels != 1 && channels != 3) throw ValidationError("inpaint: need 1 or 3 channels of values");

  const GridGeometry& geom = masks.geometry();
  const ReconstructionOperator reconstruct(masks, problem.solver);
  InpaintResult result{PixelGrid(geom.width, geom.height, channels), {}, {}};
  for (int c = 0; c < channels; ++c) {
    const Vector b = compress(masks, problem.b[std::size_t(c)]);
    result.u.channel(c) = reconstruct.apply(b);
    result.reports.push_back(reconstruct.last_report());
    result.constraint_residuals.push_back(
        (reconstruct.system().constrain(result.u.channel(c)) - b).norm());
  }
  return result;
}

Vector apply_R(const MaskSet& masks, const ConstraintVector& b, const SolverConfig& cfg) {
  return ReconstructionOperator(masks, cfg).apply(compress(masks, b));
}

ConstraintVector apply_Rt(const MaskSet& masks, const Vector& v, const SolverConfig& cfg) {
  if (v.size() != masks.geometry().size()) throw ValidationError("apply_Rt: length mismatch");
  return expand(masks, ReconstructionOperator(masks, cfg).apply_adjoint(v));
}

}  // namespace gim
