#include "gim/tonal_opt.hpp"

namespace gim {

TonalResult tonal_optimise(const PixelGrid& f, const MaskSet& masks, const ConstraintSet& b0,
                           const TonalConfig& cfg) {
  const GridGeometry& geom = masks.geometry();
  if (geom.width != f.width() || geom.height != f.height())
    throw ValidationError("tonal_optimise: mask geometry does not match the image");
  if (int(b0.size()) != f.channels())
    throw ValidationError("tonal_optimise: one constraint vector per channel required");
  if (masks.total_points() == 0) throw ValidationError("tonal_optimise: mask is empty");

  const ReconstructionOperator final_r(masks, cfg.reconstruction);

  TonalResult result;
  result.u = PixelGrid(f.width(), f.height(), f.channels());
  double sse_before = 0.0;
  double sse_after = 0.0;
  for (int c = 0; c < f.channels(); ++c) {
    const Vector target = f.channel(c);
    const Vector start = compress(masks, b0[std::size_t(c)]);
    const Vector u0 = final_r.apply(start);
    const double before = (u0 - target).squaredNorm();

    const ReconstructionOperator inner_r(masks, cfg.inner);
    auto solved = cgnr<double>([&](const Vector& b) { return inner_r.apply(b); },
                               [&](const Vector& v) { return inner_r.apply_adjoint(v); }, target,
                               start, cfg.outer);
    Vector u = final_r.apply(solved.x);
    double after = (u - target).squaredNorm();
    // Inexact inner solves can leave CGNR marginally above its start; never
    // return values worse than the ones we were given.
    if (after > before) {
      solved.x = start;
      u = u0;
      after = before;
    }

    result.b.push_back(expand(masks, solved.x));
    result.u.channel(c) = u;
    result.reports.push_back(std::move(solved.report));
    result.inner_residuals.push_back(inner_r.worst_inner_residual());
    sse_before += before;
    sse_after += after;
  }
  const double count = double(f.pixel_count()) * f.channels();
  result.mse_before = sse_before / count;
  result.mse_after = sse_after / count;
  return result;
}

}  // namespace gim
