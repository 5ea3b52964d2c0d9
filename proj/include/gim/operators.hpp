#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gim/errors.hpp"

namespace gim {

using Vector = Eigen::VectorXd;

struct GridGeometry {
  int width = 0;
  int height = 0;

  GridGeometry() = default;
  GridGeometry(int w, int h);

  Eigen::Index size() const { return Eigen::Index(width) * height; }
  Eigen::Index index(int x, int y) const { return Eigen::Index(y) * width + x; }
  int x_of(Eigen::Index j) const { return int(j % width); }
  int y_of(Eigen::Index j) const { return int(j / width); }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Linear feature operators A_i. Every operator maps a channel of N pixels to
/// N feature values, so each pixel can anchor one constraint row.
enum class FeatureKind { kDirichlet, kDerivX, kDerivY, kAvg2, kAvg16 };

inline constexpr std::array<FeatureKind, 5> kDefaultCatalogue = {
    FeatureKind::kDirichlet, FeatureKind::kDerivX, FeatureKind::kDerivY,
    FeatureKind::kAvg2, FeatureKind::kAvg16};

std::string_view feature_name(FeatureKind kind);
std::optional<FeatureKind> parse_feature(std::string_view name);

/// Half-sample symmetric reflection of an index into [0, n).
inline int reflect_index(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

/// One row of A_i: the weighted pixels that produce feature value j.
/// Reflected samples that land on the same pixel appear repeatedly; callers
/// only ever accumulate, so duplicates are harmless.
template <typename Fn>
void for_each_stencil_entry(FeatureKind kind, const GridGeometry& geom,
                            Eigen::Index j, Fn&& fn) {
  const int x = geom.x_of(j);
  const int y = geom.y_of(j);
  switch (kind) {
    case FeatureKind::kDirichlet:
      fn(j, 1.0);
      return;
    case FeatureKind::kDerivX:
      if (x + 1 < geom.width) {
        fn(j + 1, 1.0);
        fn(j, -1.0);
      }
      return;
    case FeatureKind::kDerivY:
      if (y + 1 < geom.height) {
        fn(j + geom.width, 1.0);
        fn(j, -1.0);
      }
      return;
    case FeatureKind::kAvg2:
    case FeatureKind::kAvg16: {
      const int p = kind == FeatureKind::kAvg2 ? 2 : 16;
      const double weight = 1.0 / (double(p) * p);
      for (int dy = 0; dy < p; ++dy) {
        const Eigen::Index row = Eigen::Index(reflect_index(y + dy, geom.height)) * geom.width;
        for (int dx = 0; dx < p; ++dx) {
          fn(row + reflect_index(x + dx, geom.width), weight);
        }
      }
      return;
    }
  }
}

/// (A_i u)_j for a single row.
inline double feature_row_dot(FeatureKind kind, const GridGeometry& geom,
                              Eigen::Index j, const double* u) {
  double sum = 0.0;
  for_each_stencil_entry(kind, geom, j, [&](Eigen::Index k, double w) { sum += w * u[k]; });
  return sum;
}

/// out += scale * (row j of A_i)^T.
inline void feature_row_scatter(FeatureKind kind, const GridGeometry& geom,
                                Eigen::Index j, double scale, double* out) {
  for_each_stencil_entry(kind, geom, j,
                         [&](Eigen::Index k, double w) { out[k] += scale * w; });
}

/// Negated 5-point Laplacian with reflecting boundaries (h = 1).
Vector laplacian_apply(const GridGeometry& geom, const Vector& u);
void laplacian_apply(const GridGeometry& geom, const double* u, double* out);

Vector feature_apply(FeatureKind kind, const GridGeometry& geom, const Vector& u);
Vector feature_adjoint_apply(FeatureKind kind, const GridGeometry& geom, const Vector& v);

class MaskSet;

/// A = [C_1 A_1; ...; C_m A_m] applied to u (length m * N).
Vector stacked_apply(const MaskSet& masks, const Vector& u);
/// A^T lambda = sum_i A_i^T C_i lambda_i.
Vector stacked_adjoint_apply(const MaskSet& masks, const Vector& lambda);
/// [L u + A^T lambda; A u] for z = [u; lambda] of length N + m * N.
Vector saddle_apply(const MaskSet& masks, const Vector& z);

/// Matrix-free operator with an adjoint, in the shape used by the solvers.
template <typename Op>
concept LinearOperator = requires(const Op& op, const Vector& x) {
  { op.rows() } -> std::convertible_to<Eigen::Index>;
  { op.cols() } -> std::convertible_to<Eigen::Index>;
  { op.apply(x) } -> std::convertible_to<Vector>;
  { op.apply_adjoint(x) } -> std::convertible_to<Vector>;
};

/// Wraps a dense matrix; used by tests and small problems.
struct DenseOperator {
  Eigen::MatrixXd matrix;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  Vector apply(const Vector& x) const { return matrix * x; }
  Vector apply_adjoint(const Vector& y) const { return matrix.transpose() * y; }
};

struct FeatureOperator {
  FeatureKind kind;
  GridGeometry geom;

  Eigen::Index rows() const { return geom.size(); }
  Eigen::Index cols() const { return geom.size(); }
  Vector apply(const Vector& u) const { return feature_apply(kind, geom, u); }
  Vector apply_adjoint(const Vector& v) const { return feature_adjoint_apply(kind, geom, v); }
};

}  // namespace gim
