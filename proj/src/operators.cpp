#include "gim/operators.hpp"

#include <string>

#include "gim/masks.hpp"

namespace gim {

GridGeometry::GridGeometry(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1) throw ValidationError("grid geometry must be at least 1x1");
}

std::string_view feature_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kDirichlet: return "dirichlet";
    case FeatureKind::kDerivX: return "dx";
    case FeatureKind::kDerivY: return "dy";
    case FeatureKind::kAvg2: return "avg2";
    case FeatureKind::kAvg16: return "avg16";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature(std::string_view name) {
  for (FeatureKind kind : kDefaultCatalogue) {
    if (feature_name(kind) == name) return kind;
  }
  return std::nullopt;
}

namespace {
void check_length(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw ValidationError(std::string(what) + ": expected length " + std::to_string(expected) +
                          ", got " + std::to_string(v.size()));
  }
}
}  // namespace

void laplacian_apply(const GridGeometry& geom, const double* u, double* out) {
  const int w = geom.width;
  const int h = geom.height;
  // A missing neighbour mirrors the centre and contributes nothing, so each
  // row is c * (number of neighbours) minus the neighbours present.
  for (int y = 0; y < h; ++y) {
    const double* row = u + Eigen::Index(y) * w;
    const double* up = y > 0 ? row - w : nullptr;
    const double* down = y + 1 < h ? row + w : nullptr;
    double* o = out + Eigen::Index(y) * w;
    const double vertical = double(int(up != nullptr) + int(down != nullptr));
    if (w == 1) {
      o[0] = vertical * row[0] - (up ? up[0] : 0.0) - (down ? down[0] : 0.0);
      continue;
    }
    o[0] = (1.0 + vertical) * row[0] - row[1];
    o[w - 1] = (1.0 + vertical) * row[w - 1] - row[w - 2];
    for (int x = 1; x + 1 < w; ++x) o[x] = (2.0 + vertical) * row[x] - row[x - 1] - row[x + 1];
    if (up) {
      for (int x = 0; x < w; ++x) o[x] -= up[x];
    }
    if (down) {
      for (int x = 0; x < w; ++x) o[x] -= down[x];
    }
  }
}

Vector laplacian_apply(const GridGeometry& geom, const Vector& u) {
  check_length(u, geom.size(), "laplacian_apply");
  Vector out(u.size());
  laplacian_apply(geom, u.data(), out.data());
  return out;
}

Vector feature_apply(FeatureKind kind, const GridGeometry& geom, const Vector& u) {
  check_length(u, geom.size(), "feature_apply");
  if (kind == FeatureKind::kDirichlet) return u;
  Vector out(u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j) out[j] = feature_row_dot(kind, geom, j, u.data());
  return out;
}

Vector feature_adjoint_apply(FeatureKind kind, const GridGeometry& geom, const Vector& v) {
  check_length(v, geom.size(), "feature_adjoint_apply");
  if (kind == FeatureKind::kDirichlet) return v;
  Vector out = Vector::Zero(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) feature_row_scatter(kind, geom, j, v[j], out.data());
  }
  return out;
}

Vector stacked_apply(const MaskSet& masks, const Vector& u) {
  const GridGeometry& geom = masks.geometry();
  const Eigen::Index n = geom.size();
  check_length(u, n, "stacked_apply");
  Vector out = Vector::Zero(n * masks.feature_count());
  for (int i = 0; i < masks.feature_count(); ++i) {
    const FeatureKind kind = masks.catalogue()[i];
    const auto grid = masks.grid(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (grid[j]) out[i * n + j] = feature_row_dot(kind, geom, j, u.data());
    }
  }
  return out;
}

Vector stacked_adjoint_apply(const MaskSet& masks, const Vector& lambda) {
  const GridGeometry& geom = masks.geometry();
  const Eigen::Index n = geom.size();
  check_length(lambda, n * masks.feature_count(), "stacked_adjoint_apply");
  Vector out = Vector::Zero(n);
  for (int i = 0; i < masks.feature_count(); ++i) {
    const FeatureKind kind = masks.catalogue()[i];
    const auto grid = masks.grid(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double l = lambda[i * n + j];
      if (grid[j] && l != 0.0) feature_row_scatter(kind, geom, j, l, out.data());
    }
  }
  return out;
}

Vector saddle_apply(const MaskSet& masks, const Vector& z) {
  const Eigen::Index n = masks.geometry().size();
  check_length(z, n + n * masks.feature_count(), "saddle_apply");
  Vector out(z.size());
  const Vector u = z.head(n);
  out.head(n) = laplacian_apply(masks.geometry(), u) + stacked_adjoint_apply(masks, z.tail(z.size() - n));
  out.tail(z.size() - n) = stacked_apply(masks, u);
  return out;
}

}  // namespace gim
