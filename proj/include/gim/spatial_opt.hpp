#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gim/image.hpp"
#include "gim/inpaint.hpp"
#include "gim/masks.hpp"

namespace gim {

/// map_i(j) = sum over channels of (A_i (u - f))_j^2.
std::vector<Vector> error_maps(const PixelGrid& u, const PixelGrid& f,
                               const std::vector<FeatureKind>& catalogue);

struct Site {
  int x = 0;
  int y = 0;
};

struct VoronoiLabeling {
  std::vector<Site> sites;
  /// Per pixel: index of the nearest site, lowest index on ties.
  std::vector<int> labels;
};

/// Exact nearest-site labeling in squared Euclidean pixel distance.
/// Sites must be distinct.
VoronoiLabeling voronoi_partition(const GridGeometry& geom, std::vector<Site> sites);

struct CellScore {
  int cell = 0;
  int best_feature = 0;
  double integrated_error = 0.0;
  Eigen::Index argmax_pixel = 0;
};

/// Per-cell best feature and integrated error. Ties go to the lowest feature
/// index; argmax_pixel ties to the lowest pixel index.
std::vector<CellScore> score_cells(const VoronoiLabeling& labeling,
                                   const std::vector<Vector>& maps);

/// Inserts k points into the highest-scoring cells (one per cell) and returns
/// them. Occupied slots fall back to the cell's next-best pixel; exhausted
/// cells are skipped. Throws ValidationError if no free slot is left.
std::vector<MaskPoint> select_and_insert(const VoronoiLabeling& labeling,
                                         const std::vector<Vector>& maps,
                                         MaskSet& masks, int k);

/// Distinct mask pixels in ascending pixel order.
std::vector<Site> mask_sites(const MaskSet& masks);

struct DensifyConfig {
  Eigen::Index target_points = 0;
  int iterations = 30;
  SolverConfig solver;

  void validate() const;
};

/// Number of points added in each iteration; sums to target_points.
std::vector<Eigen::Index> insertion_schedule(const DensifyConfig& cfg);

/// Deterministic near-square lattice of `count` pixels (count <= N).
std::vector<Eigen::Index> lattice_pixels(const GridGeometry& geom, Eigen::Index count);

struct DensifyTraceRow {
  int iteration = 0;
  Eigen::Index points_total = 0;
  std::vector<Eigen::Index> points_per_feature;
  double mse = 0.0;
};

struct DensifyResult {
  MaskSet masks;
  ConstraintSet b;
  PixelGrid reconstruction;
  std::vector<DensifyTraceRow> trace;
  int inpaint_count = 0;
};

/// Optional hook to observe each iteration (e.g. to emit debug maps).
struct DensifyObserver {
  virtual ~DensifyObserver() = default;
  virtual void on_iteration(int iteration, const PixelGrid& u,
                            const std::vector<Vector>& maps,
                            const VoronoiLabeling& labeling,
                            const std::vector<CellScore>& scores) = 0;
};

/// Voronoi densification: n inpaintings, each followed by error-map guided
/// insertion except the last, which yields the final reconstruction.
DensifyResult densify(const PixelGrid& f, const std::vector<FeatureKind>& catalogue,
                      const DensifyConfig& cfg, DensifyObserver* observer = nullptr);

}  // namespace gim
