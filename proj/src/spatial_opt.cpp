#include "gim/spatial_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gim {

std::vector<Vector> error_maps(const PixelGrid& u, const PixelGrid& f,
                               const std::vector<FeatureKind>& catalogue) {
  if (!u.same_shape(f)) throw ValidationError("error_maps: grids differ in shape");
  const GridGeometry geom(u.width(), u.height());
  std::vector<Vector> maps(catalogue.size(), Vector::Zero(geom.size()));
  for (int c = 0; c < u.channels(); ++c) {
    const Vector diff = u.channel(c) - f.channel(c);
    for (std::size_t i = 0; i < catalogue.size(); ++i) {
      maps[i] += feature_apply(catalogue[i], geom, diff).cwiseAbs2();
    }
  }
  return maps;
}

VoronoiLabeling voronoi_partition(const GridGeometry& geom, std::vector<Site> sites) {
  if (sites.empty()) throw ValidationError("voronoi_partition: no sites");
  const int w = geom.width;
  const int h = geom.height;
  std::vector<std::uint8_t> taken(std::size_t(geom.size()), 0);
  for (const Site& s : sites) {
    if (s.x < 0 || s.x >= w || s.y < 0 || s.y >= h)
      throw ValidationError("voronoi_partition: site outside the grid");
    auto& t = taken[std::size_t(geom.index(s.x, s.y))];
    if (t) throw ValidationError("voronoi_partition: duplicate site");
    t = 1;
  }

  // Uniform buckets holding about one site each; site lists stay in index order.
  const int side = std::max(1, int(std::sqrt(double(geom.size()) / double(sites.size()))));
  const int bw = (w + side - 1) / side;
  const int bh = (h + side - 1) / side;
  std::vector<std::vector<int>> buckets(std::size_t(bw) * bh);
  for (int k = 0; k < int(sites.size()); ++k) {
    buckets[std::size_t(sites[k].y / side) * bw + sites[k].x / side].push_back(k);
  }
  const int max_ring = std::max(bw, bh);

  VoronoiLabeling out{std::move(sites), std::vector<int>(std::size_t(geom.size()), 0)};
  for (int y = 0; y < h; ++y) {
    const int cy = y / side;
    for (int x = 0; x < w; ++x) {
      const int cx = x / side;
      long long best = std::numeric_limits<long long>::max();
      int best_site = -1;
      auto visit = [&](int bx, int by) {
        if (bx < 0 || bx >= bw || by < 0 || by >= bh) return;
        for (int k : buckets[std::size_t(by) * bw + bx]) {
          const long long dx = out.sites[k].x - x;
          const long long dy = out.sites[k].y - y;
          const long long d = dx * dx + dy * dy;
          if (d < best || (d == best && k < best_site)) {
            best = d;
            best_site = k;
          }
        }
      };
      for (int r = 0; r <= max_ring; ++r) {
        if (r == 0) {
          visit(cx, cy);
        } else {
          for (int bx = cx - r; bx <= cx + r; ++bx) {
            visit(bx, cy - r);
            visit(bx, cy + r);
          }
          for (int by = cy - r + 1; by <= cy + r - 1; ++by) {
            visit(cx - r, by);
            visit(cx + r, by);
          }
        }
        // Any site in ring r + 1 is at least r * side + 1 away along one axis.
        const long long bound = (long long)r * side + 1;
        if (best_site >= 0 && bound * bound > best) break;
      }
      out.labels[std::size_t(geom.index(x, y))] = best_site;
    }
  }
  return out;
}

std::vector<CellScore> score_cells(const VoronoiLabeling& labeling, const std::vector<Vector>& maps) {
  const std::size_t cells = labeling.sites.size();
  const std::size_t m = maps.size();
  if (m == 0) throw ValidationError("score_cells: no error maps");
  for (const Vector& map : maps) {
    if (map.size() != Eigen::Index(labeling.labels.size()))
      throw ValidationError("score_cells: error map size mismatch");
  }

  std::vector<double> integrated(cells * m, 0.0);
  for (std::size_t j = 0; j < labeling.labels.size(); ++j) {
    const std::size_t cell = std::size_t(labeling.labels[j]);
    for (std::size_t i = 0; i < m; ++i) integrated[cell * m + i] += maps[i][Eigen::Index(j)];
  }

  std::vector<CellScore> scores(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    CellScore& s = scores[cell];
    s.cell = int(cell);
    s.best_feature = 0;
    s.integrated_error = integrated[cell * m];
    for (std::size_t i = 1; i < m; ++i) {
      if (integrated[cell * m + i] > s.integrated_error) {
        s.integrated_error = integrated[cell * m + i];
        s.best_feature = int(i);
      }
    }
    s.argmax_pixel = -1;
  }
  for (std::size_t j = 0; j < labeling.labels.size(); ++j) {
    CellScore& s = scores[std::size_t(labeling.labels[j])];
    const Vector& map = maps[std::size_t(s.best_feature)];
    if (s.argmax_pixel < 0 || map[Eigen::Index(j)] > map[s.argmax_pixel]) s.argmax_pixel = Eigen::Index(j);
  }
  return scores;
}

std::vector<MaskPoint> select_and_insert(const VoronoiLabeling& labeling,
                                         const std::vector<Vector>& maps, MaskSet& masks, int k) {
  if (k < 1) throw ValidationError("select_and_insert: k must be >= 1");
  if (int(maps.size()) != masks.feature_count())
    throw ValidationError("select_and_insert: one error map per feature required");
  if (Eigen::Index(labeling.labels.size()) != masks.geometry().size())
    throw ValidationError("select_and_insert: labeling does not match mask geometry");

  const std::vector<CellScore> scores = score_cells(labeling, maps);
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[std::size_t(a)].integrated_error > scores[std::size_t(b)].integrated_error;
  });

  // Pixels of each cell, ascending (counting sort on labels).
  const std::size_t cells = scores.size();
  std::vector<Eigen::Index> start(cells + 1, 0);
  for (int label : labeling.labels) ++start[std::size_t(label) + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<Eigen::Index> members(labeling.labels.size());
  {
    std::vector<Eigen::Index> fill(start.begin(), start.end() - 1);
    for (std::size_t j = 0; j < labeling.labels.size(); ++j)
      members[std::size_t(fill[std::size_t(labeling.labels[j])]++)] = Eigen::Index(j);
  }

  std::vector<MaskPoint> inserted;
  for (int cell : order) {
    if (int(inserted.size()) == k) break;
    const CellScore& s = scores[std::size_t(cell)];
    if (masks.insert(s.best_feature, s.argmax_pixel)) {
      inserted.push_back({s.best_feature, s.argmax_pixel});
      continue;
    }
    // Next-highest free pixel of the cell's feature.
    const Vector& map = maps[std::size_t(s.best_feature)];
    Eigen::Index pick = -1;
    for (Eigen::Index q = start[std::size_t(cell)]; q < start[std::size_t(cell) + 1]; ++q) {
      const Eigen::Index j = members[std::size_t(q)];
      if (masks.contains(s.best_feature, j)) continue;
      if (pick < 0 || map[j] > map[pick]) pick = j;
    }
    if (pick >= 0) {
      masks.insert(s.best_feature, pick);
      inserted.push_back({s.best_feature, pick});
    }
  }

  if (int(inserted.size()) < k) {
    // Fewer usable cells than requested points: take the largest remaining
    // pointwise errors over all free slots.
    struct Candidate {
      double error;
      int feature;
      Eigen::Index pixel;
    };
    std::vector<Candidate> free_slots;
    for (int i = 0; i < masks.feature_count(); ++i) {
      for (Eigen::Index j = 0; j < masks.geometry().size(); ++j) {
        if (!masks.contains(i, j)) free_slots.push_back({maps[std::size_t(i)][j], i, j});
      }
    }
    const std::size_t need = std::size_t(k) - inserted.size();
    if (free_slots.size() < need) throw ValidationError("select_and_insert: mask saturated");
    std::partial_sort(free_slots.begin(), free_slots.begin() + std::ptrdiff_t(need), free_slots.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.error != b.error) return a.error > b.error;
                        if (a.feature != b.feature) return a.feature < b.feature;
                        return a.pixel < b.pixel;
                      });
    for (std::size_t q = 0; q < need; ++q) {
      masks.insert(free_slots[q].feature, free_slots[q].pixel);
      inserted.push_back({free_slots[q].feature, free_slots[q].pixel});
    }
  }
  return inserted;
}

std::vector<Site> mask_sites(const MaskSet& masks) {
  const GridGeometry& geom = masks.geometry();
  std::vector<Site> sites;
  for (Eigen::Index j = 0; j < geom.size(); ++j) {
    for (int i = 0; i < masks.feature_count(); ++i) {
      if (masks.contains(i, j)) {
        sites.push_back({geom.x_of(j), geom.y_of(j)});
        break;
      }
    }
  }
  return sites;
}

void DensifyConfig::validate() const {
  solver.validate();
  if (iterations < 1) throw ValidationError("densify: iterations must be >= 1");
  if (target_points < iterations)
    throw ValidationError("densify: target point count must be at least the iteration count");
}

std::vector<Eigen::Index> insertion_schedule(const DensifyConfig& cfg) {
  cfg.validate();
  const Eigen::Index per = cfg.target_points / cfg.iterations;
  const Eigen::Index rem = cfg.target_points - per * cfg.iterations;
  std::vector<Eigen::Index> schedule(std::size_t(cfg.iterations), per);
  for (Eigen::Index t = cfg.iterations - rem; t < cfg.iterations; ++t) ++schedule[std::size_t(t)];
  return schedule;
}

std::vector<Eigen::Index> lattice_pixels(const GridGeometry& geom, Eigen::Index count) {
  if (count < 0 || count > geom.size()) throw ValidationError("lattice_pixels: count out of range");
  std::vector<Eigen::Index> out;
  if (count == 0) return out;
  const double w = geom.width;
  const double h = geom.height;
  const Eigen::Index cols =
      std::clamp<Eigen::Index>(std::llround(std::sqrt(double(count) * w / h)), 1, geom.width);
  const Eigen::Index rows = std::clamp<Eigen::Index>((count + cols - 1) / cols, 1, geom.height);
  out.reserve(std::size_t(count));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index in_row = (r + 1) * count / rows - r * count / rows;
    const int y = int((double(r) + 0.5) * h / double(rows));
    for (Eigen::Index q = 0; q < in_row; ++q) {
      const int x = int((double(q) + 0.5) * w / double(in_row));
      out.push_back(geom.index(x, y));
    }
  }
  return out;
}

namespace {

void seed_masks(MaskSet& masks, Eigen::Index count) {
  const GridGeometry& geom = masks.geometry();
  // Dirichlet first when available, then the rest of the catalogue in order.
  std::vector<int> order;
  const auto& cat = masks.catalogue();
  const auto dirichlet = std::find(cat.begin(), cat.end(), FeatureKind::kDirichlet);
  if (dirichlet != cat.end()) order.push_back(int(dirichlet - cat.begin()));
  for (int i = 0; i < masks.feature_count(); ++i) {
    if (std::find(order.begin(), order.end(), i) == order.end()) order.push_back(i);
  }
  for (int feature : order) {
    if (count == 0) break;
    const Eigen::Index here = std::min(count, geom.size());
    for (Eigen::Index j : lattice_pixels(geom, here)) masks.insert(feature, j);
    count -= here;
  }
}

ConstraintSet interpolating_values(const MaskSet& masks, const PixelGrid& f) {
  ConstraintSet b;
  for (int c = 0; c < f.channels(); ++c) b.push_back(build_b(masks, f.channel(c)));
  return b;
}

}  // namespace

DensifyResult densify(const PixelGrid& f, const std::vector<FeatureKind>& catalogue,
                      const DensifyConfig& cfg, DensifyObserver* observer) {
  const GridGeometry geom(f.width(), f.height());
  if (catalogue.empty()) throw ValidationError("densify: empty feature catalogue");
  if (cfg.target_points > geom.size() * Eigen::Index(catalogue.size()))
    throw ValidationError("densify: target exceeds the number of feature slots");
  const std::vector<Eigen::Index> schedule = insertion_schedule(cfg);

  DensifyResult result{MaskSet(geom, catalogue), {}, {}, {}, 0};
  seed_masks(result.masks, schedule[0]);

  for (int t = 1;; ++t) {
    result.b = interpolating_values(result.masks, f);
    InpaintResult solved = inpaint({result.masks, result.b, cfg.solver});
    ++result.inpaint_count;
    result.reconstruction = std::move(solved.u);

    DensifyTraceRow row;
    row.iteration = t;
    row.points_total = result.masks.total_points();
    for (int i = 0; i < result.masks.feature_count(); ++i)
      row.points_per_feature.push_back(result.masks.points_of(i));
    row.mse = mse(result.reconstruction, f).mse;
    result.trace.push_back(std::move(row));
    if (t == cfg.iterations) break;

    const std::vector<Vector> maps = error_maps(result.reconstruction, f, catalogue);
    const VoronoiLabeling labeling = voronoi_partition(geom, mask_sites(result.masks));
    if (observer) {
      observer->on_iteration(t, result.reconstruction, maps, labeling, score_cells(labeling, maps));
    }
    select_and_insert(labeling, maps, result.masks, int(schedule[std::size_t(t)]));
  }
  return result;
}

}  // namespace gim
