#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gim/operators.hpp"

namespace gim {

/// One constraint row: feature slot `feature` (catalogue index) at `pixel`.
struct MaskPoint {
  int feature = 0;
  Eigen::Index pixel = 0;

  friend bool operator==(const MaskPoint&, const MaskPoint&) = default;
};

/// Per-feature inpainting masks C_1..C_m over one grid. A pixel may hold
/// points of several feature types, but each (feature, pixel) slot at most once.
class MaskSet {
 public:
  MaskSet() = default;
  MaskSet(GridGeometry geom, std::vector<FeatureKind> catalogue);

  const GridGeometry& geometry() const { return geom_; }
  const std::vector<FeatureKind>& catalogue() const { return catalogue_; }
  int feature_count() const { return int(catalogue_.size()); }

  bool contains(int feature, Eigen::Index pixel) const {
    return grids_[feature][pixel] != 0;
  }
  /// Returns false if the slot was already occupied.
  bool insert(int feature, Eigen::Index pixel);
  bool insert(const MaskPoint& p) { return insert(p.feature, p.pixel); }

  std::span<const std::uint8_t> grid(int feature) const { return grids_[feature]; }

  Eigen::Index total_points() const { return total_; }
  Eigen::Index points_of(int feature) const { return counts_[feature]; }
  /// Flat point list, feature-major and pixel-ascending.
  std::vector<MaskPoint> points() const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;

 private:
  void check_slot(int feature, Eigen::Index pixel) const;

  GridGeometry geom_;
  std::vector<FeatureKind> catalogue_;
  std::vector<std::vector<std::uint8_t>> grids_;
  std::vector<Eigen::Index> counts_;
  Eigen::Index total_ = 0;
};

/// Stacked right-hand side b of one channel; entry i * N + j belongs to
/// feature i at pixel j and is zero wherever the mask bit is zero.
using ConstraintVector = Vector;
/// One ConstraintVector per image channel.
using ConstraintSet = std::vector<ConstraintVector>;

/// Interpolating values b = A f.
ConstraintVector build_b(const MaskSet& masks, const Vector& f);

double mask_density(const MaskSet& masks);

/// Zeroes every entry of b whose mask bit is clear.
void restrict_to_support(const MaskSet& masks, ConstraintVector& b);

/// Gathers the entries of b at masks.points() into a vector of length
/// total_points(), and the inverse scatter.
Vector compress(const MaskSet& masks, const ConstraintVector& b);
ConstraintVector expand(const MaskSet& masks, const Vector& values);

struct MaskFile {
  MaskSet masks;
  ConstraintSet values;
};

/// Text format:
///   GIM1 <width> <height> <channels> <m> <kind,kind,...>
///   <feature> <x> <y> <v_1> [<v_2> <v_3>]
void save_masks(const MaskSet& masks, const ConstraintSet& b,
                const std::filesystem::path& path);
MaskFile load_masks(const std::filesystem::path& path);

/// Parse error carrying the offending 1-based line number.
class MaskParseError : public IoError {
 public:
  MaskParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace gim
