#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

#include "gim/errors.hpp"

namespace gim {

/// Multi-channel raster on the 0..255 intensity scale.
///
/// Values are channel-planar: channel c occupies the contiguous block
/// [c * N, (c + 1) * N) with N = width * height, and pixel j of a channel
/// sits at (x, y) = (j % width, j / width).
class PixelGrid {
 public:
  PixelGrid() = default;
  PixelGrid(int width, int height, int channels);
  PixelGrid(int width, int height, int channels, Eigen::VectorXd values);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Eigen::Index pixel_count() const { return Eigen::Index(width_) * height_; }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  auto channel(int c) { return values_.segment(c * pixel_count(), pixel_count()); }
  auto channel(int c) const {
    return values_.segment(c * pixel_count(), pixel_count());
  }

  double& at(int x, int y, int c = 0) {
    return values_[c * pixel_count() + Eigen::Index(y) * width_ + x];
  }
  double at(int x, int y, int c = 0) const {
    return values_[c * pixel_count() + Eigen::Index(y) * width_ + x];
  }

  bool same_shape(const PixelGrid& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const PixelGrid& a, const PixelGrid& b) {
    return a.same_shape(b) && a.values_ == b.values_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  Eigen::VectorXd values_;
};

struct ErrorReport {
  double mse = 0.0;
  std::vector<double> per_channel_mse;
};

/// Defects reported by read_pnm.
class PnmError : public IoError {
 public:
  enum class Kind { kUnreadable, kMalformedHeader, kUnsupportedMaxval, kTruncatedPayload };
  PnmError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads a binary P5 (greyscale) or P6 (RGB) file with maxval 255.
PixelGrid read_pnm(const std::filesystem::path& path);

/// Writes P5 or P6 depending on the channel count. Values are clamped to
/// [0, 255] and rounded half away from zero.
void write_pnm(const PixelGrid& grid, const std::filesystem::path& path);

/// Mean squared error over all pixels and channels.
ErrorReport mse(const PixelGrid& u, const PixelGrid& f);

}  // namespace gim
