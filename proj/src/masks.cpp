#include "gim/masks.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace gim {

MaskSet::MaskSet(GridGeometry geom, std::vector<FeatureKind> catalogue)
    : geom_(geom),
      catalogue_(std::move(catalogue)),
      grids_(catalogue_.size(), std::vector<std::uint8_t>(std::size_t(geom.size()), 0)),
      counts_(catalogue_.size(), 0) {
  if (geom_.size() < 1) throw ValidationError("mask geometry must be non-empty");
  if (catalogue_.empty()) throw ValidationError("feature catalogue must be non-empty");
}

void MaskSet::check_slot(int feature, Eigen::Index pixel) const {
  if (feature < 0 || feature >= feature_count())
    throw ValidationError("feature index out of range: " + std::to_string(feature));
  if (pixel < 0 || pixel >= geom_.size())
    throw ValidationError("pixel index out of range: " + std::to_string(pixel));
}

bool MaskSet::insert(int feature, Eigen::Index pixel) {
  check_slot(feature, pixel);
  auto& bit = grids_[feature][std::size_t(pixel)];
  if (bit) return false;
  bit = 1;
  ++counts_[feature];
  ++total_;
  return true;
}

std::vector<MaskPoint> MaskSet::points() const {
  std::vector<MaskPoint> out;
  out.reserve(std::size_t(total_));
  for (int i = 0; i < feature_count(); ++i) {
    for (Eigen::Index j = 0; j < geom_.size(); ++j) {
      if (grids_[i][std::size_t(j)]) out.push_back({i, j});
    }
  }
  return out;
}

ConstraintVector build_b(const MaskSet& masks, const Vector& f) {
  return stacked_apply(masks, f);
}

double mask_density(const MaskSet& masks) {
  return double(masks.total_points()) / double(masks.geometry().size());
}

void restrict_to_support(const MaskSet& masks, ConstraintVector& b) {
  const Eigen::Index n = masks.geometry().size();
  if (b.size() != n * masks.feature_count()) throw ValidationError("constraint vector length mismatch");
  for (int i = 0; i < masks.feature_count(); ++i) {
    const auto grid = masks.grid(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!grid[j]) b[i * n + j] = 0.0;
    }
  }
}

Vector compress(const MaskSet& masks, const ConstraintVector& b) {
  const Eigen::Index n = masks.geometry().size();
  if (b.size() != n * masks.feature_count()) throw ValidationError("constraint vector length mismatch");
  Vector out(masks.total_points());
  Eigen::Index k = 0;
  for (const MaskPoint& p : masks.points()) out[k++] = b[p.feature * n + p.pixel];
  return out;
}

ConstraintVector expand(const MaskSet& masks, const Vector& values) {
  const Eigen::Index n = masks.geometry().size();
  if (values.size() != masks.total_points()) throw ValidationError("support vector length mismatch");
  ConstraintVector out = ConstraintVector::Zero(n * masks.feature_count());
  Eigen::Index k = 0;
  for (const MaskPoint& p : masks.points()) out[p.feature * n + p.pixel] = values[k++];
  return out;
}

MaskParseError::MaskParseError(int line, const std::string& what)
    : IoError("mask file line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(std::string_view token, int line, const char* what) {
  T value{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw MaskParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  return value;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

void save_masks(const MaskSet& masks, const ConstraintSet& b, const std::filesystem::path& path) {
  const GridGeometry& geom = masks.geometry();
  const Eigen::Index n = geom.size();
  if (b.empty() || (b.size() != 1 && b.size() != 3))
    throw ValidationError("save_masks: need values for 1 or 3 channels");
  for (const auto& channel : b) {
    if (channel.size() != n * masks.feature_count())
      throw ValidationError("save_masks: constraint vector length mismatch");
  }

  std::string text = "GIM1 " + std::to_string(geom.width) + ' ' + std::to_string(geom.height) +
                     ' ' + std::to_string(b.size()) + ' ' + std::to_string(masks.feature_count()) + ' ';
  for (int i = 0; i < masks.feature_count(); ++i) {
    if (i) text += ',';
    text += feature_name(masks.catalogue()[i]);
  }
  text += '\n';
  for (const MaskPoint& p : masks.points()) {
    text += std::to_string(p.feature) + ' ' + std::to_string(geom.x_of(p.pixel)) + ' ' +
            std::to_string(geom.y_of(p.pixel));
    for (const auto& channel : b) text += ' ' + format_double(channel[p.feature * n + p.pixel]);
    text += '\n';
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

MaskFile load_masks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw MaskParseError(1, "missing header");
  const auto header = split_ws(line);
  if (header.size() != 6 || header[0] != "GIM1")
    throw MaskParseError(1, "expected 'GIM1 <width> <height> <channels> <m> <kinds>'");
  const int width = parse_field<int>(header[1], 1, "width");
  const int height = parse_field<int>(header[2], 1, "height");
  const int channels = parse_field<int>(header[3], 1, "channel count");
  const int m = parse_field<int>(header[4], 1, "feature count");
  if (width < 1 || height < 1) throw MaskParseError(1, "non-positive geometry");
  if (channels != 1 && channels != 3) throw MaskParseError(1, "channels must be 1 or 3");

  std::vector<FeatureKind> catalogue;
  std::string_view kinds = header[5];
  while (!kinds.empty()) {
    const auto comma = kinds.find(',');
    const auto name = kinds.substr(0, comma);
    const auto kind = parse_feature(name);
    if (!kind) throw MaskParseError(1, "unknown feature kind '" + std::string(name) + "'");
    catalogue.push_back(*kind);
    kinds = comma == std::string_view::npos ? std::string_view{} : kinds.substr(comma + 1);
  }
  if (int(catalogue.size()) != m) throw MaskParseError(1, "feature count does not match kind list");

  MaskFile file{MaskSet(GridGeometry(width, height), catalogue), {}};
  const Eigen::Index n = file.masks.geometry().size();
  file.values.assign(std::size_t(channels), ConstraintVector::Zero(n * m));

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (int(fields.size()) != 3 + channels)
      throw MaskParseError(line_no, "expected " + std::to_string(3 + channels) + " fields");
    const int feature = parse_field<int>(fields[0], line_no, "feature id");
    const int x = parse_field<int>(fields[1], line_no, "x");
    const int y = parse_field<int>(fields[2], line_no, "y");
    if (feature < 0 || feature >= m) throw MaskParseError(line_no, "feature id out of range");
    if (x < 0 || x >= width || y < 0 || y >= height)
      throw MaskParseError(line_no, "coordinates outside the grid");
    const Eigen::Index pixel = file.masks.geometry().index(x, y);
    if (!file.masks.insert(feature, pixel)) throw MaskParseError(line_no, "duplicate mask point");
    for (int c = 0; c < channels; ++c) {
      file.values[std::size_t(c)][feature * n + pixel] =
          parse_field<double>(fields[std::size_t(3 + c)], line_no, "value");
    }
  }
  return file;
}

}  // namespace gim
