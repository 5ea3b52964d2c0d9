#include "gim/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace gim {

PixelGrid::PixelGrid(int width, int height, int channels)
    : PixelGrid(width, height, channels,
                Eigen::VectorXd::Zero(Eigen::Index(width) * height * std::max(channels, 0))) {}

PixelGrid::PixelGrid(int width, int height, int channels, Eigen::VectorXd values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
  if (width < 1 || height < 1) throw ValidationError("grid dimensions must be >= 1");
  if (channels != 1 && channels != 3) throw ValidationError("channels must be 1 or 3");
  if (values_.size() != pixel_count() * channels)
    throw ValidationError("value count does not match width * height * channels");
}

namespace {

using Kind = PnmError::Kind;

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& data) : data_(data) {}

  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      value = value * 10 + (data_[pos_] - '0');
      if (value > 1'000'000'000L) throw PnmError(Kind::kMalformedHeader, std::string(field) + " too large");
      ++pos_;
    }
    if (pos_ == start) throw PnmError(Kind::kMalformedHeader, std::string("missing ") + field);
    return value;
  }

  // Exactly one whitespace byte separates the maxval from the payload.
  void single_whitespace() {
    if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_])))
      throw PnmError(Kind::kMalformedHeader, "missing whitespace after maxval");
    ++pos_;
  }

  std::size_t position() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

PixelGrid read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PnmError(Kind::kUnreadable, "cannot open " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6'))
    throw PnmError(Kind::kMalformedHeader, "not a binary P5/P6 file: " + path.string());
  const int channels = data[1] == '5' ? 1 : 3;

  HeaderReader header(data);
  header.advance(2);
  const long width = header.number("width");
  const long height = header.number("height");
  const long maxval = header.number("maxval");
  if (width < 1 || height < 1) throw PnmError(Kind::kMalformedHeader, "zero image dimension");
  if (maxval != 255)
    throw PnmError(Kind::kUnsupportedMaxval, "unsupported maxval " + std::to_string(maxval));
  header.single_whitespace();

  const std::size_t n = std::size_t(width) * std::size_t(height);
  const std::size_t payload = n * std::size_t(channels);
  if (data.size() - header.position() < payload)
    throw PnmError(Kind::kTruncatedPayload,
                   "truncated payload: expected " + std::to_string(payload) + " bytes, got " +
                       std::to_string(data.size() - header.position()));

  PixelGrid grid(int(width), int(height), channels);
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data() + header.position());
  for (std::size_t j = 0; j < n; ++j) {
    for (int c = 0; c < channels; ++c) {
      grid.values()[Eigen::Index(c * n + j)] = bytes[j * channels + c];
    }
  }
  return grid;
}

namespace {
unsigned char to_byte(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<unsigned char>(std::round(v));
}
}  // namespace

void write_pnm(const PixelGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const int channels = grid.channels();
  out << (channels == 1 ? "P5" : "P6") << '\n'
      << grid.width() << ' ' << grid.height() << '\n'
      << 255 << '\n';
  const Eigen::Index n = grid.pixel_count();
  std::string payload(std::size_t(n * channels), '\0');
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int c = 0; c < channels; ++c) {
      payload[std::size_t(j * channels + c)] = char(to_byte(grid.values()[c * n + j]));
    }
  }
  out.write(payload.data(), std::streamsize(payload.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ErrorReport mse(const PixelGrid& u, const PixelGrid& f) {
  if (!u.same_shape(f)) throw ValidationError("mse: grids differ in shape");
  ErrorReport report;
  const double n = double(u.pixel_count());
  double total = 0.0;
  for (int c = 0; c < u.channels(); ++c) {
    const double sq = (u.channel(c) - f.channel(c)).squaredNorm();
    report.per_channel_mse.push_back(sq / n);
    total += sq;
  }
  report.mse = total / (n * u.channels());
  return report;
}

}  // namespace gim
