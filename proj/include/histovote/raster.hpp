#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace histovote {

/// One 8-bit colour channel, indexed (row = y, col = x).
using Plane = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BitPlane = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDefaultPixelPitchUm = 0.42;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RegionRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  std::int64_t area() const { return std::int64_t{w} * h; }
  bool fits_within(int width, int height) const {
    return x >= 0 && y >= 0 && w >= 0 && h >= 0 && x + w <= width && y + h <= height;
  }
  std::string to_string() const;

  friend bool operator==(const RegionRect&, const RegionRect&) = default;
};

/// Throws BoundsError naming the offending coordinates unless `region` lies inside width x height.
void require_inside(const RegionRect& region, int width, int height);

/// 8-bit RGB image stored as three planes. Width and height are always positive.
class RgbRaster {
 public:
  RgbRaster(int width, int height, Rgb fill = {}, double pixel_pitch_um = kDefaultPixelPitchUm);
  RgbRaster(Plane red, Plane green, Plane blue, double pixel_pitch_um = kDefaultPixelPitchUm);

  int width() const { return static_cast<int>(red_.cols()); }
  int height() const { return static_cast<int>(red_.rows()); }
  double pixel_pitch_um() const { return pitch_um_; }
  RegionRect bounds() const { return {0, 0, width(), height()}; }

  Rgb at(int x, int y) const { return {red_(y, x), green_(y, x), blue_(y, x)}; }
  void set(int x, int y, Rgb value) {
    red_(y, x) = value.r;
    green_(y, x) = value.g;
    blue_(y, x) = value.b;
  }

  const Plane& red() const { return red_; }
  const Plane& green() const { return green_; }
  const Plane& blue() const { return blue_; }
  const Plane& channel(int c) const;
  Plane& channel(int c);

  /// Pixel equality; the pitch is metadata and does not participate.
  friend bool operator==(const RgbRaster& a, const RgbRaster& b);

 private:
  Plane red_;
  Plane green_;
  Plane blue_;
  double pitch_um_;
};

/// Boolean raster of bluish pixels, same geometry as its source raster.
class BlueMask {
 public:
  BlueMask(int width, int height, bool fill = false);
  explicit BlueMask(BitPlane bits);

  int width() const { return static_cast<int>(bits_.cols()); }
  int height() const { return static_cast<int>(bits_.rows()); }
  bool at(int x, int y) const { return bits_(y, x); }
  void set(int x, int y, bool value) { bits_(y, x) = value; }
  const BitPlane& bits() const { return bits_; }
  std::int64_t count() const { return bits_.count(); }

  friend bool operator==(const BlueMask& a, const BlueMask& b) {
    return a.width() == b.width() && a.height() == b.height() && (a.bits_ == b.bits_).all();
  }

 private:
  BitPlane bits_;
};

/// Returns the w x h sub-image whose pixel (i, j) is source pixel (x + i, y + j).
RgbRaster crop(const RgbRaster& raster, const RegionRect& region);

}  // namespace histovote
