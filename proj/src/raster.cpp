#include "histovote/raster.hpp"

#include <sstream>
#include <utility>

#include "histovote/errors.hpp"

namespace histovote {

std::string RegionRect::to_string() const {
  std::ostringstream os;
  os << "(x=" << x << ", y=" << y << ", w=" << w << ", h=" << h << ")";
  return os.str();
}

void require_inside(const RegionRect& region, int width, int height) {
  if (!region.fits_within(width, height)) {
    std::ostringstream os;
    os << "region " << region.to_string() << " is outside the " << width << "x" << height << " image";
    throw BoundsError(os.str());
  }
}

namespace {

void require_positive(int width, int height) {
  if (width <= 0 || height <= 0) {
    std::ostringstream os;
    os << "image dimensions must be positive, got " << width << "x" << height;
    throw DimensionError(os.str());
  }
}

}  // namespace

RgbRaster::RgbRaster(int width, int height, Rgb fill, double pixel_pitch_um) : pitch_um_(pixel_pitch_um) {
  require_positive(width, height);
  red_ = Plane::Constant(height, width, fill.r);
  green_ = Plane::Constant(height, width, fill.g);
  blue_ = Plane::Constant(height, width, fill.b);
}

RgbRaster::RgbRaster(Plane red, Plane green, Plane blue, double pixel_pitch_um)
    : red_(std::move(red)), green_(std::move(green)), blue_(std::move(blue)), pitch_um_(pixel_pitch_um) {
  require_positive(static_cast<int>(red_.cols()), static_cast<int>(red_.rows()));
  if (green_.rows() != red_.rows() || green_.cols() != red_.cols() || blue_.rows() != red_.rows() ||
      blue_.cols() != red_.cols()) {
    throw DimensionError("channel planes differ in size");
  }
}

const Plane& RgbRaster::channel(int c) const {
  switch (c) {
    case 0: return red_;
    case 1: return green_;
    case 2: return blue_;
  }
  throw BoundsError("channel index " + std::to_string(c) + " out of range");
}

Plane& RgbRaster::channel(int c) {
  return const_cast<Plane&>(std::as_const(*this).channel(c));
}

bool operator==(const RgbRaster& a, const RgbRaster& b) {
  return a.width() == b.width() && a.height() == b.height() && (a.red_ == b.red_).all() &&
         (a.green_ == b.green_).all() && (a.blue_ == b.blue_).all();
}

BlueMask::BlueMask(int width, int height, bool fill) {
  require_positive(width, height);
  bits_ = BitPlane::Constant(height, width, fill);
}

BlueMask::BlueMask(BitPlane bits) : bits_(std::move(bits)) {
  require_positive(static_cast<int>(bits_.cols()), static_cast<int>(bits_.rows()));
}

RgbRaster crop(const RgbRaster& raster, const RegionRect& region) {
  require_inside(region, raster.width(), raster.height());
  const auto block = [&](const Plane& p) -> Plane { return p.block(region.y, region.x, region.h, region.w); };
  return RgbRaster(block(raster.red()), block(raster.green()), block(raster.blue()), raster.pixel_pitch_um());
}

}  // namespace histovote
