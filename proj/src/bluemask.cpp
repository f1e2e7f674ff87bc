#include "histovote/bluemask.hpp"

#include <cmath>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

void MaskConfig::validate() const {
  std::ostringstream err;
  if (!(ratio_threshold > 0.0) || !std::isfinite(ratio_threshold)) err << "ratio_threshold must be > 0; ";
  if (!(patch_blue_min >= 0.0 && patch_blue_min <= 1.0)) err << "patch_blue_min must be in [0, 1]; ";
  for (std::size_t i = 0; i < image_tier_bounds.size(); ++i) {
    if (!(image_tier_bounds[i] > 0.0 && image_tier_bounds[i] < 1.0)) err << "image_tier_bounds must lie in (0, 1); ";
    if (i > 0 && !(image_tier_bounds[i] < image_tier_bounds[i - 1])) {
      err << "image_tier_bounds must be strictly decreasing; ";
    }
  }
  for (std::size_t i = 0; i < tier_counts.size(); ++i) {
    if (tier_counts[i] < 1) err << "tier_counts must be >= 1; ";
    if (i > 0 && !(tier_counts[i] < tier_counts[i - 1])) err << "tier_counts must be strictly decreasing; ";
  }
  if (const auto msg = err.str(); !msg.empty()) throw ConfigError("invalid mask config: " + msg);
}

BlueMask compute_blue_mask(const RgbRaster& raster, const MaskConfig& config) {
  return BlueMask(BitPlane(bluish(raster.red(), raster.blue(), config.ratio_threshold)));
}

std::int64_t count_bluish(const BlueMask& mask, const RegionRect& region) {
  require_inside(region, mask.width(), mask.height());
  return mask.bits().block(region.y, region.x, region.h, region.w).count();
}

double blue_fraction(const BlueMask& mask, const RegionRect& region) {
  const std::int64_t n = count_bluish(mask, region);
  if (region.area() == 0) throw BoundsError("empty region " + region.to_string());
  return static_cast<double>(n) / static_cast<double>(region.area());
}

double blue_fraction(const BlueMask& mask) { return blue_fraction(mask, {0, 0, mask.width(), mask.height()}); }

BlueIntegral::BlueIntegral(const BlueMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  sums_.setZero(h + 1, w + 1);
  for (int y = 0; y < h; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += mask.at(x, y) ? 1 : 0;
      sums_(y + 1, x + 1) = sums_(y, x + 1) + row;
    }
  }
}

std::int64_t BlueIntegral::count(const RegionRect& r) const {
  require_inside(r, width(), height());
  return sums_(r.y + r.h, r.x + r.w) - sums_(r.y, r.x + r.w) - sums_(r.y + r.h, r.x) + sums_(r.y, r.x);
}

}  // namespace histovote
