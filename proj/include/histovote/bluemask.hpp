#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "histovote/raster.hpp"

namespace histovote {

/// Thresholds of the nuclei-density selection policy.
struct MaskConfig {
  double ratio_threshold = 1.587;
  double patch_blue_min = 0.02;
  /// Lower bounds of the keep-all, top-N1 and top-N2 tiers, strictly decreasing.
  std::array<double, 3> image_tier_bounds{0.01, 0.005, 0.001};
  /// Patch caps for the three capped tiers, strictly decreasing.
  std::array<int, 3> tier_counts{10, 5, 1};

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  friend bool operator==(const MaskConfig&, const MaskConfig&) = default;
};

/// Element-wise bluish predicate `blue > threshold * red`, usable on any Eigen array expression.
/// The multiplication form is total at red == 0.
template <typename RedDerived, typename BlueDerived>
auto bluish(const Eigen::ArrayBase<RedDerived>& red, const Eigen::ArrayBase<BlueDerived>& blue,
            double threshold) {
  return blue.template cast<double>() > threshold * red.template cast<double>();
}

BlueMask compute_blue_mask(const RgbRaster& raster, const MaskConfig& config);

std::int64_t count_bluish(const BlueMask& mask, const RegionRect& region);

/// Fraction of bluish pixels inside `region`.
double blue_fraction(const BlueMask& mask, const RegionRect& region);
/// Whole-image metric.
double blue_fraction(const BlueMask& mask);

/// Summed-area table over a mask, for O(1) rectangle counts.
class BlueIntegral {
 public:
  explicit BlueIntegral(const BlueMask& mask);

  int width() const { return static_cast<int>(sums_.cols()) - 1; }
  int height() const { return static_cast<int>(sums_.rows()) - 1; }
  std::int64_t count(const RegionRect& region) const;

 private:
  Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sums_;
};

}  // namespace histovote
