#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histovote/raster.hpp"

namespace histovote {

/// Geometric augmentation applied to a square patch: flips, then shift, then rotation.
struct AugmentSpec {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  int shift_x = 0;
  int shift_y = 0;
  /// Counter-clockwise as displayed, in [-180, 180].
  double rotation_deg = 0.0;
  std::uint64_t seed = 0;

  bool is_identity() const {
    return !flip_horizontal && !flip_vertical && shift_x == 0 && shift_y == 0 && rotation_deg == 0.0;
  }
  /// Throws SpecError if the shift exceeds patch_size / 4 or the angle leaves [-180, 180].
  void validate(int patch_size) const;
};

RgbRaster flip_horizontal(const RgbRaster& patch);
RgbRaster flip_vertical(const RgbRaster& patch);
/// Exact counter-clockwise quarter turns of a square patch.
RgbRaster rotate_quarter_turns(const RgbRaster& patch, int turns);
/// Translates content by (dx, dy); uncovered pixels are filled by symmetric reflection.
RgbRaster shift_reflect(const RgbRaster& patch, int dx, int dy);
/// Rotation about the patch centre with bilinear resampling and reflect padding.
/// Multiples of 90 degrees take the exact permutation path.
RgbRaster rotate(const RgbRaster& patch, double degrees);

RgbRaster augment_patch(const RgbRaster& patch, const AugmentSpec& spec);

struct AugmentedVariant {
  std::string name;
  AugmentSpec spec;
  RgbRaster patch;
};

/// Eight variants: the four flip combinations, each without and with a seeded random
/// rotation and shift. A pure function of (patch, seed).
std::vector<AugmentedVariant> standard_augmentations(const RgbRaster& patch, std::uint64_t seed);

}  // namespace histovote
