#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "histovote/bluemask.hpp"
#include "histovote/raster.hpp"

namespace histovote {

inline constexpr int kDefaultPatchSize = 299;
inline constexpr int kDefaultStride = 149;

struct GridGeometry {
  int patch_size = kDefaultPatchSize;
  int stride = kDefaultStride;

  void validate() const;
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

enum class Tier { KeepAll, Top10, Top5, Top1 };

std::string_view tier_name(Tier tier);
std::optional<Tier> parse_tier(std::string_view name);

struct GridIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct PatchSpec {
  RegionRect origin;
  double blue_density = 0.0;
  GridIndex grid;

  friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

struct SelectionReport {
  int image_width = 0;
  int image_height = 0;
  double image_blue_metric = 0.0;
  Tier tier = Tier::Top1;
  std::size_t candidates_total = 0;
  std::size_t candidates_qualified = 0;
  /// Set when no candidate passed the per-patch rule and the densest one was taken anyway.
  bool fallback = false;
  /// Sorted by density descending, ties by scan order.
  std::vector<PatchSpec> selected;
  /// Every grid candidate in scan order, for diagnostics.
  std::vector<PatchSpec> candidates;
};

/// Row-major grid of patch origins (r * stride, c * stride) that lie fully inside the image.
std::vector<RegionRect> grid_candidates(int width, int height, int patch_size = kDefaultPatchSize,
                                        int stride = kDefaultStride);

/// Maps an image-level blue metric to its tier. Intervals are upper-inclusive on the lower tier.
Tier tier_for_metric(double image_metric, const MaskConfig& config);

/// Patch cap for `tier`; nullopt for keep-all.
std::optional<std::size_t> tier_cap(Tier tier, const MaskConfig& config);

SelectionReport select_patches(const RgbRaster& raster, const BlueMask& mask, const MaskConfig& config,
                               const GridGeometry& grid = {});

/// Same policy, driven by the mask alone.
SelectionReport select_patches(const BlueMask& mask, const MaskConfig& config, const GridGeometry& grid = {});

}  // namespace histovote
