#pragma once

#include <array>
#include <span>

#include "histovote/labels.hpp"
#include "histovote/raster.hpp"
#include "histovote/tiler.hpp"

namespace histovote {

struct OverlayStyle {
  Rgb accepted_color{0, 200, 0};
  Rgb rejected_color{220, 0, 0};
  /// Indexed by ClassLabel; used for accepted boxes when predictions are supplied.
  std::array<Rgb, kNumClasses> class_colors{Rgb{40, 120, 255}, Rgb{0, 200, 200}, Rgb{255, 160, 0},
                                            Rgb{200, 0, 200}};
  int line_thickness = 2;
  int downscale = 4;

  /// Throws ConfigError unless downscale >= 1, thickness >= 1 and the colours are pairwise distinct.
  void validate() const;
};

/// Output pixel rectangle covering `region` after nearest-neighbour downscaling.
RegionRect scaled_box(const RegionRect& region, int downscale);

/// Downscaled copy (nearest-neighbour, ceil(dim / downscale)) with patch outlines: rejected candidates
/// in rejected_color, then selected patches in accepted_color or the colour of their predicted label.
/// `predictions`, when non-empty, parallels report.selected.
RgbRaster render_overlay(const RgbRaster& raster, const SelectionReport& report,
                         std::span<const ClassLabel> predictions, const OverlayStyle& style);

/// Same outlines drawn over the mask (bluish white, rest black).
RgbRaster render_mask_overlay(const BlueMask& mask, const SelectionReport& report, const OverlayStyle& style);

}  // namespace histovote
