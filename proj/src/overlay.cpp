#include "histovote/overlay.hpp"

#include <algorithm>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

void OverlayStyle::validate() const {
  if (downscale < 1) throw ConfigError("overlay downscale must be >= 1");
  if (line_thickness < 1) throw ConfigError("overlay line thickness must be >= 1");
  std::vector<Rgb> colors{accepted_color, rejected_color};
  colors.insert(colors.end(), class_colors.begin(), class_colors.end());
  for (std::size_t i = 0; i < colors.size(); ++i) {
    for (std::size_t j = i + 1; j < colors.size(); ++j) {
      if (colors[i] == colors[j]) throw ConfigError("overlay colours must be pairwise distinct");
    }
  }
}

RegionRect scaled_box(const RegionRect& region, int downscale) {
  const int x0 = region.x / downscale;
  const int y0 = region.y / downscale;
  const int x1 = (region.x + region.w - 1) / downscale;
  const int y1 = (region.y + region.h - 1) / downscale;
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

namespace {

RgbRaster downscale_nearest(const RgbRaster& in, int d) {
  const int w = (in.width() + d - 1) / d;
  const int h = (in.height() + d - 1) / d;
  RgbRaster out(w, h, {}, in.pixel_pitch_um() * d);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.set(x, y, in.at(x * d, y * d));
  }
  return out;
}

void draw_outline(RgbRaster& canvas, const RegionRect& box, int thickness, Rgb color) {
  const int x_end = std::min(box.x + box.w, canvas.width());
  const int y_end = std::min(box.y + box.h, canvas.height());
  for (int y = box.y; y < y_end; ++y) {
    for (int x = box.x; x < x_end; ++x) {
      const bool edge = x - box.x < thickness || box.x + box.w - 1 - x < thickness || y - box.y < thickness ||
                        box.y + box.h - 1 - y < thickness;
      if (edge) canvas.set(x, y, color);
    }
  }
}

void draw_report(RgbRaster& canvas, const SelectionReport& report, std::span<const ClassLabel> predictions,
                 const OverlayStyle& style) {
  if (!predictions.empty() && predictions.size() != report.selected.size()) {
    throw ConsistencyError("got " + std::to_string(predictions.size()) + " predictions for " +
                           std::to_string(report.selected.size()) + " selected patches");
  }
  const auto is_selected = [&](const PatchSpec& c) {
    return std::any_of(report.selected.begin(), report.selected.end(),
                       [&](const PatchSpec& s) { return s.origin == c.origin; });
  };
  for (const auto& c : report.candidates) {
    if (!is_selected(c)) draw_outline(canvas, scaled_box(c.origin, style.downscale), style.line_thickness, style.rejected_color);
  }
  for (std::size_t i = 0; i < report.selected.size(); ++i) {
    const Rgb color = predictions.empty() ? style.accepted_color : style.class_colors[index_of(predictions[i])];
    draw_outline(canvas, scaled_box(report.selected[i].origin, style.downscale), style.line_thickness, color);
  }
}

void require_matching(const SelectionReport& report, int width, int height) {
  if (report.image_width != width || report.image_height != height) {
    std::ostringstream os;
    os << "selection report is for a " << report.image_width << "x" << report.image_height << " image, not " << width
       << "x" << height;
    throw ConsistencyError(os.str());
  }
}

}  // namespace

RgbRaster render_overlay(const RgbRaster& raster, const SelectionReport& report,
                         std::span<const ClassLabel> predictions, const OverlayStyle& style) {
  style.validate();
  require_matching(report, raster.width(), raster.height());
  RgbRaster canvas = downscale_nearest(raster, style.downscale);
  draw_report(canvas, report, predictions, style);
  return canvas;
}

RgbRaster render_mask_overlay(const BlueMask& mask, const SelectionReport& report, const OverlayStyle& style) {
  style.validate();
  require_matching(report, mask.width(), mask.height());
  const Plane grey = mask.bits().cast<std::uint8_t>() * std::uint8_t{255};
  RgbRaster canvas = downscale_nearest(RgbRaster(grey, grey, grey), style.downscale);
  draw_report(canvas, report, {}, style);
  return canvas;
}

}  // namespace histovote
