#include "histovote/tiler.hpp"

#include <algorithm>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

void GridGeometry::validate() const {
  if (patch_size < 1) throw ConfigError("patch_size must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
}

std::string_view tier_name(Tier tier) {
  switch (tier) {
    case Tier::KeepAll: return "keep_all";
    case Tier::Top10: return "top10";
    case Tier::Top5: return "top5";
    case Tier::Top1: return "top1";
  }
  return "unknown";
}

std::optional<Tier> parse_tier(std::string_view name) {
  for (Tier t : {Tier::KeepAll, Tier::Top10, Tier::Top5, Tier::Top1}) {
    if (tier_name(t) == name) return t;
  }
  return std::nullopt;
}

std::vector<RegionRect> grid_candidates(int width, int height, int patch_size, int stride) {
  if (patch_size < 1 || stride < 1) throw ConfigError("patch_size and stride must be >= 1");
  if (width < patch_size || height < patch_size) {
    std::ostringstream os;
    os << "image " << width << "x" << height << " is smaller than the " << patch_size << "px patch";
    throw TooSmallError(os.str());
  }
  const int cols = (width - patch_size) / stride + 1;
  const int rows = (height - patch_size) / stride + 1;
  std::vector<RegionRect> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back({c * stride, r * stride, patch_size, patch_size});
  }
  return out;
}

Tier tier_for_metric(double image_metric, const MaskConfig& config) {
  const auto& b = config.image_tier_bounds;
  if (image_metric > b[0]) return Tier::KeepAll;
  if (image_metric > b[1]) return Tier::Top10;
  if (image_metric > b[2]) return Tier::Top5;
  return Tier::Top1;
}

std::optional<std::size_t> tier_cap(Tier tier, const MaskConfig& config) {
  switch (tier) {
    case Tier::KeepAll: return std::nullopt;
    case Tier::Top10: return static_cast<std::size_t>(config.tier_counts[0]);
    case Tier::Top5: return static_cast<std::size_t>(config.tier_counts[1]);
    case Tier::Top1: return static_cast<std::size_t>(config.tier_counts[2]);
  }
  return std::nullopt;
}

SelectionReport select_patches(const RgbRaster& raster, const BlueMask& mask, const MaskConfig& config,
                               const GridGeometry& grid) {
  if (raster.width() != mask.width() || raster.height() != mask.height()) {
    std::ostringstream os;
    os << "mask " << mask.width() << "x" << mask.height() << " does not match raster " << raster.width() << "x"
       << raster.height();
    throw ConsistencyError(os.str());
  }
  return select_patches(mask, config, grid);
}

SelectionReport select_patches(const BlueMask& mask, const MaskConfig& config, const GridGeometry& grid) {
  const auto regions = grid_candidates(mask.width(), mask.height(), grid.patch_size, grid.stride);
  const BlueIntegral integral(mask);

  SelectionReport report;
  report.image_width = mask.width();
  report.image_height = mask.height();
  report.image_blue_metric = blue_fraction(mask);
  report.tier = tier_for_metric(report.image_blue_metric, config);
  report.candidates_total = regions.size();

  const int cols = (mask.width() - grid.patch_size) / grid.stride + 1;
  report.candidates.reserve(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    const double density = static_cast<double>(integral.count(r)) / static_cast<double>(r.area());
    report.candidates.push_back({r, density, {static_cast<int>(i) / cols, static_cast<int>(i) % cols}});
  }

  // Candidates are already in scan order, so a stable sort keeps the tie-break.
  const auto by_density = [](const PatchSpec& a, const PatchSpec& b) { return a.blue_density > b.blue_density; };
  std::vector<PatchSpec> qualified;
  for (const auto& c : report.candidates) {
    if (c.blue_density > config.patch_blue_min) qualified.push_back(c);
  }
  report.candidates_qualified = qualified.size();
  std::stable_sort(qualified.begin(), qualified.end(), by_density);

  if (qualified.empty()) {
    report.fallback = true;
    // max_element keeps the first maximum, i.e. the earliest in scan order.
    const auto best = std::max_element(report.candidates.begin(), report.candidates.end(),
                                       [](const PatchSpec& a, const PatchSpec& b) {
                                         return a.blue_density < b.blue_density;
                                       });
    report.selected.push_back(*best);
    return report;
  }

  if (const auto cap = tier_cap(report.tier, config); cap && qualified.size() > *cap) qualified.resize(*cap);
  report.selected = std::move(qualified);
  return report;
}

}  // namespace histovote
