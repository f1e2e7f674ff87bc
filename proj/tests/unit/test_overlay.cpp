#include <doctest.h>

#include <histovote/bluemask.hpp>
#include <histovote/errors.hpp>
#include <histovote/overlay.hpp>

#include "test_support.hpp"

using namespace histovote;

namespace {

/// True when output pixel (px, py) lies on the t-thick outline of `region` downscaled by d.
bool on_outline(int px, int py, const RegionRect& region, int d, int t) {
  const int left = region.x / d, top = region.y / d;
  const int right = (region.x + region.w - 1) / d, bottom = (region.y + region.h - 1) / d;
  if (px < left || px > right || py < top || py > bottom) return false;
  return px < left + t || px > right - t || py < top + t || py > bottom - t;
}

SelectionReport report_with(int w, int h, std::vector<RegionRect> selected, std::vector<RegionRect> rejected = {}) {
  SelectionReport r;
  r.image_width = w;
  r.image_height = h;
  for (const auto& s : selected) {
    r.selected.push_back({s, 0.5, {}});
    r.candidates.push_back({s, 0.5, {}});
  }
  for (const auto& s : rejected) r.candidates.push_back({s, 0.0, {}});
  return r;
}

int count_color(const RgbRaster& r, Rgb c) {
  int n = 0;
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) n += r.at(x, y) == c;
  return n;
}

}  // namespace

TEST_SUITE("overlay") {

TEST_CASE("output size is the ceiling of input over downscale") {
  OverlayStyle s;
  const SelectionReport empty = report_with(2048, 1536, {});
  const RgbRaster a = render_overlay(RgbRaster(2048, 1536), empty, {}, s);
  CHECK(a.width() == 512);
  CHECK(a.height() == 384);
  const RgbRaster b = render_overlay(RgbRaster(2049, 1537), report_with(2049, 1537, {}), {}, s);
  CHECK(b.width() == 513);
  CHECK(b.height() == 385);
  s.downscale = 3;
  const RgbRaster c = render_overlay(RgbRaster(10, 7), report_with(10, 7, {}), {}, s);
  CHECK(c.width() == 4);
  CHECK(c.height() == 3);
  s.downscale = 1;
  CHECK(render_overlay(RgbRaster(10, 7), report_with(10, 7, {}), {}, s).width() == 10);
}

TEST_CASE("box pixels match the geometry oracle") {
  for (int d : {1, 3, 4}) {
    for (int t : {1, 2}) {
      OverlayStyle s;
      s.downscale = d;
      s.line_thickness = t;
      const std::vector<RegionRect> boxes{{0, 0, 299, 299}, {447, 149, 299, 299}, {1043, 596, 299, 299}};
      const SelectionReport rep = report_with(1400, 900, boxes);
      const RgbRaster out = render_overlay(RgbRaster(1400, 900), rep, {}, s);
      int mismatches = 0;
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
          bool expect = false;
          for (const auto& b : boxes) expect = expect || on_outline(x, y, b, d, t);
          if ((out.at(x, y) == s.accepted_color) != expect) ++mismatches;
        }
      CHECK_MESSAGE(mismatches == 0, "downscale " << d << " thickness " << t);
      CHECK(scaled_box({447, 149, 299, 299}, 4) == RegionRect{111, 37, 76, 75});
    }
  }
}

TEST_CASE("pixels off the outlines are the downscaled source") {
  std::mt19937_64 rng(3);
  const RgbRaster src = testing::random_raster(rng, 900, 700);
  OverlayStyle s;
  const std::vector<RegionRect> sel{{149, 149, 299, 299}};
  const std::vector<RegionRect> rej{{447, 298, 299, 299}};
  const RgbRaster out = render_overlay(src, report_with(900, 700, sel, rej), {}, s);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      if (on_outline(x, y, sel[0], 4, 2) || on_outline(x, y, rej[0], 4, 2)) continue;
      REQUIRE(out.at(x, y) == src.at(4 * x, 4 * y));
    }
}

TEST_CASE("fallback selection draws exactly one accepted box") {
  const RgbRaster white(2048, 1536, {255, 255, 255});
  const MaskConfig cfg;
  const BlueMask mask = compute_blue_mask(white, cfg);
  const SelectionReport rep = select_patches(white, mask, cfg);
  REQUIRE(rep.fallback);
  const OverlayStyle s;
  const RgbRaster out = render_overlay(white, rep, {}, s);
  int expected = 0;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) expected += on_outline(x, y, rep.selected[0].origin, 4, 2);
  CHECK(count_color(out, s.accepted_color) == expected);
  CHECK(count_color(out, s.rejected_color) > 0);
  const RgbRaster mask_overlay = render_mask_overlay(mask, rep, s);
  CHECK(count_color(mask_overlay, s.accepted_color) == expected);
}

TEST_CASE("empty selection shows only rejected boxes") {
  const OverlayStyle s;
  const RgbRaster out = render_overlay(RgbRaster(700, 700), report_with(700, 700, {}, {{0, 0, 299, 299}, {149, 149, 299, 299}}), {}, s);
  CHECK(count_color(out, s.accepted_color) == 0);
  CHECK(count_color(out, s.rejected_color) > 0);
}

TEST_CASE("predictions colour accepted boxes by class") {
  const OverlayStyle s;
  const std::vector<ClassLabel> preds{ClassLabel::InSitu};
  const RgbRaster out = render_overlay(RgbRaster(400, 400), report_with(400, 400, {{0, 0, 299, 299}}), preds, s);
  CHECK(count_color(out, s.class_colors[index_of(ClassLabel::InSitu)]) > 0);
  CHECK(count_color(out, s.accepted_color) == 0);
}

TEST_CASE("mask overlay is white on black") {
  BlueMask m(8, 8);
  m.set(0, 0, true);
  OverlayStyle s;
  s.downscale = 1;
  const RgbRaster out = render_mask_overlay(m, report_with(8, 8, {}), s);
  CHECK(out.at(0, 0) == Rgb{255, 255, 255});
  CHECK(out.at(1, 1) == Rgb{0, 0, 0});
}

TEST_CASE("consistency and style errors") {
  const OverlayStyle s;
  CHECK_THROWS_AS(render_overlay(RgbRaster(400, 400), report_with(401, 400, {}), {}, s), ConsistencyError);
  const std::vector<ClassLabel> two{ClassLabel::Normal, ClassLabel::Benign};
  CHECK_THROWS_AS(render_overlay(RgbRaster(400, 400), report_with(400, 400, {{0, 0, 299, 299}}), two, s),
                  ConsistencyError);
  CHECK_THROWS_AS(render_mask_overlay(BlueMask(5, 5), report_with(6, 5, {}), s), ConsistencyError);
  OverlayStyle bad;
  bad.downscale = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.line_thickness = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.rejected_color = bad.accepted_color;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

}
