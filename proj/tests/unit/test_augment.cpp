#include <doctest.h>

#include <histovote/augment.hpp>
#include <histovote/errors.hpp>

#include <set>

#include "test_support.hpp"

using namespace histovote;

namespace {

RgbRaster patch_of(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  return testing::random_raster(rng, n, n);
}

/// Forward-mapped counter-clockwise quarter turn: source (x, y) lands on (y, n - 1 - x).
RgbRaster quarter_turn_oracle(const RgbRaster& in) {
  const int n = in.width();
  RgbRaster out(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) out.set(y, n - 1 - x, in.at(x, y));
  return out;
}

int max_abs_diff(const RgbRaster& a, const RgbRaster& b) {
  int m = 0;
  for (int c = 0; c < 3; ++c)
    m = std::max(m, static_cast<int>((a.channel(c).cast<int>() - b.channel(c).cast<int>()).abs().maxCoeff()));
  return m;
}

std::uint64_t content_hash(const RgbRaster& r) {
  std::uint64_t h = 1469598103934665603ull;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < r.height(); ++y)
      for (int x = 0; x < r.width(); ++x) h = (h ^ r.channel(c)(y, x)) * 1099511628211ull;
  return h;
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("identity spec leaves the patch unchanged") {
  const RgbRaster p = patch_of(1, 299);
  const AugmentSpec id;
  CHECK(id.is_identity());
  CHECK(augment_patch(p, id) == p);
}

TEST_CASE("flips are exact involutions") {
  const RgbRaster p = patch_of(2, 37);
  CHECK(flip_horizontal(flip_horizontal(p)) == p);
  CHECK(flip_vertical(flip_vertical(p)) == p);
  const RgbRaster h = flip_horizontal(p);
  const RgbRaster v = flip_vertical(p);
  for (int y = 0; y < 37; ++y)
    for (int x = 0; x < 37; ++x) {
      CHECK(h.at(x, y) == p.at(36 - x, y));
      CHECK(v.at(x, y) == p.at(x, 36 - y));
    }
  // Non-square inputs flip too.
  const RgbRaster wide(5, 3, {1, 2, 3});
  CHECK(flip_horizontal(wide).width() == 5);
}

TEST_CASE("180 degree rotation equals the double flip") {
  for (int n : {1, 2, 7, 299}) {
    const RgbRaster p = patch_of(3 + n, n);
    CHECK(rotate(p, 180.0) == flip_vertical(flip_horizontal(p)));
    CHECK(rotate(p, -180.0) == flip_vertical(flip_horizontal(p)));
    AugmentSpec hv;
    hv.flip_horizontal = hv.flip_vertical = true;
    CHECK(augment_patch(p, hv) == rotate(p, 180.0));
  }
}

TEST_CASE("quarter turns match the permutation oracle") {
  const RgbRaster p = patch_of(4, 31);
  const RgbRaster r1 = quarter_turn_oracle(p);
  const RgbRaster r2 = quarter_turn_oracle(r1);
  const RgbRaster r3 = quarter_turn_oracle(r2);
  CHECK(rotate_quarter_turns(p, 1) == r1);
  CHECK(rotate_quarter_turns(p, 2) == r2);
  CHECK(rotate_quarter_turns(p, 3) == r3);
  CHECK(rotate_quarter_turns(p, -1) == r3);
  CHECK(rotate_quarter_turns(p, 4) == p);
  CHECK(rotate(p, 90.0) == r1);
  CHECK(rotate(p, -90.0) == r3);
}

TEST_CASE("counter-clockwise as displayed") {
  // A marker right of centre ends up above centre after +90 degrees.
  RgbRaster p(9, 9);
  p.set(8, 4, {255, 255, 255});
  const RgbRaster r = rotate(p, 90.0);
  CHECK(r.at(4, 0) == Rgb{255, 255, 255});
}

TEST_CASE("bilinear rotation is continuous with the exact path") {
  const RgbRaster p = patch_of(5, 61);
  CHECK(max_abs_diff(rotate(p, 89.9999), rotate(p, 90.0)) <= 1);
  CHECK(max_abs_diff(rotate(p, 0.0001), p) <= 1);
  CHECK(max_abs_diff(rotate(p, -179.9999), rotate(p, 180.0)) <= 1);
}

TEST_CASE("constant patches stay constant under any rotation and shift") {
  const RgbRaster flat(41, 41, {10, 120, 240});
  for (double deg : {13.0, -71.5, 133.0}) CHECK(rotate(flat, deg) == flat);
  CHECK(shift_reflect(flat, 7, -9) == flat);
}

TEST_CASE("reflect shift moves content and mirrors the border") {
  const RgbRaster p = patch_of(6, 20);
  const RgbRaster s = shift_reflect(p, 3, -2);
  for (int y = 0; y < 18; ++y)
    for (int x = 3; x < 20; ++x) CHECK(s.at(x, y) == p.at(x - 3, y + 2));
  // Uncovered columns mirror: out x = 0, 1, 2 read source x = 2, 1, 0.
  CHECK(s.at(0, 0) == p.at(2, 2));
  CHECK(s.at(2, 0) == p.at(0, 2));
  // Bottom rows mirror the last source rows.
  CHECK(s.at(5, 18) == p.at(2, 19));
  CHECK(s.at(5, 19) == p.at(2, 18));
}

TEST_CASE("spec validation") {
  AugmentSpec s;
  s.shift_x = 74;
  CHECK_NOTHROW(s.validate(299));
  s.shift_x = 75;
  CHECK_THROWS_AS(s.validate(299), SpecError);
  s = {};
  s.shift_y = -75;
  CHECK_THROWS_AS(augment_patch(patch_of(7, 299), s), SpecError);
  s = {};
  s.rotation_deg = 180.5;
  CHECK_THROWS_AS(s.validate(299), SpecError);
  CHECK_THROWS_AS(augment_patch(RgbRaster(5, 6), AugmentSpec{}), SpecError);
}

TEST_CASE("eight variants of the same size with distinct names") {
  const RgbRaster p = patch_of(8, 299);
  const auto v = standard_augmentations(p, 42);
  REQUIRE(v.size() == 8);
  std::set<std::string> names;
  for (const auto& a : v) {
    names.insert(a.name);
    CHECK(a.patch.width() == 299);
    CHECK(a.patch.height() == 299);
    CHECK_NOTHROW(a.spec.validate(299));
    CHECK(augment_patch(p, a.spec) == a.patch);
  }
  CHECK(names == std::set<std::string>{"id", "h", "v", "hv", "id_r", "h_r", "v_r", "hv_r"});
  CHECK(v[0].patch == p);
  CHECK(v[1].patch == flip_horizontal(p));
  CHECK(v[2].patch == flip_vertical(p));
  CHECK(v[3].patch == flip_vertical(flip_horizontal(p)));
}

TEST_CASE("variants are a pure function of (patch, seed)") {
  const RgbRaster p = patch_of(9, 101);
  const auto a = standard_augmentations(p, 7);
  const auto b = standard_augmentations(p, 7);
  const auto c = standard_augmentations(p, 8);
  int randomized_differ = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(a[i].patch == b[i].patch);
    const bool same = content_hash(a[i].patch) == content_hash(c[i].patch);
    if (i < 4) CHECK(same);
    else randomized_differ += same ? 0 : 1;
  }
  CHECK(randomized_differ >= 3);
}

TEST_CASE("seeded parameters stay in range across many seeds") {
  const RgbRaster p = patch_of(10, 24);
  double lo = 0, hi = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (const auto& a : standard_augmentations(p, seed)) {
      CHECK(std::abs(a.spec.shift_x) <= 6);
      CHECK(std::abs(a.spec.shift_y) <= 6);
      lo = std::min(lo, a.spec.rotation_deg);
      hi = std::max(hi, a.spec.rotation_deg);
    }
  }
  CHECK(lo >= -180.0);
  CHECK(hi <= 180.0);
  CHECK(lo < -150.0);
  CHECK(hi > 150.0);
}

}
