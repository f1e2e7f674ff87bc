#include <doctest.h>

#include <histovote/errors.hpp>
#include <histovote/raster.hpp>

#include "test_support.hpp"

using namespace histovote;

TEST_SUITE("raster") {

TEST_CASE("construction fills every pixel and rejects empty geometry") {
  RgbRaster r(3, 2, Rgb{1, 2, 3});
  CHECK(r.width() == 3);
  CHECK(r.height() == 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) CHECK(r.at(x, y) == Rgb{1, 2, 3});
  CHECK(r.pixel_pitch_um() == doctest::Approx(0.42));
  CHECK_THROWS_AS(RgbRaster(0, 5), DimensionError);
  CHECK_THROWS_AS(RgbRaster(5, -1), DimensionError);
  CHECK_THROWS_AS(RgbRaster(Plane(2, 2), Plane(2, 3), Plane(2, 2)), DimensionError);
}

TEST_CASE("set and at address (x, y) as column, row") {
  RgbRaster r(4, 3);
  r.set(3, 1, {9, 8, 7});
  CHECK(r.red()(1, 3) == 9);
  CHECK(r.green()(1, 3) == 8);
  CHECK(r.blue()(1, 3) == 7);
  CHECK(r.at(1, 3 - 2) == Rgb{0, 0, 0});
}

TEST_CASE("equality ignores pixel pitch") {
  RgbRaster a(2, 2, {5, 5, 5}, 0.42), b(2, 2, {5, 5, 5}, 0.25);
  CHECK(a == b);
  b.set(1, 1, {5, 5, 6});
  CHECK_FALSE(a == b);
  CHECK_FALSE(RgbRaster(2, 3) == RgbRaster(3, 2));
}

TEST_CASE("identity crop") {
  std::mt19937_64 rng(1);
  const RgbRaster r = testing::random_raster(rng, 31, 17);
  CHECK(crop(r, r.bounds()) == r);
}

TEST_CASE("crop pixel (i, j) is source (x + i, y + j)") {
  std::mt19937_64 rng(2);
  const RgbRaster r = testing::random_raster(rng, 40, 30);
  const RegionRect region{7, 5, 13, 11};
  const RgbRaster c = crop(r, region);
  REQUIRE(c.width() == 13);
  REQUIRE(c.height() == 11);
  for (int j = 0; j < 11; ++j)
    for (int i = 0; i < 13; ++i) CHECK(c.at(i, j) == r.at(7 + i, 5 + j));
}

TEST_CASE("299 x 299 crop at origin") {
  const RgbRaster r(2048, 1536, {1, 2, 3});
  const RgbRaster c = crop(r, {0, 0, 299, 299});
  CHECK(c.width() == 299);
  CHECK(c.height() == 299);
}

TEST_CASE("crop bounds errors name the region") {
  const RgbRaster r(10, 8);
  CHECK_THROWS_AS(crop(r, {0, 0, 11, 8}), BoundsError);
  CHECK_THROWS_AS(crop(r, {1, 0, 10, 8}), BoundsError);
  CHECK_THROWS_AS(crop(r, {0, 0, 10, 9}), BoundsError);
  CHECK_THROWS_AS(crop(r, {-1, 0, 2, 2}), BoundsError);
  CHECK_THROWS_AS(crop(r, {0, 0, 0, 2}), DimensionError);
  try {
    crop(r, {3, 4, 8, 2});
    FAIL("expected BoundsError");
  } catch (const BoundsError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("x=3") != std::string::npos);
    CHECK(msg.find("w=8") != std::string::npos);
  }
}

TEST_CASE("crop composes") {
  std::mt19937_64 rng(3);
  const RgbRaster r = testing::random_raster(rng, 50, 40);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> d(0, 20);
    const RegionRect a{d(rng), d(rng), 25, 18};
    const RegionRect b{d(rng) % 10, d(rng) % 8, 15, 10};
    const RegionRect ab{a.x + b.x, a.y + b.y, b.w, b.h};
    CHECK(crop(crop(r, a), b) == crop(r, ab));
  }
}

TEST_CASE("crop never reads outside its region") {
  RgbRaster r(20, 20, {255, 0, 255});
  const RegionRect region{4, 6, 9, 5};
  for (int y = region.y; y < region.y + region.h; ++y)
    for (int x = region.x; x < region.x + region.w; ++x)
      r.set(x, y, {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 7});
  const RgbRaster c = crop(r, region);
  for (int j = 0; j < c.height(); ++j)
    for (int i = 0; i < c.width(); ++i) {
      CHECK(c.at(i, j).b == 7);
      CHECK(c.at(i, j).r == region.x + i);
    }
}

TEST_CASE("blue mask geometry and counting") {
  BlueMask m(5, 4);
  CHECK(m.count() == 0);
  m.set(4, 3, true);
  m.set(0, 0, true);
  CHECK(m.count() == 2);
  CHECK(m.at(4, 3));
  CHECK_FALSE(m.at(3, 4 - 1));
  CHECK(BlueMask(3, 3, true).count() == 9);
  CHECK_THROWS_AS(BlueMask(0, 3), DimensionError);
}

TEST_CASE("RegionRect helpers") {
  const RegionRect r{1, 2, 3, 4};
  CHECK(r.area() == 12);
  CHECK(r.fits_within(4, 6));
  CHECK_FALSE(r.fits_within(3, 6));
  CHECK_NOTHROW(require_inside(r, 4, 6));
  CHECK_THROWS_AS(require_inside(r, 4, 5), BoundsError);
}

}
