#include "histovote/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

namespace {

void require_square(const RgbRaster& patch) {
  if (patch.width() != patch.height()) {
    std::ostringstream os;
    os << "augmentation needs a square patch, got " << patch.width() << "x" << patch.height();
    throw SpecError(os.str());
  }
}

// Applies out(x, y) = in(src_x(x, y), src_y(x, y)) on every plane.
template <typename SourceFn>
RgbRaster remap(const RgbRaster& in, SourceFn source) {
  RgbRaster out(in.width(), in.height(), {}, in.pixel_pitch_um());
  for (int c = 0; c < 3; ++c) {
    const Plane& src = in.channel(c);
    Plane& dst = out.channel(c);
    for (int y = 0; y < in.height(); ++y) {
      for (int x = 0; x < in.width(); ++x) {
        const auto [sx, sy] = source(x, y);
        dst(y, x) = src(sy, sx);
      }
    }
  }
  return out;
}

// Half-sample symmetric reflection: -1 -> 0, n -> n - 1.
int reflect_index(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

double reflect_coord(double s, int n) {
  const double period = 2.0 * n;
  double t = std::fmod(s + 0.5, period);
  if (t < 0) t += period;
  if (t > n) t = period - t;
  return std::clamp(t - 0.5, 0.0, static_cast<double>(n - 1));
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(unit_uniform(rng) * span));
}

}  // namespace

void AugmentSpec::validate(int patch_size) const {
  const int cap = patch_size / 4;
  if (std::abs(shift_x) > cap || std::abs(shift_y) > cap) {
    std::ostringstream os;
    os << "shift (" << shift_x << ", " << shift_y << ") exceeds the " << cap << "px bound for a " << patch_size
       << "px patch";
    throw SpecError(os.str());
  }
  if (!(rotation_deg >= -180.0 && rotation_deg <= 180.0)) {
    throw SpecError("rotation " + std::to_string(rotation_deg) + " deg outside [-180, 180]");
  }
}

RgbRaster flip_horizontal(const RgbRaster& patch) {
  return RgbRaster(patch.red().rowwise().reverse(), patch.green().rowwise().reverse(),
                   patch.blue().rowwise().reverse(), patch.pixel_pitch_um());
}

RgbRaster flip_vertical(const RgbRaster& patch) {
  return RgbRaster(patch.red().colwise().reverse(), patch.green().colwise().reverse(),
                   patch.blue().colwise().reverse(), patch.pixel_pitch_um());
}

RgbRaster rotate_quarter_turns(const RgbRaster& patch, int turns) {
  require_square(patch);
  const int n = patch.width();
  switch (((turns % 4) + 4) % 4) {
    case 0: return patch;
    case 1: return remap(patch, [n](int x, int y) { return std::pair{n - 1 - y, x}; });
    case 2: return remap(patch, [n](int x, int y) { return std::pair{n - 1 - x, n - 1 - y}; });
    default: return remap(patch, [n](int x, int y) { return std::pair{y, n - 1 - x}; });
  }
}

RgbRaster shift_reflect(const RgbRaster& patch, int dx, int dy) {
  if (dx == 0 && dy == 0) return patch;
  const int w = patch.width();
  const int h = patch.height();
  return remap(patch, [=](int x, int y) { return std::pair{reflect_index(x - dx, w), reflect_index(y - dy, h)}; });
}

RgbRaster rotate(const RgbRaster& patch, double degrees) {
  require_square(patch);
  if (std::fmod(degrees, 90.0) == 0.0) return rotate_quarter_turns(patch, static_cast<int>(std::lround(degrees / 90.0)));

  const int n = patch.width();
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double centre = (n - 1) / 2.0;

  RgbRaster out(n, n, {}, patch.pixel_pitch_um());
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = x - centre;
      const double v = y - centre;
      const double sx = reflect_coord(centre + u * cs - v * sn, n);
      const double sy = reflect_coord(centre + u * sn + v * cs, n);
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, n - 1);
      const int y1 = std::min(y0 + 1, n - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < 3; ++c) {
        const Plane& p = patch.channel(c);
        const double top = p(y0, x0) + fx * (p(y0, x1) - p(y0, x0));
        const double bottom = p(y1, x0) + fx * (p(y1, x1) - p(y1, x0));
        const double value = top + fy * (bottom - top);
        out.channel(c)(y, x) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(value), 0, 255));
      }
    }
  }
  return out;
}

RgbRaster augment_patch(const RgbRaster& patch, const AugmentSpec& spec) {
  require_square(patch);
  spec.validate(patch.width());
  RgbRaster out = patch;
  if (spec.flip_horizontal) out = flip_horizontal(out);
  if (spec.flip_vertical) out = flip_vertical(out);
  out = shift_reflect(out, spec.shift_x, spec.shift_y);
  if (spec.rotation_deg != 0.0) out = rotate(out, spec.rotation_deg);
  return out;
}

std::vector<AugmentedVariant> standard_augmentations(const RgbRaster& patch, std::uint64_t seed) {
  require_square(patch);
  const int cap = patch.width() / 4;
  std::mt19937_64 rng(seed);

  static constexpr std::array<std::pair<bool, bool>, 4> kFlips{
      std::pair{false, false}, std::pair{true, false}, std::pair{false, true}, std::pair{true, true}};
  static constexpr std::array<const char*, 4> kFlipNames{"id", "h", "v", "hv"};

  std::vector<AugmentedVariant> out;
  out.reserve(8);
  for (int randomized = 0; randomized < 2; ++randomized) {
    for (std::size_t f = 0; f < kFlips.size(); ++f) {
      AugmentSpec spec;
      spec.flip_horizontal = kFlips[f].first;
      spec.flip_vertical = kFlips[f].second;
      spec.seed = seed;
      std::string name = kFlipNames[f];
      if (randomized) {
        spec.rotation_deg = -180.0 + 360.0 * unit_uniform(rng);
        spec.shift_x = uniform_int(rng, -cap, cap);
        spec.shift_y = uniform_int(rng, -cap, cap);
        name += "_r";
      }
      out.push_back({std::move(name), spec, augment_patch(patch, spec)});
    }
  }
  return out;
}

}  // namespace histovote
