#pragma once
// Brute-force reference implementations. Deliberately naive: plain loops, integer arithmetic
// where possible, no shared code with the library beyond its data types.

#include <histovote/evaluate.hpp>
#include <histovote/labels.hpp>
#include <histovote/raster.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace histovote::oracle {

/// blue > 1.587 * red in exact integer form: 1000 * blue > 1587 * red.
inline bool bluish_pixel(Rgb p) { return 1000 * int{p.b} > 1587 * int{p.r}; }

inline BlueMask blue_mask(const RgbRaster& r) {
  BlueMask m(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) m.set(x, y, bluish_pixel(r.at(x, y)));
  return m;
}

struct Origin {
  int x, y, row, col;
};

/// Every (x, y) in the image tested for being a stride multiple whose patch fits.
inline std::vector<Origin> grid(int width, int height, int patch, int stride) {
  std::vector<Origin> out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (x % stride == 0 && y % stride == 0 && x + patch <= width && y + patch <= height)
        out.push_back({x, y, y / stride, x / stride});
  return out;
}

inline std::int64_t count_bits(const BlueMask& m, int x0, int y0, int w, int h) {
  std::int64_t n = 0;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) n += m.at(x, y) ? 1 : 0;
  return n;
}

struct Pick {
  int x, y;
  double density;
};

struct Selection {
  double metric;
  int tier;  // 0 keep-all, 1 top10, 2 top5, 3 top1
  std::size_t qualified;
  bool fallback;
  std::vector<Pick> picks;
};

/// Qualify (density > 2%), sort by density with scan order as tie-break, take the tier's k.
inline Selection select(const BlueMask& m, int patch = 299, int stride = 149) {
  Selection s{};
  s.metric = static_cast<double>(count_bits(m, 0, 0, m.width(), m.height())) /
             (static_cast<double>(m.width()) * m.height());
  s.tier = s.metric > 0.01 ? 0 : s.metric > 0.005 ? 1 : s.metric > 0.001 ? 2 : 3;
  struct Cand {
    Pick p;
    std::size_t order;
  };
  std::vector<Cand> all;
  const auto origins = grid(m.width(), m.height(), patch, stride);
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const double d = static_cast<double>(count_bits(m, origins[i].x, origins[i].y, patch, patch)) /
                     (static_cast<double>(patch) * patch);
    all.push_back({{origins[i].x, origins[i].y, d}, i});
  }
  std::vector<Cand> q;
  for (const auto& c : all)
    if (c.p.density > 0.02) q.push_back(c);
  s.qualified = q.size();
  // Selection sort: repeatedly take the densest remaining, earliest in scan order on ties.
  const std::size_t k = s.tier == 0 ? q.size() : std::min<std::size_t>(q.size(), s.tier == 1 ? 10 : s.tier == 2 ? 5 : 1);
  std::vector<bool> taken(q.size(), false);
  for (std::size_t n = 0; n < k; ++n) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (taken[i]) continue;
      if (!best || q[i].p.density > q[*best].p.density ||
          (q[i].p.density == q[*best].p.density && q[i].order < q[*best].order))
        best = i;
    }
    taken[*best] = true;
    s.picks.push_back(q[*best].p);
  }
  if (q.empty() && !all.empty()) {
    s.fallback = true;
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i)
      if (all[i].p.density > all[best].p.density) best = i;
    s.picks.push_back(all[best].p);
  }
  return s;
}

/// Count, find the maximum, then walk Invasive, InSitu, Benign, Normal for the first label at it.
struct Vote {
  ClassLabel label;
  bool tie;
};

inline Vote vote(const std::vector<ClassLabel>& labels) {
  int counts[4] = {0, 0, 0, 0};
  for (ClassLabel l : labels) counts[static_cast<int>(l)]++;
  const int top = std::max({counts[0], counts[1], counts[2], counts[3]});
  int at_top = 0;
  for (int c : counts) at_top += (c == top);
  for (int v : {3, 2, 1, 0})
    if (counts[v] == top) return {static_cast<ClassLabel>(v), at_top > 1};
  return {ClassLabel::Normal, false};
}

/// Published 4-class image confusion counts: rows predicted, columns actual, order Normal, Benign, InSitu, Invasive.
inline constexpr int kFixture4Class[4][4] = {{20, 1, 3, 0}, {4, 23, 1, 1}, {1, 1, 20, 2}, {0, 0, 1, 22}};
/// Published 2-class image confusion counts: rows predicted, columns actual, order NonCarcinoma, Carcinoma.
inline constexpr int kFixture2Class[2][2] = {{48, 5}, {2, 45}};

inline std::vector<LabelPair> fixture4_pairs() {
  std::vector<LabelPair> pairs;
  for (int p = 0; p < 4; ++p)
    for (int a = 0; a < 4; ++a)
      for (int n = 0; n < kFixture4Class[p][a]; ++n) pairs.emplace_back(static_cast<ClassLabel>(p), static_cast<ClassLabel>(a));
  return pairs;
}

inline std::vector<BinaryPair> fixture2_pairs() {
  std::vector<BinaryPair> pairs;
  for (int p = 0; p < 2; ++p)
    for (int a = 0; a < 2; ++a)
      for (int n = 0; n < kFixture2Class[p][a]; ++n) pairs.emplace_back(static_cast<BinaryLabel>(p), static_cast<BinaryLabel>(a));
  return pairs;
}

/// Stamps `n` bluish pixels as rows of `row_width` starting at (x0, y0).
inline void stamp(BlueMask& m, int x0, int y0, int n, int row_width = 100) {
  for (int i = 0; i < n; ++i) m.set(x0 + i % row_width, y0 + i / row_width, true);
}

/// Random mask whose metric falls inside the band of `tier` (0..3). Mixes compact blobs
/// (which produce qualified patches) with scattered noise; `tie_blobs` copies one blob
/// pattern to several places so equal densities occur.
inline BlueMask random_tier_mask(std::mt19937_64& rng, int width, int height, int tier, bool tie_blobs) {
  static constexpr double lo[4] = {0.01, 0.005, 0.001, 0.0};
  static constexpr double hi[4] = {0.08, 0.01, 0.005, 0.001};
  BlueMask m(width, height);
  const double area = static_cast<double>(width) * height;
  std::uniform_real_distribution<double> frac(lo[tier], hi[tier]);
  const auto target = static_cast<std::int64_t>(frac(rng) * area);
  std::uniform_int_distribution<int> px(0, width - 101), py(0, height - 101);
  std::int64_t placed = 0;
  std::bernoulli_distribution noise(0.3);
  if (tie_blobs) {
    const int n = std::max<int>(1, static_cast<int>(target / 4));
    for (int k = 0; k < 4 && placed + n <= target; ++k) {
      stamp(m, px(rng), py(rng), std::min(n, 10000));
      placed += std::min(n, 10000);
    }
  }
  while (placed < target) {
    const std::int64_t left = target - placed;
    if (noise(rng)) {
      const int n = static_cast<int>(std::min<std::int64_t>(left, 50));
      for (int i = 0; i < n; ++i) m.set(px(rng) + 50, py(rng) + 50, true);
      placed += n;
    } else {
      std::uniform_int_distribution<int> size(1, static_cast<int>(std::min<std::int64_t>(left, 10000)));
      const int n = size(rng);
      stamp(m, px(rng), py(rng), n);
      placed += n;
    }
  }
  return m;
}

}  // namespace histovote::oracle
