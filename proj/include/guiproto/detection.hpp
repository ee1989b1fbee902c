#pragma once

// Screenshot -> component boxes: Canny edges, dilation, outer-contour boxes,
// then OCR-guided merging of words into text blocks.

#include <algorithm>
#include <optional>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/ocr.hpp"

namespace guiproto {

struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  // 1 = edge

  EdgeMap() = default;
  EdgeMap(int w, int h) : width(w), height(h), mask(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  bool at(int x, int y) const { return mask[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { mask[index(x, y)] = v ? 1 : 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  friend bool operator==(const EdgeMap&, const EdgeMap&) = default;
};

struct DetectionConfig {
  double gaussian_sigma = 1.4;
  // Hysteresis thresholds on the L2 Sobel magnitude of 0-255 intensities.
  double canny_low = 50.0;
  double canny_high = 150.0;
  int dilation_radius = 2;
  long long min_box_area = 16;
  int text_merge_gap = 10;
  double text_merge_vertical_overlap = 0.5;

  void validate() const {
    if (!(gaussian_sigma > 0)) throw ConfigError("detection: gaussian sigma must be positive");
    if (!(canny_low > 0) || !(canny_high > 0)) throw ConfigError("detection: Canny thresholds must be positive");
    if (!(canny_low < canny_high)) throw ConfigError("detection: Canny low threshold must be below the high threshold");
    if (dilation_radius < 1) throw ConfigError("detection: dilation radius must be >= 1");
    if (min_box_area < 1 || text_merge_gap < 1 || !(text_merge_vertical_overlap > 0))
      throw ConfigError("detection: area, gap and overlap thresholds must be positive");
  }
};

namespace detail {

inline std::vector<float> to_gray(const Image& img) {
  std::vector<float> g(static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.height()));
  const auto& px = img.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = 0.299f * px[3 * i] + 0.587f * px[3 * i + 1] + 0.114f * px[3 * i + 2];
  return g;
}

// Separable Gaussian, replicated borders.
inline std::vector<float> gaussian_blur(const std::vector<float>& src, int w, int h, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) sum += k[static_cast<std::size_t>(i + radius)] = static_cast<float>(std::exp(-(i * i) / (2 * sigma * sigma)));
  for (auto& v : k) v = static_cast<float>(v / sum);

  auto clampi = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
  std::vector<float> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * src[static_cast<std::size_t>(y) * w + clampi(x + i, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(clampi(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

}  // namespace detail

// Grayscale -> Gaussian blur -> Sobel -> non-maximum suppression -> hysteresis.
inline EdgeMap canny(const Image& img, const DetectionConfig& cfg = {}) {
  cfg.validate();
  const int w = img.width(), h = img.height();
  EdgeMap edges(w, h);
  if (w < 3 || h < 3) return edges;

  const auto blurred = detail::gaussian_blur(detail::to_gray(img), w, h, cfg.gaussian_sigma);
  auto px = [&](int x, int y) {
    x = std::min(std::max(x, 0), w - 1);
    y = std::min(std::max(y, 0), h - 1);
    return blurred[static_cast<std::size_t>(y) * w + x];
  };

  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<float> mag(n), gx(n), gy(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float dx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const float dy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = dx;
      gy[i] = dy;
      mag[i] = std::sqrt(dx * dx + dy * dy);
    }

  // Non-maximum suppression along the quantised gradient direction. The
  // asymmetric comparison keeps exactly one pixel of a two-pixel plateau.
  enum : std::uint8_t { None = 0, Weak = 1, Strong = 2 };
  std::vector<std::uint8_t> cls(n, None);
  auto mag_at = [&](int x, int y) -> float {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
    return mag[static_cast<std::size_t>(y) * w + x];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float m = mag[i];
      if (m < cfg.canny_low) continue;
      double angle = std::atan2(gy[i], gx[i]) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 180.0;
      int ox = 0, oy = 0;
      if (angle < 22.5 || angle >= 157.5) {
        ox = 1;
      } else if (angle < 67.5) {
        ox = 1;
        oy = 1;
      } else if (angle < 112.5) {
        oy = 1;
      } else {
        ox = -1;
        oy = 1;
      }
      const float before = mag_at(x - ox, y - oy), after = mag_at(x + ox, y + oy);
      if (m >= before && m > after) cls[i] = m >= cfg.canny_high ? Strong : Weak;
    }

  // Hysteresis: weak pixels survive when 8-connected to a strong pixel.
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i)
    if (cls[i] == Strong) {
      edges.mask[i] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (cls[j] == Weak && !edges.mask[j]) {
          edges.mask[j] = 1;
          stack.push_back(j);
        }
      }
  }
  return edges;
}

// Morphological dilation with a (2*radius+1)^2 square.
inline EdgeMap dilate(const EdgeMap& edges, int radius) {
  if (radius < 1) throw ConfigError("dilate: radius must be >= 1");
  const int w = edges.width, h = edges.height;
  EdgeMap horiz(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    int last = -1000000;  // most recent set column
    // Forward pass records distance to nearest set pixel on the left, backward on the right.
    std::vector<int> left(static_cast<std::size_t>(w)), right(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) {
      if (edges.at(x, y)) last = x;
      left[static_cast<std::size_t>(x)] = x - last;
    }
    last = 1000000;
    for (int x = w - 1; x >= 0; --x) {
      if (edges.at(x, y)) last = x;
      right[static_cast<std::size_t>(x)] = last - x;
    }
    for (int x = 0; x < w; ++x)
      if (left[static_cast<std::size_t>(x)] <= radius || right[static_cast<std::size_t>(x)] <= radius) horiz.set(x, y);
  }
  for (int x = 0; x < w; ++x) {
    int last = -1000000;
    std::vector<int> up(static_cast<std::size_t>(h)), down(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
      if (horiz.at(x, y)) last = y;
      up[static_cast<std::size_t>(y)] = y - last;
    }
    last = 1000000;
    for (int y = h - 1; y >= 0; --y) {
      if (horiz.at(x, y)) last = y;
      down[static_cast<std::size_t>(y)] = last - y;
    }
    for (int y = 0; y < h; ++y)
      if (up[static_cast<std::size_t>(y)] <= radius || down[static_cast<std::size_t>(y)] <= radius) out.set(x, y);
  }
  return out;
}

// 8-connected components of `mask`, as tight boxes in (y, x, w, h) order.
inline std::vector<BoundingBox> connected_component_boxes(const EdgeMap& mask) {
  const int w = mask.width, h = mask.height;
  std::vector<std::uint8_t> seen(mask.mask.size(), 0);
  std::vector<BoundingBox> boxes;
  std::vector<std::size_t> stack;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t start = mask.index(x0, y0);
      if (!mask.mask[start] || seen[start]) continue;
      int minx = x0, maxx = x0, miny = y0, maxy = y0;
      seen[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t j = mask.index(nx, ny);
            if (mask.mask[j] && !seen[j]) {
              seen[j] = 1;
              stack.push_back(j);
            }
          }
      }
      boxes.push_back({minx, miny, maxx - minx + 1, maxy - miny + 1});
    }
  std::sort(boxes.begin(), boxes.end());
  return boxes;
}

// Sets every pixel not 4-connected to the image border through unset pixels,
// i.e. fills regions enclosed by a closed edge contour.
inline EdgeMap fill_enclosed(const EdgeMap& mask) {
  const int w = mask.width, h = mask.height;
  std::vector<std::uint8_t> outside(mask.mask.size(), 0);
  std::vector<std::size_t> stack;
  auto seed = [&](int x, int y) {
    const std::size_t i = mask.index(x, y);
    if (!mask.mask[i] && !outside[i]) {
      outside[i] = 1;
      stack.push_back(i);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : nbr) {
      const int nx = x + d[0], ny = y + d[1];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      seed(nx, ny);
    }
  }
  EdgeMap out(w, h);
  for (std::size_t i = 0; i < out.mask.size(); ++i) out.mask[i] = outside[i] ? 0 : 1;
  return out;
}

// Boxes of the outer contours of a (dilated) edge mask: connected components
// after filling enclosed regions, so content nested inside a closed contour
// belongs to the enclosing component. Boxes below the minimum area are dropped.
inline std::vector<BoundingBox> extract_boxes(const EdgeMap& edges, const DetectionConfig& cfg = {}) {
  auto boxes = connected_component_boxes(fill_enclosed(edges));
  std::erase_if(boxes, [&](const BoundingBox& b) { return b.area() < cfg.min_box_area; });
  return boxes;
}

// Replaces boxes recognised as words on the same text line by their union.
// A box counts as a word when an OCR hit covers at least half of the smaller
// of the two boxes.
inline std::vector<BoundingBox> merge_text_blocks(const std::vector<BoundingBox>& boxes,
                                                  const std::vector<TextHit>& text_hits,
                                                  const DetectionConfig& cfg = {}) {
  std::vector<BoundingBox> out;
  std::vector<BoundingBox> words;
  for (const auto& b : boxes) {
    const bool is_word = std::any_of(text_hits.begin(), text_hits.end(), [&](const TextHit& t) {
      return 2 * intersection_area(b, t.box) >= std::min(b.area(), t.box.area());
    });
    (is_word ? words : out).push_back(b);
  }

  std::vector<std::size_t> parent(words.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const auto& a = words[i];
      const auto& b = words[j];
      const int v_overlap = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
      if (v_overlap <= 0 || v_overlap < cfg.text_merge_vertical_overlap * std::min(a.h, b.h)) continue;
      const int gap = std::max(a.x, b.x) - std::min(a.right(), b.right());
      if (gap > cfg.text_merge_gap) continue;
      parent[find(i)] = find(j);
    }

  std::vector<std::optional<BoundingBox>> merged(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto& m = merged[find(i)];
    m = m ? union_box(*m, words[i]) : words[i];
  }
  for (const auto& m : merged)
    if (m) out.push_back(*m);
  std::sort(out.begin(), out.end());
  return out;
}

struct Detection {
  BoundingBox bounds;
  Image crop;  // taken from the unblurred input
};

// Full CV path. When an OCR provider is given it is queried once over the
// whole image and its hits drive text-block merging.
inline std::vector<Detection> detect_components(const Image& img, const DetectionConfig& cfg = {},
                                                const OcrProvider* ocr = nullptr) {
  cfg.validate();
  if (img.empty()) return {};
  const EdgeMap edges = dilate(canny(img, cfg), cfg.dilation_radius);
  auto boxes = extract_boxes(edges, cfg);
  if (ocr) boxes = merge_text_blocks(boxes, ocr->recognize(img, img.rect()), cfg);
  std::vector<Detection> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back({b, img.crop(b)});
  return out;
}

}  // namespace guiproto
