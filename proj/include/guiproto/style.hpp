#pragma once

// Colour quantisation and histogram analysis for style inference.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/ocr.hpp"

namespace guiproto {

struct ColorBucket {
  Rgb representative;  // bucket centre
  std::uint32_t id = 0;
  std::size_t count = 0;
  friend bool operator==(const ColorBucket&, const ColorBucket&) = default;
};

struct ComponentStyle {
  Rgb background;
  std::optional<Rgb> font_color;
  std::optional<double> font_size_dp;
  std::optional<std::string> text;
  friend bool operator==(const ComponentStyle&, const ComponentStyle&) = default;
};

struct StyleOptions {
  int quantization_bits = 4;
  double density = 2.0;
  // Font size = text box height * factor, in px, before the dp conversion.
  double font_height_factor = 0.7;
};

inline std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
  return buf;
}

inline std::optional<Rgb> parse_hex_color(std::string_view s) {
  if (s.size() != 7 || s[0] != '#') return std::nullopt;
  unsigned v = 0;
  for (char ch : s.substr(1)) {
    v <<= 4;
    if (ch >= '0' && ch <= '9') v |= static_cast<unsigned>(ch - '0');
    else if (ch >= 'A' && ch <= 'F') v |= static_cast<unsigned>(ch - 'A' + 10);
    else if (ch >= 'a' && ch <= 'f') v |= static_cast<unsigned>(ch - 'a' + 10);
    else return std::nullopt;
  }
  return Rgb{static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

namespace detail {

inline std::uint32_t bucket_of(Rgb c, int bits) {
  const int shift = 8 - bits;
  return (std::uint32_t{c.r} >> shift) << (2 * bits) | (std::uint32_t{c.g} >> shift) << bits | (std::uint32_t{c.b} >> shift);
}

inline Rgb bucket_center(std::uint32_t id, int bits) {
  const int shift = 8 - bits;
  const std::uint32_t mask = (1u << bits) - 1;
  const std::uint32_t half = (1u << shift) >> 1;
  auto chan = [&](std::uint32_t q) { return static_cast<std::uint8_t>((q << shift) + half); };
  return {chan((id >> (2 * bits)) & mask), chan((id >> bits) & mask), chan(id & mask)};
}

template <typename Pred>
std::vector<ColorBucket> histogram_where(const Image& img, const BoundingBox& region, int bits, Pred keep) {
  if (bits < 1 || bits > 8) throw ConfigError("color histogram: quantization bits must be in [1, 8]");
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (int y = region.y; y < region.bottom(); ++y)
    for (int x = region.x; x < region.right(); ++x)
      if (keep(x, y)) ++counts[bucket_of(img.at(x, y), bits)];
  std::vector<ColorBucket> out;
  out.reserve(counts.size());
  for (const auto& [id, n] : counts) out.push_back({bucket_center(id, bits), id, n});
  std::sort(out.begin(), out.end(), [](const ColorBucket& a, const ColorBucket& b) {
    return a.count != b.count ? a.count > b.count : a.id < b.id;
  });
  return out;
}

}  // namespace detail

// Buckets by the top `bits` bits of each channel; sorted by count desc, then bucket id.
inline std::vector<ColorBucket> color_histogram(const Image& crop, int bits = 4) {
  if (crop.empty()) throw ValidationError("color histogram of an empty crop");
  return detail::histogram_where(crop, crop.rect(), bits, [](int, int) { return true; });
}

inline Rgb contrast_default(Rgb background) {
  const double luma = 0.299 * background.r + 0.587 * background.g + 0.114 * background.b;
  return luma > 127.5 ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
}

inline double font_size_dp(int text_height_px, const StyleOptions& opts = {}) {
  return text_height_px * opts.font_height_factor / opts.density;
}

// Background = dominant bucket. Text-bearing classes add font colour (second
// bucket, or a contrasting default), font size from the crop height, and the
// OCR text found in the region (joined in reading order).
inline ComponentStyle infer_style(const Image& crop, ComponentClass cls, const StyleOptions& opts = {},
                                  const std::vector<TextHit>& text_hits = {}) {
  const auto hist = color_histogram(crop, opts.quantization_bits);
  ComponentStyle s;
  s.background = hist.front().representative;
  if (!is_text_bearing(cls)) return s;
  s.font_color = hist.size() > 1 ? hist[1].representative : contrast_default(s.background);
  s.font_size_dp = font_size_dp(crop.height(), opts);
  if (!text_hits.empty()) {
    auto hits = text_hits;
    std::sort(hits.begin(), hits.end(), [](const TextHit& a, const TextHit& b) { return a.box < b.box; });
    std::string joined;
    for (const auto& h : hits) {
      if (!joined.empty()) joined += ' ';
      joined += h.text;
    }
    s.text = joined;
  }
  return s;
}

// Convenience form: crops `region` out of the screen and asks `ocr` for its text.
inline ComponentStyle infer_style(const Image& screen, const BoundingBox& region, ComponentClass cls,
                                  const OcrProvider& ocr, const StyleOptions& opts = {}) {
  return infer_style(screen.crop(region), cls, opts, ocr.recognize(screen, region));
}

// A container's own background: the dominant colour of the region not covered
// by its children. Empty when the children cover it completely.
inline std::optional<Rgb> infer_container_background(const Image& screen, const BoundingBox& region,
                                                     const std::vector<BoundingBox>& children,
                                                     const StyleOptions& opts = {}) {
  const BoundingBox r = clip_box(region, screen.rect());
  if (r.w == 0 || r.h == 0) return std::nullopt;
  const auto hist = detail::histogram_where(screen, r, opts.quantization_bits, [&](int x, int y) {
    for (const auto& c : children)
      if (x >= c.x && x < c.right() && y >= c.y && y < c.bottom()) return false;
    return true;
  });
  if (hist.empty()) return std::nullopt;
  return hist.front().representative;
}

}  // namespace guiproto
