#pragma once

// Integer-only software rasterizer for GUI trees: flat fills, a scaled 5x7
// bitmap font and one painter per component class. No anti-aliasing, so two
// renders of the same scene are byte-identical.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/font5x7.hpp"

namespace guiproto {

struct WidgetState {
  bool checked = false;
  double value = 0.5;  // progress / seek position in [0,1]
  int number = 3;      // rating stars or number-picker value
  friend bool operator==(const WidgetState&, const WidgetState&) = default;
};

struct SceneNode {
  NodeKind kind = NodeKind::Container;
  std::string type;
  std::optional<ComponentClass> component;
  BoundingBox bounds;  // px
  std::optional<Rgb> background;
  std::optional<Rgb> foreground;
  int text_scale = 2;  // font pixels per bitmap pixel
  std::string text;
  WidgetState state;
  std::shared_ptr<const Image> asset;  // blitted into image-like leaves
  std::optional<Rgb> edge;             // 1 px frame drawn over a leaf
  std::vector<SceneNode> children;
};

struct Scene {
  int width = 0;
  int height = 0;
  Rgb background{255, 255, 255};
  SceneNode root;
};

struct RenderReport {
  std::size_t clipped_nodes = 0;
};

inline int text_width(std::string_view s, int scale) {
  return s.empty() ? 0 : static_cast<int>(s.size()) * font::kAdvance * scale - scale;
}

inline int text_height(int scale) { return font::kGlyphHeight * scale; }

// Scale for a font height in px, matching the 0.7 text-height convention.
inline int text_scale_for_font_px(double font_px) {
  return std::max(1, static_cast<int>(std::lround(font_px / font::kGlyphHeight)));
}

inline Rgb blend(Rgb a, Rgb b, double t) {
  auto mix = [t](int x, int y) { return static_cast<std::uint8_t>(std::lround(x + (y - x) * t)); };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// Drawing surface that refuses every write outside `clip`.
class Canvas {
 public:
  Canvas(Image& img, BoundingBox clip) : img_(img), clip_(clip_box(clip, img.rect())) {}

  const BoundingBox& clip() const { return clip_; }

  void put(int x, int y, Rgb c) {
    if (x >= clip_.x && x < clip_.right() && y >= clip_.y && y < clip_.bottom()) img_.set(x, y, c);
  }

  void fill(const BoundingBox& r, Rgb c) {
    const BoundingBox k = clip_box(r, clip_);
    for (int y = k.y; y < k.bottom(); ++y)
      for (int x = k.x; x < k.right(); ++x) img_.set(x, y, c);
  }

  void outline(const BoundingBox& r, int t, Rgb c) {
    fill({r.x, r.y, r.w, t}, c);
    fill({r.x, r.bottom() - t, r.w, t}, c);
    fill({r.x, r.y, t, r.h}, c);
    fill({r.right() - t, r.y, t, r.h}, c);
  }

  // Rectangle with quarter-circle corners of radius `rad` left unpainted.
  void rounded_fill(const BoundingBox& r, int rad, Rgb c) {
    rad = std::clamp(rad, 0, std::min(r.w, r.h) / 2);
    for (int y = r.y; y < r.bottom(); ++y)
      for (int x = r.x; x < r.right(); ++x) {
        const int dx = x < r.x + rad ? r.x + rad - x : (x >= r.right() - rad ? x - (r.right() - rad - 1) : 0);
        const int dy = y < r.y + rad ? r.y + rad - y : (y >= r.bottom() - rad ? y - (r.bottom() - rad - 1) : 0);
        if (dx > 0 && dy > 0 && (dx - 1) * (dx - 1) + (dy - 1) * (dy - 1) > rad * rad) continue;
        put(x, y, c);
      }
  }

  void disc(int cx, int cy, int r, Rgb c) {
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) put(x, y, c);
  }

  void ring(int cx, int cy, int r, int t, Rgb c) {
    const int inner = std::max(0, r - t);
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x) {
        const int d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d <= r * r && d > inner * inner) put(x, y, c);
      }
  }

  // Bresenham with a square pen of side `t`.
  void line(int x0, int y0, int x1, int y1, int t, Rgb c) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
      fill({x0 - t / 2, y0 - t / 2, t, t}, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }

  // Even-odd fill sampled at pixel centres.
  void polygon(const std::vector<std::pair<double, double>>& pts, Rgb c) {
    if (pts.size() < 3) return;
    double minx = pts[0].first, maxx = minx, miny = pts[0].second, maxy = miny;
    for (const auto& [x, y] : pts) {
      minx = std::min(minx, x), maxx = std::max(maxx, x);
      miny = std::min(miny, y), maxy = std::max(maxy, y);
    }
    for (int y = static_cast<int>(std::floor(miny)); y <= static_cast<int>(std::ceil(maxy)); ++y)
      for (int x = static_cast<int>(std::floor(minx)); x <= static_cast<int>(std::ceil(maxx)); ++x) {
        const double px = x + 0.5, py = y + 0.5;
        bool in = false;
        for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
          const auto [xi, yi] = pts[i];
          const auto [xj, yj] = pts[j];
          if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
        }
        if (in) put(x, y, c);
      }
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, bool closed, int t, Rgb c) {
    for (std::size_t i = 0; i + 1 < pts.size() + (closed ? 1 : 0); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      line(static_cast<int>(std::lround(a.first)), static_cast<int>(std::lround(a.second)),
           static_cast<int>(std::lround(b.first)), static_cast<int>(std::lround(b.second)), t, c);
    }
  }

  void text(int x, int y, std::string_view s, int scale, Rgb c) {
    for (char ch : s) {
      const auto& cols = font::glyph(ch);
      for (int gx = 0; gx < font::kGlyphWidth; ++gx)
        for (int gy = 0; gy < font::kGlyphHeight; ++gy)
          if (cols[static_cast<std::size_t>(gx)] >> gy & 1) fill({x + gx * scale, y + gy * scale, scale, scale}, c);
      x += font::kAdvance * scale;
    }
  }

  // Nearest-neighbour stretch of `src` onto `r`.
  void blit(const Image& src, const BoundingBox& r) {
    if (src.empty() || r.w <= 0 || r.h <= 0) return;
    for (int y = 0; y < r.h; ++y)
      for (int x = 0; x < r.w; ++x)
        put(r.x + x, r.y + y,
            src.at(static_cast<int>(static_cast<long long>(x) * src.width() / r.w),
                   static_cast<int>(static_cast<long long>(y) * src.height() / r.h)));
  }

 private:
  Image& img_;
  BoundingBox clip_;
};

namespace detail {

struct PaintCtx {
  Canvas& cv;
  const SceneNode& node;
  BoundingBox b;
  Rgb bg;
  Rgb fg;
  int pad;
  int scale;
};

inline int fit_scale(int scale, int avail_h) { return std::max(1, std::min(scale, (avail_h - 2) / font::kGlyphHeight)); }

inline void text_left(PaintCtx& p, int x, std::string_view s) {
  p.cv.text(x, p.b.y + (p.b.h - text_height(p.scale)) / 2, s, p.scale, p.fg);
}

inline void text_center(PaintCtx& p, std::string_view s, int dy = 0) {
  p.cv.text(p.b.x + (p.b.w - text_width(s, p.scale)) / 2, p.b.y + (p.b.h - text_height(p.scale)) / 2 + dy, s,
            p.scale, p.fg);
}

inline Rgb shade(Rgb c) { return blend(c, Rgb{0, 0, 0}, 0.3); }

inline void raised_panel(PaintCtx& p) {
  const int rad = std::min(6, std::min(p.b.w, p.b.h) / 4);
  p.cv.rounded_fill(p.b, rad, p.bg);
  const int t = std::max(2, p.b.h / 16);
  p.cv.fill({p.b.x + rad, p.b.bottom() - t, p.b.w - 2 * rad, t}, shade(p.bg));
}

inline void crosshatch(PaintCtx& p, const BoundingBox& r, int step) {
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) {
      const int u = x - r.x, v = y - r.y;
      if ((u + v) % step == 0 || ((u - v) % step + step) % step == 0) p.cv.put(x, y, p.fg);
    }
  p.cv.outline(r, 1, p.fg);
}

inline void check_mark(Canvas& cv, const BoundingBox& r, int t, Rgb c) {
  cv.polyline({{r.x + r.w * 0.15, r.y + r.h * 0.5}, {r.x + r.w * 0.4, r.y + r.h * 0.8}, {r.x + r.w * 0.85, r.y + r.h * 0.2}},
              false, t, c);
}

inline std::vector<std::pair<double, double>> star_points(double cx, double cy, double r) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 10; ++i) {
    const double rr = i % 2 == 0 ? r : r * 0.42;
    const double a = -std::numbers::pi / 2 + i * std::numbers::pi / 5;
    pts.emplace_back(cx + rr * std::cos(a), cy + rr * std::sin(a));
  }
  return pts;
}

// Square indicator box at the left edge, shared by check boxes and radios.
inline BoundingBox indicator_box(const PaintCtx& p) {
  const int m = std::max(3, std::min(p.b.h - 2 * p.pad, 40));
  return {p.b.x + p.pad, p.b.y + (p.b.h - m) / 2, m, m};
}

inline void paint_leaf(PaintCtx& p) {
  const auto& n = p.node;
  const auto& b = p.b;
  const ComponentClass cls = n.component.value_or(ComponentClass::ImageView);
  const Rgb faint = blend(p.bg, p.fg, 0.35);
  switch (cls) {
    case ComponentClass::TextView:
      p.cv.fill(b, p.bg);
      text_left(p, b.x + p.pad, n.text);
      break;
    case ComponentClass::Button:
      raised_panel(p);
      text_center(p, n.text);
      break;
    case ComponentClass::ImageView:
      p.cv.fill(b, p.bg);
      if (n.asset) p.cv.blit(*n.asset, b);
      else crosshatch(p, b, 8);
      break;
    case ComponentClass::ImageButton: {
      raised_panel(p);
      const int m = std::max(2, std::min(b.w, b.h) - 2 * p.pad - 2);
      const BoundingBox icon{b.x + (b.w - m) / 2, b.y + (b.h - m) / 2, m, m};
      if (n.asset) p.cv.blit(*n.asset, icon);
      else crosshatch(p, icon, 6);
      break;
    }
    case ComponentClass::EditText: {
      p.cv.fill(b, p.bg);
      text_left(p, b.x + p.pad, n.text);
      const int t = std::max(2, b.h / 20);
      p.cv.fill({b.x + p.pad, b.bottom() - p.pad - t, b.w - 2 * p.pad, t}, p.fg);
      break;
    }
    case ComponentClass::CheckedTextView: {
      p.cv.fill(b, p.bg);
      text_left(p, b.x + p.pad, n.text);
      const int m = std::max(3, std::min(b.h - 2 * p.pad, 40));
      const BoundingBox box{b.right() - p.pad - m, b.y + (b.h - m) / 2, m, m};
      check_mark(p.cv, box, std::max(2, m / 7), n.state.checked ? p.fg : faint);
      break;
    }
    case ComponentClass::CheckBox: {
      p.cv.fill(b, p.bg);
      const BoundingBox box = indicator_box(p);
      const int t = std::max(2, box.w / 10);
      if (n.state.checked) {
        p.cv.fill(box, p.fg);
        check_mark(p.cv, box, t, p.bg);
      } else {
        p.cv.outline(box, t, p.fg);
      }
      text_left(p, box.right() + p.pad, n.text);
      break;
    }
    case ComponentClass::RadioButton: {
      p.cv.fill(b, p.bg);
      const BoundingBox box = indicator_box(p);
      const int r = (box.w - 1) / 2;
      const int cx = box.x + r, cy = box.y + r;
      p.cv.ring(cx, cy, r, std::max(2, r / 5), p.fg);
      if (n.state.checked) p.cv.disc(cx, cy, r / 2, p.fg);
      text_left(p, box.right() + p.pad, n.text);
      break;
    }
    case ComponentClass::ProgressBar: {
      p.cv.fill(b, p.bg);
      const int th = std::max(4, b.h / 3);
      const BoundingBox track{b.x + p.pad, b.y + (b.h - th) / 2, b.w - 2 * p.pad, th};
      p.cv.fill(track, faint);
      const int filled = static_cast<int>(std::lround(track.w * std::clamp(n.state.value, 0.0, 1.0)));
      p.cv.fill({track.x, track.y, filled, track.h}, p.fg);
      break;
    }
    case ComponentClass::SeekBar: {
      p.cv.fill(b, p.bg);
      const int r = std::max(3, std::min(b.h / 2 - p.pad, 16));
      const int x0 = b.x + p.pad + r, x1 = b.right() - p.pad - r - 1;
      const int cy = b.y + b.h / 2;
      const int cx = x0 + static_cast<int>(std::lround((x1 - x0) * std::clamp(n.state.value, 0.0, 1.0)));
      const int t = std::max(2, b.h / 10);
      p.cv.fill({x0, cy - t / 2, x1 - x0 + 1, t}, faint);
      p.cv.fill({x0, cy - t / 2, cx - x0 + 1, t}, p.fg);
      p.cv.disc(cx, cy, r, p.fg);
      break;
    }
    case ComponentClass::NumberPicker: {
      p.cv.fill(b, p.bg);
      const std::string label = n.text.empty() ? std::to_string(n.state.number) : n.text;
      p.scale = fit_scale(p.scale, b.h / 2);
      text_center(p, label);
      const int cw = std::max(4, std::min(b.w / 3, b.h / 4));
      const int ch = std::max(2, cw / 2);
      const double cx = b.x + b.w / 2.0;
      const double top = b.y + p.pad, bot = b.bottom() - p.pad;
      p.cv.polygon({{cx - cw / 2.0, top + ch}, {cx, top}, {cx + cw / 2.0, top + ch}}, p.fg);
      p.cv.polygon({{cx - cw / 2.0, bot - ch}, {cx + cw / 2.0, bot - ch}, {cx, bot}}, p.fg);
      const int half = text_height(p.scale) / 2 + std::max(2, p.pad / 2);
      p.cv.fill({b.x + p.pad, b.y + b.h / 2 - half - 1, b.w - 2 * p.pad, 1}, faint);
      p.cv.fill({b.x + p.pad, b.y + b.h / 2 + half, b.w - 2 * p.pad, 1}, faint);
      break;
    }
    case ComponentClass::Switch: {
      p.cv.fill(b, p.bg);
      text_left(p, b.x + p.pad, n.text);
      const int ph = std::max(4, std::min(b.h - 2 * p.pad, 32));
      const int pw = 2 * ph;
      const BoundingBox pill{b.right() - p.pad - pw, b.y + (b.h - ph) / 2, pw, ph};
      const int r = ph / 2;
      if (n.state.checked) {
        p.cv.rounded_fill(pill, r, p.fg);
        p.cv.disc(pill.right() - r - 1, pill.y + r, std::max(1, r - 2), p.bg);
      } else {
        p.cv.rounded_fill(pill, r, faint);
        p.cv.disc(pill.x + r, pill.y + r, std::max(1, r - 1), p.fg);
      }
      break;
    }
    case ComponentClass::ToggleButton: {
      raised_panel(p);
      const std::string label = n.text.empty() ? (n.state.checked ? "ON" : "OFF") : n.text;
      const int bar = std::max(2, b.h / 10);
      text_center(p, label, -bar);
      p.cv.fill({b.x + b.w / 4, b.bottom() - p.pad - bar - 2, b.w / 2, bar}, n.state.checked ? p.fg : faint);
      break;
    }
    case ComponentClass::RatingBar: {
      p.cv.fill(b, p.bg);
      const double cw = (b.w - 2.0 * p.pad) / 5.0;
      const double r = std::max(2.0, std::min(cw, static_cast<double>(b.h - 2 * p.pad)) / 2.0 - 1.0);
      for (int i = 0; i < 5; ++i) {
        const auto pts = star_points(b.x + p.pad + cw * (i + 0.5), b.y + b.h / 2.0, r);
        if (i < n.state.number) p.cv.polygon(pts, p.fg);
        else p.cv.polyline(pts, true, std::max(1, static_cast<int>(r / 8)), p.fg);
      }
      break;
    }
    case ComponentClass::Spinner: {
      p.cv.fill(b, p.bg);
      p.cv.outline(b, 1, faint);
      text_left(p, b.x + p.pad, n.text);
      const double tw = std::max(4.0, std::min(b.h / 2.0, b.w / 4.0));
      const double tx = b.right() - p.pad - tw, ty = b.y + (b.h - tw / 2.0) / 2.0;
      p.cv.polygon({{tx, ty}, {tx + tw, ty}, {tx + tw / 2.0, ty + tw / 2.0}}, p.fg);
      break;
    }
  }
}

inline void paint_node(Image& img, const SceneNode& n, const BoundingBox& parent_clip, RenderReport& report) {
  const BoundingBox clip = clip_box(n.bounds, parent_clip);
  if (clip != n.bounds) ++report.clipped_nodes;
  if (clip.w <= 0 || clip.h <= 0) return;
  Canvas cv(img, clip);
  if (n.kind == NodeKind::Container || !n.component) {
    if (n.background) cv.fill(n.bounds, *n.background);
  } else {
    const Rgb bg = n.background.value_or(Rgb{255, 255, 255});
    const double luma = 0.299 * bg.r + 0.587 * bg.g + 0.114 * bg.b;
    const Rgb fg = n.foreground.value_or(luma > 127.5 ? Rgb{0, 0, 0} : Rgb{255, 255, 255});
    PaintCtx p{cv, n, n.bounds, bg, fg, std::max(2, std::min(n.bounds.w, n.bounds.h) / 6), 1};
    p.scale = fit_scale(n.text_scale, n.bounds.h);
    paint_leaf(p);
    if (n.edge) cv.outline(n.bounds, 1, *n.edge);
  }
  for (const auto& c : n.children) paint_node(img, c, clip, report);
}

}  // namespace detail

inline Image render(const Scene& scene, RenderReport* report = nullptr) {
  if (scene.width <= 0 || scene.height <= 0) throw ValidationError("render: canvas must have positive size");
  Image img(scene.width, scene.height, scene.background);
  RenderReport local;
  detail::paint_node(img, scene.root, img.rect(), local);
  if (report) *report = local;
  return img;
}

inline SceneNode scene_node_from(const GuiNode& n) {
  SceneNode s;
  s.kind = n.kind;
  s.type = n.type;
  s.component = n.component;
  s.bounds = n.bounds;
  s.text = n.text.value_or("");
  if (n.is_leaf()) {
    s.background = Rgb{235, 235, 235};
    s.foreground = Rgb{0, 0, 0};
    s.text_scale = std::max(1, static_cast<int>(std::lround(n.bounds.h / 10.0)));
  }
  for (const auto& c : n.children) s.children.push_back(scene_node_from(c));
  return s;
}

// Screen dumps carry no styles: leaves get a light panel and black ink.
inline Image render(const ScreenRecord& rec, RenderReport* report = nullptr) {
  Scene scene{rec.width, rec.height, Rgb{255, 255, 255}, scene_node_from(rec.root)};
  return render(scene, report);
}

}  // namespace guiproto
