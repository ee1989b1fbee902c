#pragma once

// Labeled corpus construction: screen and component cleaning filters, hue
// perturbation, the synthetic screen generator, train/valid/test segmentation
// and the on-disk corpus layout.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/io.hpp"
#include "guiproto/parsers.hpp"
#include "guiproto/random.hpp"
#include "guiproto/render.hpp"
#include "guiproto/style.hpp"

namespace guiproto {

enum class Provenance : std::uint8_t { Organic, Synthetic, Perturbed };
enum class Split : std::uint8_t { Train, Valid, Test };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Organic: return "organic";
    case Provenance::Synthetic: return "synthetic";
    case Provenance::Perturbed: return "perturbed";
  }
  return "?";
}

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "organic") return Provenance::Organic;
  if (s == "synthetic") return Provenance::Synthetic;
  if (s == "perturbed") return Provenance::Perturbed;
  throw ValidationError("unknown provenance \"" + std::string(s) + "\"");
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split \"" + std::string(s) + "\"");
}

struct ScreenSample {
  ScreenRecord record;
  Image screenshot;
  Provenance origin = Provenance::Organic;
};

struct LabeledComponent {
  std::string id;
  Image crop;
  ComponentClass label = ComponentClass::TextView;
  std::string screen_id;
  BoundingBox box;
  Provenance provenance = Provenance::Organic;
  std::string source_id;  // perturbed copies: the component they were made from
  double hue = 0.0;       // perturbed copies: rotation in degrees
};

// ---------------------------------------------------------------------------
// Screen filters

struct ScreenFilterConfig {
  int portrait_width = 1200;
  int portrait_height = 1920;
  // Drop portrait screens whose size differs from the configured dimensions.
  bool require_portrait_dims = true;
  double webview_max_fraction = 0.5;
};

struct ScreenFilterResult {
  std::vector<ScreenSample> kept;
  std::vector<AuditEntry> audit;
};

namespace detail {

inline double webview_coverage(const ScreenRecord& rec) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(rec.width) * static_cast<std::size_t>(rec.height), 0);
  bool any = false;
  visit_preorder(rec.root, [&](const GuiNode& n, int) {
    if (n.type != "WebView") return;
    any = true;
    const BoundingBox b = clip_box(n.bounds, {0, 0, rec.width, rec.height});
    for (int y = b.y; y < b.bottom(); ++y)
      std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(y) * rec.width + b.x, b.w, std::uint8_t{1});
  });
  if (!any) return 0.0;
  const auto covered = std::count(mask.begin(), mask.end(), std::uint8_t{1});
  return static_cast<double>(covered) / static_cast<double>(mask.size());
}

inline bool has_functional_leaf(const GuiNode& root) {
  bool found = false;
  visit_preorder(root, [&](const GuiNode& n, int) { found = found || (n.is_leaf() && n.component.has_value()); });
  return found;
}

}  // namespace detail

inline ScreenFilterResult filter_screens(std::vector<ScreenSample> samples, const ScreenFilterConfig& cfg = {}) {
  ScreenFilterResult out;
  for (auto& s : samples) {
    const auto& r = s.record;
    if (s.screenshot.width() != r.width || s.screenshot.height() != r.height)
      throw ValidationError("screen " + r.id + ": screenshot is " + std::to_string(s.screenshot.width()) + "x" +
                            std::to_string(s.screenshot.height()) + " but the dump is " + std::to_string(r.width) +
                            "x" + std::to_string(r.height));
    if (r.width > r.height) {
      out.audit.push_back({r.id, "landscape"});
    } else if (cfg.require_portrait_dims && (r.width != cfg.portrait_width || r.height != cfg.portrait_height)) {
      out.audit.push_back({r.id, "wrong-dimensions"});
    } else if (!detail::has_functional_leaf(r.root)) {
      out.audit.push_back({r.id, "layout-only"});
    } else if (detail::webview_coverage(r) > cfg.webview_max_fraction) {
      out.audit.push_back({r.id, "webview"});
    } else {
      out.kept.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Component extraction

struct ComponentFilterConfig {
  // Crops with at most this many distinct RGB values are treated as solid colour.
  std::size_t max_solid_colors = 2;
};

struct ExtractResult {
  std::vector<LabeledComponent> components;
  std::vector<AuditEntry> audit;
};

inline std::size_t distinct_colors(const Image& img, std::size_t stop_after) {
  std::unordered_set<std::uint32_t> seen;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      seen.insert(img.at(x, y).packed());
      if (seen.size() > stop_after) return seen.size();
    }
  return seen.size();
}

inline ExtractResult extract_components(const ScreenRecord& rec, const Image& screenshot,
                                        Provenance origin = Provenance::Organic,
                                        const ComponentFilterConfig& cfg = {}) {
  ExtractResult out;
  const auto ls = leaves(rec.root);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto& n = ls[i];
    const std::string id = rec.id + "_" + std::to_string(i);
    if (!n.bounds.valid() || !n.bounds.inside(screenshot.width(), screenshot.height())) {
      out.audit.push_back({id, "invalid-bounds"});
      continue;
    }
    if (!n.component) {
      out.audit.push_back({id, "missing-type"});
      continue;
    }
    Image crop = screenshot.crop(n.bounds);
    if (distinct_colors(crop, cfg.max_solid_colors) <= cfg.max_solid_colors) {
      out.audit.push_back({id, "solid-color"});
      continue;
    }
    out.components.push_back({id, std::move(crop), *n.component, rec.id, n.bounds, origin, "", 0.0});
  }
  return out;
}

struct RareFilterResult {
  std::vector<LabeledComponent> kept;
  std::vector<AuditEntry> audit;
};

inline RareFilterResult filter_rare_classes(std::vector<LabeledComponent> comps, int min_count) {
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  std::array<int, kNumClasses> counts{};
  for (const auto& c : comps) ++counts[ordinal(c.label)];
  RareFilterResult out;
  for (auto& c : comps) {
    if (counts[ordinal(c.label)] < min_count) out.audit.push_back({c.id, "rare-class"});
    else out.kept.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hue perturbation

struct Hsb {
  double h = 0, s = 0, b = 0;  // degrees, [0,1], [0,1]
};

inline Hsb rgb_to_hsb(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), d = mx - mn;
  Hsb out{0.0, mx > 0 ? d / mx : 0.0, mx};
  if (d > 0) {
    if (mx == r) out.h = 60.0 * std::fmod((g - b) / d + 6.0, 6.0);
    else if (mx == g) out.h = 60.0 * ((b - r) / d + 2.0);
    else out.h = 60.0 * ((r - g) / d + 4.0);
  }
  return out;
}

inline Rgb hsb_to_rgb(Hsb c) {
  const double h = std::fmod(std::fmod(c.h, 360.0) + 360.0, 360.0);
  const double chroma = c.b * c.s;
  const double x = chroma * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
  const double m = c.b - chroma;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h / 60.0)) {
    case 0: r = chroma, g = x; break;
    case 1: r = x, g = chroma; break;
    case 2: g = chroma, b = x; break;
    case 3: g = x, b = chroma; break;
    case 4: r = x, b = chroma; break;
    default: r = chroma, b = x; break;
  }
  auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)); };
  return {q(r + m), q(g + m), q(b + m)};
}

// Rotates every pixel's hue; grey pixels (saturation 0) are left as they are.
inline Image perturb_hue(const Image& img, double degrees) {
  if (!(degrees >= 0.0 && degrees < 360.0)) throw ValidationError("hue rotation must be in [0, 360)");
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      if (c.r == c.g && c.g == c.b) continue;
      Hsb h = rgb_to_hsb(c);
      h.h += degrees;
      out.set(x, y, hsb_to_rgb(h));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic screens

struct SynthConfig {
  int width = 600;
  int height = 960;
  int components = 4;
};

struct SynthScreen {
  ScreenRecord record;
  Image screenshot;
  Scene scene;
};

namespace detail {

inline constexpr std::array<std::string_view, 40> kWords = {
    "Sign", "up", "Log", "in", "Save", "Cancel", "Next", "Back", "Home", "Profile", "Settings", "Email", "Name",
    "Search", "Share", "Done", "Open", "Menu", "Help", "About", "Play", "Edit", "Add", "Send", "More", "Photos",
    "Music", "Notify", "Wi-Fi", "Sound", "Dark", "mode", "Remember", "me", "Accept", "terms", "Daily", "Alerts",
    "Sync", "Password"};

struct SizeRange {
  int wmin, wmax, hmin, hmax;
};

inline SizeRange size_range(ComponentClass c) {
  switch (c) {
    case ComponentClass::TextView: return {120, 480, 24, 60};
    case ComponentClass::ImageView: return {80, 360, 80, 260};
    case ComponentClass::Button: return {100, 300, 40, 90};
    case ComponentClass::ImageButton: return {48, 140, 48, 140};
    case ComponentClass::EditText: return {200, 520, 40, 80};
    case ComponentClass::CheckedTextView: return {200, 520, 40, 80};
    case ComponentClass::CheckBox: return {160, 420, 32, 70};
    case ComponentClass::RadioButton: return {160, 420, 32, 70};
    case ComponentClass::ProgressBar: return {150, 520, 16, 40};
    case ComponentClass::SeekBar: return {150, 520, 30, 60};
    case ComponentClass::NumberPicker: return {60, 140, 100, 200};
    case ComponentClass::Switch: return {180, 480, 36, 70};
    case ComponentClass::ToggleButton: return {100, 260, 40, 90};
    case ComponentClass::RatingBar: return {180, 400, 30, 70};
    case ComponentClass::Spinner: return {160, 480, 40, 80};
  }
  return {50, 100, 20, 40};
}

inline double gray(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

inline Rgb random_color(Rgb contrast_with, double min_gray_diff, Rgb fallback_dark, Rgb fallback_light, Rng& rng) {
  for (int i = 0; i < 64; ++i) {
    const Rgb c{static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
    if (std::abs(gray(c) - gray(contrast_with)) >= min_gray_diff) return c;
  }
  return gray(contrast_with) > 127.5 ? fallback_dark : fallback_light;
}

inline std::string random_text(Rng& rng, int max_px, int scale) {
  std::string out;
  const int words = rng.uniform_int(1, 3);
  for (int i = 0; i < words; ++i) {
    std::string next = out.empty() ? "" : out + " ";
    next += kWords[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kWords.size()) - 1))];
    if (text_width(next, scale) > max_px) break;
    out = std::move(next);
  }
  if (out.empty()) {
    std::string w(kWords[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kWords.size()) - 1))]);
    while (w.size() > 1 && text_width(w, scale) > max_px) w.pop_back();
    out = w;
  }
  return out;
}

// Horizontal room left for a label once the class's indicator is drawn.
inline int label_room(ComponentClass c, int w, int h) {
  const int pad = std::max(2, std::min(w, h) / 6);
  switch (c) {
    case ComponentClass::CheckBox:
    case ComponentClass::RadioButton: return w - 3 * pad - std::min(h - 2 * pad, 40);
    case ComponentClass::Switch: return w - 3 * pad - 2 * std::min(h - 2 * pad, 32);
    case ComponentClass::CheckedTextView: return w - 3 * pad - std::min(h - 2 * pad, 40);
    case ComponentClass::Spinner: return w - 3 * pad - std::max(4, std::min(h / 2, w / 4));
    default: return w - 2 * pad;
  }
}

// One step away from `c` in every channel without leaving its 4-bit
// quantization bucket: a frame that real renderers' anti-aliasing would
// produce, invisible to colour-histogram style inference.
inline Rgb near_shade(Rgb c) {
  const auto step = [](std::uint8_t v) { return static_cast<std::uint8_t>((v & 15) ? v - 1 : v + 1); };
  return {step(c.r), step(c.g), step(c.b)};
}

inline SceneNode synth_leaf(ComponentClass cls, BoundingBox b, Rgb screen_bg, Rng& rng) {
  SceneNode n;
  n.kind = NodeKind::Leaf;
  n.component = cls;
  n.type = std::string(to_string(cls));
  n.bounds = b;
  n.background = random_color(screen_bg, 80.0, Rgb{20, 20, 20}, Rgb{240, 240, 240}, rng);
  n.foreground = is_text_bearing(cls) ? random_color(*n.background, 100.0, Rgb{0, 0, 0}, Rgb{255, 255, 255}, rng)
                                      : contrast_default(*n.background);
  n.edge = near_shade(*n.background);
  n.text_scale = std::max(1, static_cast<int>(std::lround(b.h / 10.0)));
  n.state.checked = rng.coin();
  n.state.value = rng.uniform(0.1, 0.9);
  n.state.number = cls == ComponentClass::RatingBar ? rng.uniform_int(0, 5) : rng.uniform_int(0, 99);
  const int scale = std::max(1, std::min(n.text_scale, (b.h - 2) / font::kGlyphHeight));
  switch (cls) {
    case ComponentClass::TextView:
    case ComponentClass::Button:
    case ComponentClass::EditText:
    case ComponentClass::CheckedTextView:
    case ComponentClass::CheckBox:
    case ComponentClass::RadioButton:
    case ComponentClass::Switch:
    case ComponentClass::Spinner: n.text = random_text(rng, label_room(cls, b.w, b.h), scale); break;
    case ComponentClass::ToggleButton: n.text = n.state.checked ? "ON" : "OFF"; break;
    default: break;
  }
  return n;
}

inline GuiNode to_gui_node(const SceneNode& s) {
  GuiNode g;
  g.kind = s.kind;
  g.type = s.type;
  g.component = s.component;
  g.bounds = s.bounds;
  if (!s.text.empty()) g.text = s.text;
  for (const auto& c : s.children) g.children.push_back(to_gui_node(c));
  return g;
}

inline BoundingBox union_of(const std::vector<SceneNode>& nodes) {
  BoundingBox u = nodes.front().bounds;
  for (const auto& n : nodes) u = union_box(u, n.bounds);
  return u;
}

inline SceneNode scene_container(std::string type, std::vector<SceneNode> children) {
  SceneNode n;
  n.kind = NodeKind::Container;
  n.type = std::move(type);
  n.bounds = union_of(children);
  n.children = std::move(children);
  return n;
}

}  // namespace detail

// A portrait screen holding `cfg.components` instances of `cls` with seeded
// sizes, states, text and colours. Leaves are separated by at least 16 px.
inline SynthScreen synthesize_screen(ComponentClass cls, std::uint64_t seed, const SynthConfig& cfg = {},
                                     std::string id = {}) {
  if (cfg.width < 200 || cfg.height < 200 || cfg.components < 1)
    throw ConfigError("synthetic screens need at least 200x200 px and one component");
  Rng rng(seed);
  const int W = cfg.width, H = cfg.height;
  const int margin = rng.uniform_int(16, 40);
  const int inner_w = W - 2 * margin, inner_h = H - 2 * margin;
  const auto range = detail::size_range(cls);

  std::vector<std::pair<int, int>> sizes;
  for (int i = 0; i < cfg.components; ++i) {
    int w = std::min(inner_w, rng.uniform_int(range.wmin, range.wmax));
    int h = rng.uniform_int(range.hmin, range.hmax);
    if (cls == ComponentClass::RatingBar) w = std::max(w, std::min(inner_w, 4 * h));
    sizes.emplace_back(w, h);
  }

  // Rows of one or two items.
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < cfg.components;) {
    if (i + 1 < cfg.components && rng.coin(0.4) && sizes[i].first + sizes[i + 1].first + 16 <= inner_w) {
      rows.push_back({i, i + 1});
      i += 2;
    } else {
      rows.push_back({i});
      i += 1;
    }
  }
  std::vector<int> gaps(rows.size() - 1);
  for (auto& g : gaps) g = rng.uniform_int(16, 48);
  auto row_h = [&](const std::vector<int>& r) {
    int h = 0;
    for (int i : r) h = std::max(h, sizes[i].second);
    return h;
  };
  auto total_h = [&] {
    int t = 0;
    for (const auto& r : rows) t += row_h(r);
    for (int g : gaps) t += g;
    return t;
  };
  if (total_h() > inner_h) {
    for (auto& g : gaps) g = 16;
    const double f = static_cast<double>(inner_h - 16 * static_cast<int>(gaps.size())) /
                     (total_h() - 16 * static_cast<int>(gaps.size()));
    for (auto& s : sizes) s.second = std::max(8, static_cast<int>(s.second * f));
  }

  const Rgb screen_bg{static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                      static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                      static_cast<std::uint8_t>(rng.uniform_int(0, 255))};

  static constexpr std::array<std::string_view, 3> kRowTypes = {"LinearLayout", "RelativeLayout", "FrameLayout"};
  std::vector<SceneNode> row_nodes;
  int y = margin + rng.uniform_int(0, std::max(0, (inner_h - total_h()) / 2));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int rh = row_h(rows[r]);
    std::vector<SceneNode> items;
    if (rows[r].size() == 1) {
      const auto [w, h] = sizes[rows[r][0]];
      const int x = margin + rng.uniform_int(0, inner_w - w);
      items.push_back(detail::synth_leaf(cls, {x, y + (rh - h) / 2, w, h}, screen_bg, rng));
    } else {
      const auto [w1, h1] = sizes[rows[r][0]];
      const auto [w2, h2] = sizes[rows[r][1]];
      const int slack = inner_w - w1 - w2;
      const int gap = rng.uniform_int(16, std::max(16, std::min(slack, 120)));
      const int x = margin + rng.uniform_int(0, slack - gap);
      items.push_back(detail::synth_leaf(cls, {x, y + (rh - h1) / 2, w1, h1}, screen_bg, rng));
      items.push_back(detail::synth_leaf(cls, {x + w1 + gap, y + (rh - h2) / 2, w2, h2}, screen_bg, rng));
    }
    if (items.size() == 1) {
      row_nodes.push_back(std::move(items.front()));
    } else {
      row_nodes.push_back(detail::scene_container(
          std::string(kRowTypes[static_cast<std::size_t>(rng.uniform_int(0, 2))]), std::move(items)));
    }
    y += rh + (r < gaps.size() ? gaps[r] : 0);
  }

  SceneNode root;
  root.kind = NodeKind::Container;
  root.type = "FrameLayout";
  root.bounds = {0, 0, W, H};
  if (rng.coin(0.7)) {
    root.children.push_back(
        detail::scene_container(rng.coin() ? "LinearLayout" : "RelativeLayout", std::move(row_nodes)));
  } else {
    root.children = std::move(row_nodes);
  }

  SynthScreen out;
  out.scene = Scene{W, H, screen_bg, std::move(root)};
  out.screenshot = render(out.scene);
  out.record.id = id.empty() ? "synth_" + std::string(to_string(cls)) + "_" + std::to_string(seed) : std::move(id);
  out.record.width = W;
  out.record.height = H;
  out.record.root = detail::to_gui_node(out.scene.root);
  return out;
}

// The mockup a designer would export for a screen: its leaves, flat, with text.
inline MockupDocument mockup_from_screen(const ScreenRecord& rec) {
  MockupDocument doc{rec.width, rec.height, {}};
  for (const auto& l : leaves(rec.root)) doc.objects.push_back({l.bounds, l.text, std::nullopt});
  return doc;
}

// Seed for screen `index` of class `cls` under a corpus-wide seed.
inline std::uint64_t synth_seed(std::uint64_t base, ComponentClass cls, std::uint64_t index) {
  std::uint64_t z = base ^ (static_cast<std::uint64_t>(ordinal(cls) + 1) << 40) ^ (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentConfig {
  double train = 0.75;
  double valid = 0.15;
  double test = 0.10;
  int augment_target = 500;
  std::uint64_t seed = 42;
  // Let synthesized screens stand in for organic ones (desk corpora have no mined screens).
  bool synthetic_as_organic = false;
};

struct ManifestEntry {
  std::string id;
  ComponentClass label = ComponentClass::TextView;
  Split split = Split::Train;
  Provenance provenance = Provenance::Organic;
  std::string screen_id;
  BoundingBox box;
  std::string source_id;
  double hue = 0.0;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct CorpusManifest {
  std::uint64_t seed = 0;
  std::size_t screen_count = 0;
  double train = 0.75, valid = 0.15, test = 0.10;
  int augment_target = 0;
  bool synthetic_as_organic = false;
  std::vector<AuditEntry> audit;
  std::vector<std::string> warnings;
  std::vector<ManifestEntry> entries;

  std::array<std::size_t, kNumClasses> class_counts(std::optional<Split> split = std::nullopt) const {
    std::array<std::size_t, kNumClasses> out{};
    for (const auto& e : entries)
      if (!split || e.split == *split) ++out[ordinal(e.label)];
    return out;
  }
  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](auto& e) { return e.split == s; }));
  }
  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct SegmentResult {
  CorpusManifest manifest;
  std::vector<LabeledComponent> components;  // parallel to manifest.entries
};

inline SegmentResult segment(std::vector<LabeledComponent> comps, const SegmentConfig& cfg = {}) {
  if (cfg.train < 0 || cfg.valid < 0 || cfg.test < 0 || std::abs(cfg.train + cfg.valid + cfg.test - 1.0) > 1e-9)
    throw ConfigError("split fractions must be non-negative and sum to 1");
  if (cfg.augment_target < 0) throw ConfigError("augment_target must be non-negative");
  Rng rng(cfg.seed);

  SegmentResult out;
  auto& m = out.manifest;
  m.seed = cfg.seed;
  m.train = cfg.train, m.valid = cfg.valid, m.test = cfg.test;
  m.augment_target = cfg.augment_target;
  m.synthetic_as_organic = cfg.synthetic_as_organic;
  std::set<std::string> screens;
  for (const auto& c : comps) screens.insert(c.screen_id);
  m.screen_count = screens.size();

  auto splittable = [&](const LabeledComponent& c) {
    return c.provenance == Provenance::Organic || (cfg.synthetic_as_organic && c.provenance == Provenance::Synthetic);
  };

  std::vector<Split> split(comps.size(), Split::Train);
  std::array<std::vector<std::size_t>, kNumClasses> organic;
  std::array<bool, kNumClasses> present{};
  for (std::size_t i = 0; i < comps.size(); ++i) {
    present[ordinal(comps[i].label)] = true;
    if (splittable(comps[i])) organic[ordinal(comps[i].label)].push_back(i);
  }
  // Stratified per class so every class reaches every split when it can.
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    auto& idx = organic[k];
    if (present[k] && idx.empty())
      m.warnings.push_back("class " + std::string(kClassNames[k]) + " has no organic components; it trains on synthetic data only");
    rng.shuffle(idx);
    const auto n = idx.size();
    const auto n_train = static_cast<std::size_t>(std::llround(cfg.train * static_cast<double>(n)));
    const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(cfg.valid * static_cast<double>(n))));
    for (std::size_t j = 0; j < n; ++j) split[idx[j]] = j < n_train ? Split::Train : (j < n_train + n_valid ? Split::Valid : Split::Test);
  }

  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    m.entries.push_back({c.id, c.label, split[i], c.provenance, c.screen_id, c.box, c.source_id, c.hue});
  }

  // Hue-perturbed copies of Train members top up small Train classes.
  std::array<std::vector<std::size_t>, kNumClasses> train_members;
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (split[i] == Split::Train) train_members[ordinal(comps[i].label)].push_back(i);
  std::vector<LabeledComponent> extra;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const auto& members = train_members[k];
    if (members.empty()) continue;
    for (std::size_t n = members.size(), copy = 0; n < static_cast<std::size_t>(cfg.augment_target); ++n, ++copy) {
      const auto& src = comps[members[static_cast<std::size_t>(rng.next() % members.size())]];
      const double deg = rng.uniform(0.0, 360.0);
      LabeledComponent p{src.id + "_p" + std::to_string(copy), perturb_hue(src.crop, deg), src.label, src.screen_id,
                         src.box, Provenance::Perturbed, src.id, deg};
      m.entries.push_back({p.id, p.label, Split::Train, p.provenance, p.screen_id, p.box, p.source_id, p.hue});
      extra.push_back(std::move(p));
    }
  }
  out.components = std::move(comps);
  for (auto& e : extra) out.components.push_back(std::move(e));
  return out;
}

// ---------------------------------------------------------------------------
// Manifest JSON

inline nlohmann::ordered_json manifest_to_json(const CorpusManifest& m) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["seed"] = m.seed;
  j["screen_count"] = m.screen_count;
  j["fractions"] = {{"train", m.train}, {"valid", m.valid}, {"test", m.test}};
  j["augment_target"] = m.augment_target;
  j["synthetic_as_organic"] = m.synthetic_as_organic;
  ordered_json counts = ordered_json::object();
  const auto all = m.class_counts();
  for (std::size_t k = 0; k < kNumClasses; ++k) counts[std::string(kClassNames[k])] = all[k];
  j["class_counts"] = counts;
  j["split_counts"] = {{"train", m.count(Split::Train)}, {"valid", m.count(Split::Valid)}, {"test", m.count(Split::Test)}};
  j["warnings"] = m.warnings;
  ordered_json audit = ordered_json::array();
  for (const auto& a : m.audit) audit.push_back({{"subject", a.subject}, {"reason", a.reason}});
  j["audit"] = audit;
  ordered_json entries = ordered_json::array();
  for (const auto& e : m.entries) {
    ordered_json je;
    je["id"] = e.id;
    je["label"] = std::string(to_string(e.label));
    je["split"] = std::string(to_string(e.split));
    je["provenance"] = std::string(to_string(e.provenance));
    je["screen"] = e.screen_id;
    je["box"] = {e.box.x, e.box.y, e.box.w, e.box.h};
    if (e.provenance == Provenance::Perturbed) {
      je["source"] = e.source_id;
      je["hue"] = e.hue;
    }
    entries.push_back(std::move(je));
  }
  j["components"] = entries;
  return j;
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j) {
  try {
    CorpusManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.screen_count = j.at("screen_count").get<std::size_t>();
    m.train = j.at("fractions").at("train").get<double>();
    m.valid = j.at("fractions").at("valid").get<double>();
    m.test = j.at("fractions").at("test").get<double>();
    m.augment_target = j.at("augment_target").get<int>();
    m.synthetic_as_organic = j.at("synthetic_as_organic").get<bool>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& a : j.at("audit")) m.audit.push_back({a.at("subject").get<std::string>(), a.at("reason").get<std::string>()});
    for (const auto& je : j.at("components")) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      const auto label = parse_component_class(je.at("label").get<std::string>());
      if (!label) throw ValidationError("manifest component " + e.id + ": unknown label");
      e.label = *label;
      e.split = parse_split(je.at("split").get<std::string>());
      e.provenance = parse_provenance(je.at("provenance").get<std::string>());
      e.screen_id = je.at("screen").get<std::string>();
      const auto b = je.at("box").get<std::vector<int>>();
      if (b.size() != 4) throw ValidationError("manifest component " + e.id + ": box must have 4 integers");
      e.box = {b[0], b[1], b[2], b[3]};
      if (je.contains("source")) e.source_id = je.at("source").get<std::string>();
      if (je.contains("hue")) e.hue = je.at("hue").get<double>();
      m.entries.push_back(std::move(e));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed corpus manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// On-disk layout
//
//   <corpus>/screens/<id>/screen.xml, screen.png, meta.json
//   <corpus>/crops/<Class>/<component id>.png
//   <corpus>/manifest.json

inline fs::path crop_path(const fs::path& corpus, const ManifestEntry& e) {
  return corpus / "crops" / std::string(to_string(e.label)) / (e.id + ".png");
}

inline void write_screen(const fs::path& corpus, const ScreenSample& s) {
  const fs::path dir = corpus / "screens" / s.record.id;
  write_text_file(dir / "screen.xml", serialize_screen_dump(s.record));
  write_png(dir / "screen.png", s.screenshot);
  nlohmann::ordered_json meta;
  meta["origin"] = std::string(to_string(s.origin));
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

struct LoadedScreens {
  std::vector<ScreenSample> samples;
  std::vector<AuditEntry> audit;  // nodes dropped while parsing
};

// Loads every screen directory (sorted by name). Dumps are parsed leniently so
// noisy nodes reach the component filters instead of aborting the load.
inline LoadedScreens load_screens(const fs::path& corpus) {
  const fs::path root = corpus / "screens";
  if (!fs::is_directory(root)) throw IoError("no screens directory in " + corpus.string());
  std::vector<fs::path> dirs;
  for (const auto& d : fs::directory_iterator(root))
    if (d.is_directory()) dirs.push_back(d.path());
  std::sort(dirs.begin(), dirs.end());
  LoadedScreens out;
  for (const auto& d : dirs) {
    DumpParseOptions opts;
    opts.id = d.filename().string();
    opts.lenient = true;
    auto parsed = parse_screen_dump_audited(read_text_file(d / "screen.xml"), opts);
    parsed.record.id = d.filename().string();
    parsed.record.screenshot = (d / "screen.png").string();
    ScreenSample s{std::move(parsed.record), read_png(d / "screen.png"), Provenance::Organic};
    if (fs::exists(d / "meta.json")) {
      const auto meta = nlohmann::json::parse(read_text_file(d / "meta.json"), nullptr, false);
      if (!meta.is_discarded() && meta.contains("origin") && meta["origin"].is_string())
        s.origin = parse_provenance(meta["origin"].get<std::string>());
    }
    for (auto& a : parsed.dropped) out.audit.push_back({s.record.id + a.subject, a.reason});
    out.samples.push_back(std::move(s));
  }
  return out;
}

inline void write_manifest(const fs::path& corpus, const CorpusManifest& m) {
  write_text_file(corpus / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

inline CorpusManifest read_manifest(const fs::path& corpus) {
  const fs::path p = corpus / "manifest.json";
  if (!fs::exists(p)) throw IoError("no manifest.json in " + corpus.string() + " (run clean first)");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed manifest.json: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace guiproto
