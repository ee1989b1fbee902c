#pragma once

// Shared geometry, component taxonomy and the screen/tree data model.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace guiproto {

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (XML, JSON, model files). `line` is 0 when unknown.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line(line) {}
  std::size_t line;
};

// Well-formed input that violates a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Geometry

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  constexpr int right() const { return x + w; }
  constexpr int bottom() const { return y + h; }
  constexpr long long area() const { return static_cast<long long>(w) * h; }
  constexpr bool valid() const { return w > 0 && h > 0 && x >= 0 && y >= 0; }
  constexpr bool inside(int width, int height) const {
    return valid() && right() <= width && bottom() <= height;
  }
  constexpr bool contains(const BoundingBox& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }

  friend constexpr bool operator==(const BoundingBox&, const BoundingBox&) = default;
  friend constexpr auto operator<=>(const BoundingBox& a, const BoundingBox& b) {
    // (y, x, w, h) ordering: top-to-bottom, then left-to-right.
    return std::tuple(a.y, a.x, a.w, a.h) <=> std::tuple(b.y, b.x, b.w, b.h);
  }
};

inline long long intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const int w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const int h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (w > 0 && h > 0) ? static_cast<long long>(w) * h : 0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const long long inter = intersection_area(a, b);
  if (inter == 0) return 0.0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Smallest box covering both.
inline BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) {
  const int x = std::min(a.x, b.x), y = std::min(a.y, b.y);
  return {x, y, std::max(a.right(), b.right()) - x, std::max(a.bottom(), b.bottom()) - y};
}

// Intersection of `box` with `clip`; empty result has w or h == 0.
inline BoundingBox clip_box(const BoundingBox& box, const BoundingBox& clip) {
  const int x0 = std::max(box.x, clip.x), y0 = std::max(box.y, clip.y);
  const int x1 = std::min(box.right(), clip.right()), y1 = std::min(box.bottom(), clip.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

// ---------------------------------------------------------------------------
// Component taxonomy

enum class ComponentClass : std::uint8_t {
  TextView,
  ImageView,
  Button,
  ImageButton,
  EditText,
  CheckedTextView,
  CheckBox,
  RadioButton,
  ProgressBar,
  SeekBar,
  NumberPicker,
  Switch,
  ToggleButton,
  RatingBar,
  Spinner,
};

inline constexpr std::size_t kNumClasses = 15;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "TextView",    "ImageView",   "Button",       "ImageButton", "EditText",
    "CheckedTextView", "CheckBox", "RadioButton", "ProgressBar", "SeekBar",
    "NumberPicker", "Switch",     "ToggleButton", "RatingBar",   "Spinner",
};

inline constexpr std::array<ComponentClass, kNumClasses> all_classes() {
  std::array<ComponentClass, kNumClasses> out{};
  for (std::size_t i = 0; i < kNumClasses; ++i) out[i] = static_cast<ComponentClass>(i);
  return out;
}

constexpr std::size_t ordinal(ComponentClass c) { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(ComponentClass c) { return kClassNames[ordinal(c)]; }

inline std::optional<ComponentClass> class_from_ordinal(std::size_t i) {
  if (i >= kNumClasses) return std::nullopt;
  return static_cast<ComponentClass>(i);
}

// Strips a Java package prefix: "android.widget.Button" -> "Button".
inline std::string_view short_class_name(std::string_view name) {
  const auto dot = name.rfind('.');
  return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

inline std::optional<ComponentClass> parse_component_class(std::string_view name) {
  name = short_class_name(name);
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return static_cast<ComponentClass>(i);
  return std::nullopt;
}

// Classes whose widgets render a text label.
constexpr bool is_text_bearing(ComponentClass c) {
  switch (c) {
    case ComponentClass::TextView:
    case ComponentClass::EditText:
    case ComponentClass::Button:
    case ComponentClass::CheckedTextView:
    case ComponentClass::ToggleButton:
    case ComponentClass::CheckBox:
    case ComponentClass::RadioButton:
    case ComponentClass::Switch:
      return true;
    default:
      return false;
  }
}

// Container view types recognised in screen dumps even when they have no children.
inline bool is_container_type(std::string_view name) {
  name = short_class_name(name);
  static constexpr std::array<std::string_view, 14> known = {
      "LinearLayout", "RelativeLayout", "FrameLayout",  "GridLayout",   "TableLayout",
      "TableRow",     "ScrollView",     "HorizontalScrollView", "ListView", "GridView",
      "RecyclerView", "ViewGroup",      "ConstraintLayout", "CoordinatorLayout"};
  if (std::find(known.begin(), known.end(), name) != known.end()) return true;
  return name.size() > 6 && name.substr(name.size() - 6) == "Layout";
}

// ---------------------------------------------------------------------------
// Images

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
  constexpr std::uint32_t packed() const { return (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | b; }
};

// Row-major 8-bit RGB.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {})
      : width_(width), height_(height), pixels_(checked_size(width, height), 0) {
    if (fill != Rgb{}) this->fill(fill);
  }
  Image(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != checked_size(width, height))
      throw ValidationError("image buffer length does not match width*height*3");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }
  BoundingBox rect() const { return {0, 0, width_, height_}; }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = index(x, y);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }
  void fill(Rgb c) {
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = c.r;
      pixels_[i + 1] = c.g;
      pixels_[i + 2] = c.b;
    }
  }

  const std::vector<std::uint8_t>& data() const { return pixels_; }
  std::vector<std::uint8_t>& data() { return pixels_; }

  // Pixel-exact sub-image; the box must lie inside the image.
  Image crop(const BoundingBox& box) const {
    if (!box.inside(width_, height_)) throw ValidationError("crop box outside image");
    Image out(box.w, box.h);
    for (int y = 0; y < box.h; ++y) {
      const auto* src = &pixels_[index(box.x, box.y + y)];
      std::copy(src, src + static_cast<std::size_t>(box.w) * 3, &out.pixels_[out.index(0, y)]);
    }
    return out;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_size(int w, int h) {
    if (w < 0 || h < 0) throw ValidationError("negative image dimensions");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// ---------------------------------------------------------------------------
// GUI trees

enum class NodeKind : std::uint8_t { Leaf, Container };

struct GuiNode {
  NodeKind kind = NodeKind::Container;
  // Short view class name, e.g. "Button", "LinearLayout", or an unrecognised
  // leaf type such as "WebView". Empty when the source carried no type.
  std::string type;
  // Set for leaves whose type is one of the 15 component classes.
  std::optional<ComponentClass> component;
  BoundingBox bounds;
  std::optional<std::string> text;
  std::vector<GuiNode> children;

  bool is_leaf() const { return kind == NodeKind::Leaf; }
  bool is_container() const { return kind == NodeKind::Container; }
  bool is_unknown_leaf() const { return is_leaf() && !component; }

  static GuiNode leaf(ComponentClass c, BoundingBox b, std::optional<std::string> text = std::nullopt) {
    GuiNode n;
    n.kind = NodeKind::Leaf;
    n.type = std::string(to_string(c));
    n.component = c;
    n.bounds = b;
    n.text = std::move(text);
    return n;
  }
  static GuiNode unknown_leaf(std::string type, BoundingBox b) {
    GuiNode n;
    n.kind = NodeKind::Leaf;
    n.type = std::move(type);
    n.bounds = b;
    return n;
  }
  static GuiNode container(std::string type, BoundingBox b, std::vector<GuiNode> children = {}) {
    GuiNode n;
    n.kind = NodeKind::Container;
    n.type = std::move(type);
    n.bounds = b;
    n.children = std::move(children);
    return n;
  }

  // Label used for pre-order type sequences.
  const std::string& label() const { return type; }

  friend bool operator==(const GuiNode&, const GuiNode&) = default;
};

template <typename Fn>
void visit_preorder(const GuiNode& node, Fn&& fn, int depth = 0) {
  fn(node, depth);
  for (const auto& c : node.children) visit_preorder(c, fn, depth + 1);
}

// Pre-order list of all leaf nodes (known and unknown classes).
inline std::vector<GuiNode> leaves(const GuiNode& root) {
  std::vector<GuiNode> out;
  visit_preorder(root, [&](const GuiNode& n, int) {
    if (n.is_leaf()) {
      GuiNode copy = n;
      copy.children.clear();
      out.push_back(std::move(copy));
    }
  });
  return out;
}

inline std::size_t count_nodes(const GuiNode& root) {
  std::size_t n = 0;
  visit_preorder(root, [&](const GuiNode&, int) { ++n; });
  return n;
}

// Clips every child's bounds to its parent's bounds (recursively).
inline void clip_children_to_parent(GuiNode& node) {
  for (auto& c : node.children) {
    BoundingBox clipped = clip_box(c.bounds, node.bounds);
    if (clipped.w == 0 || clipped.h == 0) clipped = {node.bounds.x, node.bounds.y, 1, 1};
    c.bounds = clipped;
    clip_children_to_parent(c);
  }
}

struct ScreenRecord {
  std::string id;
  int width = 0;
  int height = 0;
  GuiNode root;
  std::optional<std::string> screenshot;  // path to the paired screenshot, if any

  friend bool operator==(const ScreenRecord&, const ScreenRecord&) = default;
};

// One recorded audit event: something was removed or flagged, and why.
struct AuditEntry {
  std::string subject;
  std::string reason;
  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

}  // namespace guiproto
