#pragma once

// Intermediate representation for generated screens and the Android code
// emitted from it: layout XML, a style table, and an activity skeleton.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/io.hpp"
#include "guiproto/render.hpp"
#include "guiproto/style.hpp"
#include "guiproto/xml.hpp"

namespace guiproto {

struct IrNode {
  std::string id;
  std::string type;
  NodeKind kind = NodeKind::Container;
  std::optional<ComponentClass> component;
  BoundingBox px;  // absolute pixel bounds
  double width_dp = 0, height_dp = 0, margin_start_dp = 0, margin_top_dp = 0;
  std::optional<std::string> orientation;  // LinearLayout only
  int style = -1;                          // index into GuiIr::styles
  std::optional<std::string> text;
  std::optional<double> text_size_sp;
  std::optional<std::string> asset;
  std::vector<IrNode> children;
  friend bool operator==(const IrNode&, const IrNode&) = default;
};

struct StyleEntry {
  std::string name;
  Rgb background;
  std::optional<Rgb> text_color;
  friend bool operator==(const StyleEntry&, const StyleEntry&) = default;
};

struct GuiIr {
  double density = 2.0;
  int width_px = 0;
  int height_px = 0;
  IrNode root;
  std::vector<StyleEntry> styles;
  friend bool operator==(const GuiIr&, const GuiIr&) = default;
};

// Per-node extras for IR construction, parallel to the tree's pre-order.
struct NodeAttributes {
  std::optional<ComponentStyle> style;
  std::optional<std::string> asset;
};

// Shortest round-trip decimal, always with a fractional part ("5.0", "16.8").
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eE") == std::string::npos && s != "inf" && s != "-inf" && s != "nan") s += ".0";
  return s;
}

namespace detail {

inline std::string sanitize_id(std::string_view type) {
  std::string out;
  for (char c : type) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), 'V');
  return out;
}

// Vertical when each child starts at or below the bottom of the previous one.
inline std::string infer_orientation(const std::vector<GuiNode>& children) {
  for (std::size_t i = 1; i < children.size(); ++i)
    if (children[i].bounds.y < children[i - 1].bounds.bottom()) return "horizontal";
  return "vertical";
}

struct IrBuilder {
  const std::vector<NodeAttributes>& attrs;
  double density;
  GuiIr& ir;
  std::map<std::pair<std::uint32_t, std::int64_t>, int> style_keys;
  std::size_t counter = 0;

  int style_for(const ComponentStyle& s) {
    const std::int64_t fc = s.font_color ? static_cast<std::int64_t>(s.font_color->packed()) : -1;
    const auto key = std::pair{s.background.packed(), fc};
    if (auto it = style_keys.find(key); it != style_keys.end()) return it->second;
    const int idx = static_cast<int>(ir.styles.size());
    ir.styles.push_back({"Style" + std::to_string(idx + 1), s.background, s.font_color});
    style_keys.emplace(key, idx);
    return idx;
  }

  IrNode build(const GuiNode& n, const BoundingBox& parent) {
    const std::size_t index = counter++;
    IrNode out;
    out.id = sanitize_id(n.type) + std::to_string(index);
    out.type = n.type;
    out.kind = n.kind;
    out.component = n.component;
    out.px = n.bounds;
    out.width_dp = n.bounds.w / density;
    out.height_dp = n.bounds.h / density;
    out.margin_start_dp = (n.bounds.x - parent.x) / density;
    out.margin_top_dp = (n.bounds.y - parent.y) / density;
    if (n.is_container() && n.type == "LinearLayout") out.orientation = infer_orientation(n.children);
    const NodeAttributes* a = index < attrs.size() ? &attrs[index] : nullptr;
    if (a && a->style) out.style = style_for(*a->style);
    if (a) out.asset = a->asset;
    if (n.component && is_text_bearing(*n.component)) {
      out.text = n.text ? n.text : (a && a->style && a->style->text ? a->style->text : std::optional<std::string>{""});
      out.text_size_sp = a && a->style && a->style->font_size_dp ? *a->style->font_size_dp : 14.0;
    } else if (n.text) {
      out.text = n.text;
    }
    for (const auto& c : n.children) out.children.push_back(build(c, n.bounds));
    return out;
  }
};

}  // namespace detail

// Ids are type + pre-order position; margins are offsets from the parent's
// origin in dp; identical (background, text colour) pairs share one style.
inline GuiIr build_ir(const GuiNode& tree, const std::vector<NodeAttributes>& attrs, double density, int width_px,
                      int height_px) {
  if (!(density > 0)) throw ConfigError("density must be positive");
  GuiIr ir;
  ir.density = density;
  ir.width_px = width_px;
  ir.height_px = height_px;
  detail::IrBuilder b{attrs, density, ir, {}, 0};
  ir.root = b.build(tree, tree.bounds);
  return ir;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline void emit_node(std::ostringstream& out, const GuiIr& ir, const IrNode& n, int depth, bool root) {
  const std::string ind(static_cast<std::size_t>(depth) * 4, ' ');
  const std::string attr_ind = ind + "    ";
  out << ind << '<' << n.type;
  if (root) out << " xmlns:android=\"http://schemas.android.com/apk/res/android\"";
  out << '\n' << attr_ind << "android:id=\"@+id/" << n.id << '"';
  out << '\n' << attr_ind << "android:layout_width=\"" << format_number(n.width_dp) << "dp\"";
  out << '\n' << attr_ind << "android:layout_height=\"" << format_number(n.height_dp) << "dp\"";
  out << '\n' << attr_ind << "android:layout_marginStart=\"" << format_number(n.margin_start_dp) << "dp\"";
  out << '\n' << attr_ind << "android:layout_marginTop=\"" << format_number(n.margin_top_dp) << "dp\"";
  if (n.orientation) out << '\n' << attr_ind << "android:orientation=\"" << *n.orientation << '"';
  if (n.text) out << '\n' << attr_ind << "android:text=\"" << xml::escape(*n.text) << '"';
  if (n.text_size_sp) out << '\n' << attr_ind << "android:textSize=\"" << format_number(*n.text_size_sp) << "sp\"";
  if (n.style >= 0) out << '\n' << attr_ind << "style=\"@style/" << ir.styles[static_cast<std::size_t>(n.style)].name << '"';
  if (n.children.empty()) {
    out << " />\n";
    return;
  }
  out << ">\n";
  for (const auto& c : n.children) emit_node(out, ir, c, depth + 1, false);
  out << ind << "</" << n.type << ">\n";
}

}  // namespace detail

inline std::string emit_layout_xml(const GuiIr& ir) {
  std::ostringstream out;
  out << xml::kDeclaration << '\n';
  detail::emit_node(out, ir, ir.root, 0, true);
  return out.str();
}

inline std::string emit_style_xml(const GuiIr& ir) {
  std::ostringstream out;
  out << xml::kDeclaration << "\n<resources>\n";
  for (const auto& s : ir.styles) {
    out << "    <style name=\"" << s.name << "\">\n";
    out << "        <item name=\"android:background\">" << to_hex(s.background) << "</item>\n";
    if (s.text_color) out << "        <item name=\"android:textColor\">" << to_hex(*s.text_color) << "</item>\n";
    out << "    </style>\n";
  }
  out << "</resources>\n";
  return out.str();
}

inline std::string emit_activity(const GuiIr&, std::string_view layout_name = "main_activity",
                                 std::string_view package = "com.example.prototype") {
  std::ostringstream out;
  out << "package " << package << ";\n\n"
      << "import android.app.Activity;\n"
      << "import android.os.Bundle;\n\n"
      << "public class MainActivity extends Activity {\n"
      << "    @Override\n"
      << "    protected void onCreate(Bundle savedInstanceState) {\n"
      << "        super.onCreate(savedInstanceState);\n"
      << "        setContentView(R.layout." << layout_name << ");\n"
      << "    }\n"
      << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Re-parsing emitted files

struct LayoutNode {
  std::string type;
  std::string id;
  double width_dp = 0, height_dp = 0, margin_start_dp = 0, margin_top_dp = 0;
  std::optional<std::string> style;  // referenced style name
  std::optional<std::string> text;
  std::vector<LayoutNode> children;
};

namespace detail {

inline double parse_dimension(const xml::Element& e, std::string_view key, std::string_view unit) {
  const auto v = e.attribute(key);
  if (!v) throw ValidationError("<" + e.name + ">: missing " + std::string(key));
  if (v->size() < unit.size() || v->compare(v->size() - unit.size(), unit.size(), unit) != 0)
    throw ValidationError("<" + e.name + ">: " + std::string(key) + " lacks unit " + std::string(unit));
  double d = 0;
  const char* end = v->data() + v->size() - unit.size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, d);
  if (ec != std::errc{} || ptr != end) throw ValidationError("<" + e.name + ">: bad number in " + std::string(key));
  return d;
}

inline LayoutNode to_layout_node(const xml::Element& e) {
  LayoutNode n;
  n.type = e.name;
  const auto id = e.attribute("android:id");
  if (!id || id->rfind("@+id/", 0) != 0) throw ValidationError("<" + e.name + ">: missing android:id");
  n.id = id->substr(5);
  n.width_dp = parse_dimension(e, "android:layout_width", "dp");
  n.height_dp = parse_dimension(e, "android:layout_height", "dp");
  n.margin_start_dp = parse_dimension(e, "android:layout_marginStart", "dp");
  n.margin_top_dp = parse_dimension(e, "android:layout_marginTop", "dp");
  if (auto s = e.attribute("style")) {
    if (s->rfind("@style/", 0) != 0) throw ValidationError("<" + e.name + ">: malformed style reference " + *s);
    n.style = s->substr(7);
  }
  n.text = e.attribute("android:text");
  for (const auto& c : e.children) n.children.push_back(to_layout_node(c));
  return n;
}

}  // namespace detail

inline LayoutNode parse_layout(std::string_view text) { return detail::to_layout_node(xml::parse(text)); }

inline std::vector<std::string> parse_style_names(std::string_view text) {
  const auto doc = xml::parse(text);
  if (doc.name != "resources") throw ValidationError("style file root must be <resources>");
  std::vector<std::string> out;
  for (const auto& c : doc.children)
    if (c.name == "style") {
      const auto name = c.attribute("name");
      if (!name) throw ValidationError("<style> without a name");
      out.push_back(*name);
    }
  return out;
}

struct TypedDpBox {
  std::string type;
  double margin_start, margin_top, width, height;
  friend bool operator==(const TypedDpBox&, const TypedDpBox&) = default;
};

inline std::vector<TypedDpBox> preorder_dp(const IrNode& n) {
  std::vector<TypedDpBox> out;
  auto rec = [&](auto&& self, const IrNode& x) -> void {
    out.push_back({x.type, x.margin_start_dp, x.margin_top_dp, x.width_dp, x.height_dp});
    for (const auto& c : x.children) self(self, c);
  };
  rec(rec, n);
  return out;
}

inline std::vector<TypedDpBox> preorder_dp(const LayoutNode& n) {
  std::vector<TypedDpBox> out;
  auto rec = [&](auto&& self, const LayoutNode& x) -> void {
    out.push_back({x.type, x.margin_start_dp, x.margin_top_dp, x.width_dp, x.height_dp});
    for (const auto& c : x.children) self(self, c);
  };
  rec(rec, n);
  return out;
}

// Style references in the layout that the style file does not define.
inline std::vector<std::string> unresolved_styles(const LayoutNode& layout, const std::vector<std::string>& defined) {
  std::vector<std::string> missing;
  auto rec = [&](auto&& self, const LayoutNode& x) -> void {
    if (x.style && std::find(defined.begin(), defined.end(), *x.style) == defined.end()) missing.push_back(*x.style);
    for (const auto& c : x.children) self(self, c);
  };
  rec(rec, layout);
  return missing;
}

// ---------------------------------------------------------------------------
// Preview rendering

namespace detail {

inline SceneNode scene_from_ir(const GuiIr& ir, const IrNode& n, int px, int py, const fs::path& asset_dir) {
  SceneNode s;
  s.kind = n.kind;
  s.type = n.type;
  s.component = n.component;
  const auto r = [&](double dp) { return static_cast<int>(std::lround(dp * ir.density)); };
  s.bounds = {px + r(n.margin_start_dp), py + r(n.margin_top_dp), r(n.width_dp), r(n.height_dp)};
  if (n.style >= 0) {
    const auto& st = ir.styles[static_cast<std::size_t>(n.style)];
    s.background = st.background;
    s.foreground = st.text_color;
  }
  s.text = n.text.value_or("");
  if (n.text_size_sp) s.text_scale = text_scale_for_font_px(*n.text_size_sp * ir.density);
  else s.text_scale = std::max(1, static_cast<int>(std::lround(s.bounds.h / 10.0)));
  if (n.asset) s.asset = std::make_shared<const Image>(read_png(asset_dir / *n.asset));
  for (const auto& c : n.children) s.children.push_back(scene_from_ir(ir, c, s.bounds.x, s.bounds.y, asset_dir));
  return s;
}

}  // namespace detail

// dp geometry is converted back to px with the IR's density. Asset paths are
// resolved against `asset_dir`.
inline Scene scene_from_ir(const GuiIr& ir, const fs::path& asset_dir = {}) {
  Scene sc;
  sc.width = ir.width_px;
  sc.height = ir.height_px;
  sc.root = detail::scene_from_ir(ir, ir.root, ir.root.px.x - static_cast<int>(std::lround(ir.root.margin_start_dp * ir.density)),
                                  ir.root.px.y - static_cast<int>(std::lround(ir.root.margin_top_dp * ir.density)), asset_dir);
  if (sc.root.background) sc.background = *sc.root.background;
  return sc;
}

inline Image render(const GuiIr& ir, RenderReport* report = nullptr, const fs::path& asset_dir = {}) {
  return render(scene_from_ir(ir, asset_dir), report);
}

// ---------------------------------------------------------------------------
// Bundle

struct BundlePaths {
  static constexpr std::string_view layout = "app/src/main/res/layout/main_activity.xml";
  static constexpr std::string_view styles = "app/src/main/res/values/styles.xml";
  static constexpr std::string_view activity = "app/src/main/java/MainActivity.java";
  static constexpr std::string_view preview = "preview.png";
  static constexpr std::string_view provenance = "provenance.json";
};

struct PrototypeBundle {
  std::string layout_xml;
  std::string style_xml;
  std::string activity_java;
  std::vector<std::string> strings;
  Image preview;
  nlohmann::ordered_json provenance;
};

inline std::vector<std::string> collect_strings(const IrNode& n) {
  std::vector<std::string> out;
  auto rec = [&](auto&& self, const IrNode& x) -> void {
    if (x.text && !x.text->empty()) out.push_back(*x.text);
    for (const auto& c : x.children) self(self, c);
  };
  rec(rec, n);
  return out;
}

inline PrototypeBundle make_bundle(const GuiIr& ir, nlohmann::ordered_json provenance, const fs::path& asset_dir = {}) {
  PrototypeBundle b;
  b.layout_xml = emit_layout_xml(ir);
  b.style_xml = emit_style_xml(ir);
  b.activity_java = emit_activity(ir);
  b.strings = collect_strings(ir.root);
  b.preview = render(ir, nullptr, asset_dir);
  provenance["strings"] = b.strings;
  b.provenance = std::move(provenance);
  return b;
}

inline void write_bundle(const fs::path& dir, const PrototypeBundle& b) {
  write_text_file(dir / BundlePaths::layout, b.layout_xml);
  write_text_file(dir / BundlePaths::styles, b.style_xml);
  write_text_file(dir / BundlePaths::activity, b.activity_java);
  write_png(dir / BundlePaths::preview, b.preview);
  write_text_file(dir / BundlePaths::provenance, b.provenance.dump(2) + "\n");
}

}  // namespace guiproto
