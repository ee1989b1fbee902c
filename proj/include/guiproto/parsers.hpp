#pragma once

// Screen-dump XML and mockup JSON ingestion.
//
// Screen dumps follow the uiautomator layout:
//
//   <hierarchy id="s1" width="600" height="960">
//     <node class="android.widget.FrameLayout" bounds="[0,0][600,960]">
//       <node class="android.widget.Button" bounds="[10,10][110,60]" text="OK"/>
//     </node>
//   </hierarchy>
//
// Mockups are flat JSON object lists:
//
//   {"width": 1200, "height": 1920,
//    "objects": [{"x": 0, "y": 0, "w": 200, "h": 48, "text": "Sign up", "asset": "a.png"}]}

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/xml.hpp"

namespace guiproto {

// ---------------------------------------------------------------------------
// Screen dumps

struct DumpParseOptions {
  // Used when the <hierarchy> element carries no id attribute.
  std::string id;
  // Lenient mode keeps nodes whose bounds leave the screen and drops (with an
  // audit entry) nodes with inverted or zero-area bounds. Strict mode throws.
  bool lenient = false;
};

struct DumpParseResult {
  ScreenRecord record;
  std::vector<AuditEntry> dropped;
};

namespace detail {

inline int parse_int_attr(const xml::Element& e, std::string_view key, const std::string& where) {
  const auto v = e.attribute(key);
  if (!v) throw ValidationError(where + ": missing attribute '" + std::string(key) + "'");
  int out = 0;
  const auto* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError(where + ": attribute '" + std::string(key) + "' is not an integer: " + *v);
  return out;
}

// "[x1,y1][x2,y2]" -> corners. Throws ValidationError on syntax errors.
inline std::array<int, 4> parse_corner_bounds(const std::string& s, const std::string& where) {
  static const std::regex re(R"(^\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ValidationError(where + ": malformed bounds \"" + s + "\"");
  return {std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4])};
}

struct DumpBuilder {
  const DumpParseOptions& opts;
  int width = 0;
  int height = 0;
  std::vector<AuditEntry> dropped;

  std::optional<GuiNode> build(const xml::Element& e, const std::string& path) {
    const std::string cls = e.attribute("class").value_or("");
    const std::string where = path + " (class \"" + cls + "\")";
    const auto c = parse_corner_bounds(e.attribute("bounds").value_or(""), where);
    const int x1 = c[0], y1 = c[1], x2 = c[2], y2 = c[3];
    if (x2 <= x1 || y2 <= y1) {
      if (!opts.lenient) throw ValidationError(where + ": inverted or zero-area bounds");
      dropped.push_back({where, "invalid-bounds"});
      return std::nullopt;
    }
    const BoundingBox box{x1, y1, x2 - x1, y2 - y1};
    if (!box.inside(width, height) && !opts.lenient)
      throw ValidationError(where + ": bounds outside the " + std::to_string(width) + "x" +
                            std::to_string(height) + " screen");

    std::vector<GuiNode> children;
    int index = 0;
    for (const auto& child : e.children) {
      if (child.name != "node") continue;
      auto built = build(child, path + "/node[" + std::to_string(index++) + "]");
      if (built) children.push_back(std::move(*built));
    }

    const std::string type(short_class_name(cls));
    GuiNode node;
    if (!e.children.empty() || is_container_type(type)) {
      node = GuiNode::container(type, box, std::move(children));
    } else if (auto known = parse_component_class(type)) {
      node = GuiNode::leaf(*known, box);
    } else {
      node = GuiNode::unknown_leaf(type, box);
    }
    if (auto text = e.attribute("text"); text && !text->empty()) node.text = *text;
    return node;
  }
};

}  // namespace detail

inline DumpParseResult parse_screen_dump_audited(std::string_view xml_text, const DumpParseOptions& opts = {}) {
  const xml::Element doc = xml::parse(xml_text);
  if (doc.name != "hierarchy") throw ParseError("screen dump root element must be <hierarchy>, got <" + doc.name + ">");

  std::vector<const xml::Element*> tops;
  for (const auto& c : doc.children)
    if (c.name == "node") tops.push_back(&c);
  if (tops.empty()) throw ValidationError("/hierarchy: no <node> elements");

  detail::DumpBuilder builder{opts};
  if (doc.attribute("width") || doc.attribute("height")) {
    builder.width = detail::parse_int_attr(doc, "width", "/hierarchy");
    builder.height = detail::parse_int_attr(doc, "height", "/hierarchy");
  } else {
    // Plain uiautomator dumps: the first node spans the screen.
    const auto c = detail::parse_corner_bounds(tops.front()->attribute("bounds").value_or(""), "/hierarchy/node[0]");
    builder.width = c[2];
    builder.height = c[3];
  }
  if (builder.width <= 0 || builder.height <= 0) throw ValidationError("/hierarchy: width and height must be positive");

  std::vector<GuiNode> roots;
  for (std::size_t i = 0; i < tops.size(); ++i) {
    auto n = builder.build(*tops[i], "/hierarchy/node[" + std::to_string(i) + "]");
    if (n) roots.push_back(std::move(*n));
  }

  ScreenRecord rec;
  rec.id = doc.attribute("id").value_or(opts.id);
  rec.width = builder.width;
  rec.height = builder.height;
  const BoundingBox screen{0, 0, rec.width, rec.height};
  if (roots.size() == 1 && roots.front().is_container() && roots.front().bounds == screen) {
    rec.root = std::move(roots.front());
  } else {
    rec.root = GuiNode::container("FrameLayout", screen, std::move(roots));
  }
  return {std::move(rec), std::move(builder.dropped)};
}

inline ScreenRecord parse_screen_dump(std::string_view xml_text, const DumpParseOptions& opts = {}) {
  return parse_screen_dump_audited(xml_text, opts).record;
}

namespace detail {

inline void write_dump_node(std::ostringstream& out, const GuiNode& n, int depth) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  const auto& b = n.bounds;
  out << indent << "<node class=\"" << xml::escape(n.type) << "\" bounds=\"[" << b.x << ',' << b.y << "]["
      << b.right() << ',' << b.bottom() << "]\"";
  if (n.text) out << " text=\"" << xml::escape(*n.text) << '"';
  if (n.children.empty()) {
    out << "/>\n";
    return;
  }
  out << ">\n";
  for (const auto& c : n.children) write_dump_node(out, c, depth + 1);
  out << indent << "</node>\n";
}

}  // namespace detail

inline std::string serialize_screen_dump(const ScreenRecord& rec) {
  std::ostringstream out;
  out << xml::kDeclaration << "\n";
  out << "<hierarchy id=\"" << xml::escape(rec.id) << "\" width=\"" << rec.width << "\" height=\"" << rec.height
      << "\">\n";
  detail::write_dump_node(out, rec.root, 1);
  out << "</hierarchy>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Mockups

struct MockupObject {
  BoundingBox bounds;
  std::optional<std::string> text;
  std::optional<std::string> asset;
  friend bool operator==(const MockupObject&, const MockupObject&) = default;
};

struct MockupDocument {
  int width = 0;
  int height = 0;
  std::vector<MockupObject> objects;  // document order is z-order
  friend bool operator==(const MockupDocument&, const MockupDocument&) = default;
};

// A detected (or declared) component box, before classification.
struct InputBox {
  BoundingBox bounds;
  std::optional<std::string> text;
  friend bool operator==(const InputBox&, const InputBox&) = default;
};

namespace detail {

inline int json_int(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + "." + key + ": missing");
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError(where + "." + key + ": must be an integer");
  const auto i = v.get<long long>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
    throw ValidationError(where + "." + key + ": out of range");
  return static_cast<int>(i);
}

inline std::optional<std::string> json_opt_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_string()) throw ValidationError(where + "." + key + ": must be a string");
  return obj.at(key).get<std::string>();
}

}  // namespace detail

inline MockupDocument parse_mockup(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed mockup JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("mockup: top level must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "width" && key != "height" && key != "objects") throw ValidationError("mockup." + key + ": unknown field");

  MockupDocument doc;
  doc.width = detail::json_int(j, "width", "mockup");
  doc.height = detail::json_int(j, "height", "mockup");
  if (doc.width <= 0 || doc.height <= 0) throw ValidationError("mockup.width/height: must be positive");
  if (!j.contains("objects") || !j.at("objects").is_array()) throw ValidationError("mockup.objects: must be an array");

  const auto& objs = j.at("objects");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string where = "mockup.objects[" + std::to_string(i) + "]";
    const auto& o = objs[i];
    if (!o.is_object()) throw ValidationError(where + ": must be an object");
    for (const auto& [key, _] : o.items())
      if (key != "x" && key != "y" && key != "w" && key != "h" && key != "text" && key != "asset")
        throw ValidationError(where + "." + key + ": unknown field");
    MockupObject m;
    m.bounds = {detail::json_int(o, "x", where), detail::json_int(o, "y", where), detail::json_int(o, "w", where),
                detail::json_int(o, "h", where)};
    m.text = detail::json_opt_string(o, "text", where);
    m.asset = detail::json_opt_string(o, "asset", where);
    if (!m.bounds.inside(doc.width, doc.height))
      throw ValidationError(where + ": bounds outside the " + std::to_string(doc.width) + "x" +
                            std::to_string(doc.height) + " canvas");
    doc.objects.push_back(std::move(m));
  }
  return doc;
}

inline std::string serialize_mockup(const MockupDocument& doc) {
  nlohmann::ordered_json j;
  j["width"] = doc.width;
  j["height"] = doc.height;
  j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : doc.objects) {
    nlohmann::ordered_json jo;
    jo["x"] = o.bounds.x;
    jo["y"] = o.bounds.y;
    jo["w"] = o.bounds.w;
    jo["h"] = o.bounds.h;
    if (o.text) jo["text"] = *o.text;
    if (o.asset) jo["asset"] = *o.asset;
    j["objects"].push_back(std::move(jo));
  }
  return j.dump(2) + "\n";
}

// Mockup detection path: the declared boxes, in document order, no de-duplication.
inline std::vector<InputBox> mockup_to_input_nodes(const MockupDocument& doc) {
  std::vector<InputBox> out;
  out.reserve(doc.objects.size());
  for (const auto& o : doc.objects) out.push_back({o.bounds, o.text});
  return out;
}

}  // namespace guiproto
