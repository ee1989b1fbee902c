#pragma once

// Container inference by nearest-neighbour matching against corpus screens.
//
// Each indexed screen is cut into levels: the level-l frontier holds the
// nodes whose subtree height is <= l but whose parent's height is > l
// (level 0 = the leaves). Working nodes are matched against a frontier by
// greedy box-IOU pairing; a paired node whose target's parent sits exactly
// one level up is grouped under a clone of that parent. Repeating this level
// by level rebuilds the matched screen's containers around the input.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/io.hpp"

namespace guiproto {

struct IndexNode {
  std::string type;
  std::optional<ComponentClass> component;
  BoundingBox bounds;  // leaves: as recorded; containers: union of their children
  int height = 0;
  int parent = -1;
  std::vector<int> children;
  friend bool operator==(const IndexNode&, const IndexNode&) = default;
};

struct IndexedScreen {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<IndexNode> nodes;           // pre-order, nodes[0] is the root
  std::vector<std::vector<int>> levels;   // levels[l] = frontier at l, up to the root's height

  const std::vector<int>& frontier(int level) const {
    return levels[static_cast<std::size_t>(std::min<int>(level, static_cast<int>(levels.size()) - 1))];
  }
  friend bool operator==(const IndexedScreen&, const IndexedScreen&) = default;
};

struct HierarchyIndex {
  std::vector<IndexedScreen> screens;  // sorted by id
  friend bool operator==(const HierarchyIndex&, const HierarchyIndex&) = default;
};

namespace detail {

// Appends `n` (pre-order) and returns its index, or -1 for empty containers.
inline int index_subtree(const GuiNode& n, int parent, std::vector<IndexNode>& out) {
  if (n.is_container() && n.children.empty() && parent >= 0) return -1;
  const int me = static_cast<int>(out.size());
  out.push_back({n.type, n.component, n.bounds, 0, parent, {}});
  std::optional<BoundingBox> u;
  int h = -1;
  for (const auto& c : n.children) {
    const int ci = index_subtree(c, me, out);
    if (ci < 0) continue;
    out[static_cast<std::size_t>(me)].children.push_back(ci);
    const auto& cn = out[static_cast<std::size_t>(ci)];
    u = u ? union_box(*u, cn.bounds) : cn.bounds;
    h = std::max(h, cn.height);
  }
  auto& self = out[static_cast<std::size_t>(me)];
  if (u) {
    self.bounds = *u;
    self.height = h + 1;
  }
  return me;
}

}  // namespace detail

inline IndexedScreen index_screen(const ScreenRecord& rec) {
  IndexedScreen s;
  s.id = rec.id;
  s.width = rec.width;
  s.height = rec.height;
  detail::index_subtree(rec.root, -1, s.nodes);
  const int top = s.nodes.front().height;
  s.levels.resize(static_cast<std::size_t>(top) + 1);
  for (int l = 0; l <= top; ++l)
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      const auto& n = s.nodes[i];
      const int ph = n.parent < 0 ? std::numeric_limits<int>::max() : s.nodes[static_cast<std::size_t>(n.parent)].height;
      if (n.height <= l && l < ph) s.levels[static_cast<std::size_t>(l)].push_back(static_cast<int>(i));
    }
  return s;
}

// Screens whose root has no children carry no levels and are left out.
inline HierarchyIndex build_index(const std::vector<ScreenRecord>& corpus) {
  if (corpus.empty()) throw ConfigError("cannot build a hierarchy index from an empty corpus");
  HierarchyIndex idx;
  for (const auto& r : corpus) {
    if (r.root.children.empty()) continue;
    idx.screens.push_back(index_screen(r));
  }
  if (idx.screens.empty()) throw ConfigError("no corpus screen has any components to index");
  std::stable_sort(idx.screens.begin(), idx.screens.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return idx;
}

// ---------------------------------------------------------------------------
// Matching

struct InputNode {
  BoundingBox bounds;
  std::string type;  // class name for leaves, container type otherwise
  std::optional<ComponentClass> component;
  std::optional<std::string> text;
};

struct NoMatch : Error {
  NoMatch() : Error("no corpus screen overlaps the input nodes") {}
};

struct ScreenMatch {
  std::size_t screen = 0;  // position in index.screens
  std::string id;
  double score = 0.0;
  std::vector<std::pair<std::size_t, int>> pairs;  // (input position, target node)
};

namespace detail {

inline BoundingBox scale_box(const BoundingBox& b, int from_w, int from_h, int to_w, int to_h) {
  if (from_w == to_w && from_h == to_h) return b;
  auto sx = [&](long long v) { return static_cast<int>(std::llround(static_cast<double>(v) * to_w / from_w)); };
  auto sy = [&](long long v) { return static_cast<int>(std::llround(static_cast<double>(v) * to_h / from_h)); };
  const int x0 = sx(b.x), y0 = sy(b.y);
  return {x0, y0, std::max(1, sx(b.right()) - x0), std::max(1, sy(b.bottom()) - y0)};
}

struct Scored {
  double score = 0.0;
  std::vector<std::pair<std::size_t, int>> pairs;
};

inline Scored score_screen(const std::vector<BoundingBox>& input, const IndexedScreen& s, int level) {
  const auto& targets = s.frontier(level);
  std::vector<bool> used(targets.size(), false);
  Scored r;
  long double inter = 0, area = 0;
  for (const auto& b : input) area += b.area();
  for (int t : targets) area += s.nodes[static_cast<std::size_t>(t)].bounds.area();
  for (std::size_t i = 0; i < input.size(); ++i) {
    double best = 0.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (used[j]) continue;
      const double v = iou(input[i], s.nodes[static_cast<std::size_t>(targets[j])].bounds);
      if (v > best) best = v, best_j = j;
    }
    if (best <= 0.0) continue;
    used[best_j] = true;
    r.pairs.emplace_back(i, targets[best_j]);
    inter += intersection_area(input[i], s.nodes[static_cast<std::size_t>(targets[best_j])].bounds);
  }
  r.score = area - inter > 0 ? static_cast<double>(inter / (area - inter)) : 0.0;
  return r;
}

}  // namespace detail

// Best screen for `input` (boxes on a canvas_w x canvas_h canvas) at `level`;
// nullopt when nothing overlaps. Ties go to the lowest screen id.
inline std::optional<ScreenMatch> try_match_screen(const std::vector<InputNode>& input, const HierarchyIndex& index,
                                                   int level, int canvas_w, int canvas_h) {
  if (input.empty()) throw ValidationError("match_screen needs at least one input node");
  std::optional<ScreenMatch> best;
  std::vector<BoundingBox> scaled(input.size());
  for (std::size_t s = 0; s < index.screens.size(); ++s) {
    const auto& scr = index.screens[s];
    for (std::size_t i = 0; i < input.size(); ++i)
      scaled[i] = detail::scale_box(input[i].bounds, canvas_w, canvas_h, scr.width, scr.height);
    auto sc = detail::score_screen(scaled, scr, level);
    if (sc.pairs.empty()) continue;
    if (!best || sc.score > best->score) best = ScreenMatch{s, scr.id, sc.score, std::move(sc.pairs)};
  }
  return best;
}

inline ScreenMatch match_screen(const std::vector<InputNode>& input, const HierarchyIndex& index, int level,
                                int canvas_w, int canvas_h) {
  auto m = try_match_screen(input, index, level, canvas_w, canvas_h);
  if (!m) throw NoMatch();
  return std::move(*m);
}

// ---------------------------------------------------------------------------
// Construction

struct HierarchyResult {
  GuiNode root;
  std::vector<std::size_t> leaf_inputs;  // pre-order leaf i came from input[leaf_inputs[i]]
  int levels_used = 0;
  bool fallback_root = false;
};

namespace detail {

struct WorkNode {
  GuiNode node;
  std::vector<std::size_t> inputs;  // input positions of its leaves, pre-order
};

inline void sort_by_position(std::vector<WorkNode>& v) {
  std::stable_sort(v.begin(), v.end(), [](const WorkNode& a, const WorkNode& b) { return a.node.bounds < b.node.bounds; });
}

}  // namespace detail

inline HierarchyResult construct_hierarchy(const std::vector<InputNode>& input, const HierarchyIndex& index,
                                           int max_levels, int canvas_w, int canvas_h) {
  if (max_levels < 1) throw ConfigError("max_levels must be at least 1");
  if (canvas_w <= 0 || canvas_h <= 0) throw ValidationError("canvas size must be positive");
  const BoundingBox screen{0, 0, canvas_w, canvas_h};

  std::vector<detail::WorkNode> work;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& in = input[i];
    GuiNode n = in.component ? GuiNode::leaf(*in.component, in.bounds, in.text) : GuiNode::unknown_leaf(in.type, in.bounds);
    if (!in.component) n.text = in.text;
    work.push_back({std::move(n), {i}});
  }
  detail::sort_by_position(work);

  std::vector<detail::WorkNode> finished;
  HierarchyResult result;
  for (int level = 0; level < max_levels && !work.empty(); ++level) {
    result.levels_used = level + 1;
    std::vector<detail::WorkNode> carried;  // waiting or unmatched, to the next level
    std::vector<detail::WorkNode> grouped;
    std::vector<detail::WorkNode> pending = std::move(work);
    work.clear();
    bool matched_any = false;
    // Sub-iterations: nodes left unpaired try the remaining screens again.
    while (!pending.empty()) {
      std::vector<InputNode> q;
      for (const auto& w : pending) q.push_back({w.node.bounds, w.node.type, w.node.component, w.node.text});
      const auto m = try_match_screen(q, index, level, canvas_w, canvas_h);
      if (!m) break;
      matched_any = true;
      const auto& scr = index.screens[m->screen];
      std::vector<bool> paired(pending.size(), false);
      // parent node -> (position of the target among the parent's children, working node)
      std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> groups;
      for (const auto& [i, t] : m->pairs) {
        paired[i] = true;
        const auto& tn = scr.nodes[static_cast<std::size_t>(t)];
        if (tn.parent < 0) {
          finished.push_back(std::move(pending[i]));
          continue;
        }
        const auto& pn = scr.nodes[static_cast<std::size_t>(tn.parent)];
        if (pn.height != level + 1) {
          carried.push_back(std::move(pending[i]));
          continue;
        }
        const auto pos = static_cast<std::size_t>(std::find(pn.children.begin(), pn.children.end(), t) - pn.children.begin());
        groups[tn.parent].emplace_back(pos, i);
      }
      for (auto& [p, members] : groups) {
        std::sort(members.begin(), members.end());
        const auto& pn = scr.nodes[static_cast<std::size_t>(p)];
        detail::WorkNode c{GuiNode::container(pn.type, pending[members.front().second].node.bounds), {}};
        for (const auto& [pos, i] : members) {
          c.node.bounds = union_box(c.node.bounds, pending[i].node.bounds);
          c.inputs.insert(c.inputs.end(), pending[i].inputs.begin(), pending[i].inputs.end());
          c.node.children.push_back(std::move(pending[i].node));
        }
        grouped.push_back(std::move(c));
      }
      std::vector<detail::WorkNode> rest;
      for (std::size_t i = 0; i < pending.size(); ++i)
        if (!paired[i]) rest.push_back(std::move(pending[i]));
      if (rest.size() == pending.size()) break;
      pending = std::move(rest);
    }
    for (auto& w : pending) carried.push_back(std::move(w));
    work = std::move(grouped);
    for (auto& w : carried) work.push_back(std::move(w));
    detail::sort_by_position(work);
    if (!matched_any) break;  // no screen overlaps: fall back
  }

  for (auto& w : work) finished.push_back(std::move(w));
  detail::sort_by_position(finished);
  detail::WorkNode top;
  if (finished.size() == 1 && finished.front().node.is_container()) {
    top = std::move(finished.front());
    top.node.bounds = screen;
  } else {
    top.node = GuiNode::container("RelativeLayout", screen);
    for (auto& w : finished) {
      top.inputs.insert(top.inputs.end(), w.inputs.begin(), w.inputs.end());
      top.node.children.push_back(std::move(w.node));
    }
    result.fallback_root = true;
  }
  clip_children_to_parent(top.node);
  result.root = std::move(top.node);
  result.leaf_inputs = std::move(top.inputs);
  return result;
}

// ---------------------------------------------------------------------------
// JSON sidecar

inline nlohmann::ordered_json index_to_json(const HierarchyIndex& idx) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "hierarchy-index";
  j["version"] = 1;
  ordered_json screens = ordered_json::array();
  for (const auto& s : idx.screens) {
    ordered_json js;
    js["id"] = s.id;
    js["width"] = s.width;
    js["height"] = s.height;
    ordered_json nodes = ordered_json::array();
    for (const auto& n : s.nodes)
      nodes.push_back({{"type", n.type},
                       {"leaf", n.component.has_value()},
                       {"bounds", {n.bounds.x, n.bounds.y, n.bounds.w, n.bounds.h}},
                       {"height", n.height},
                       {"parent", n.parent},
                       {"children", n.children}});
    js["nodes"] = nodes;
    js["levels"] = s.levels;
    screens.push_back(std::move(js));
  }
  j["screens"] = screens;
  return j;
}

inline HierarchyIndex index_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "hierarchy-index" || j.at("version") != 1) throw ValidationError("unsupported hierarchy index format");
    HierarchyIndex idx;
    for (const auto& js : j.at("screens")) {
      IndexedScreen s;
      s.id = js.at("id").get<std::string>();
      s.width = js.at("width").get<int>();
      s.height = js.at("height").get<int>();
      for (const auto& jn : js.at("nodes")) {
        IndexNode n;
        n.type = jn.at("type").get<std::string>();
        if (jn.at("leaf").get<bool>()) {
          n.component = parse_component_class(n.type);
          if (!n.component) throw ValidationError("hierarchy index: unknown leaf class " + n.type);
        }
        const auto b = jn.at("bounds").get<std::vector<int>>();
        if (b.size() != 4) throw ValidationError("hierarchy index: bounds need 4 integers");
        n.bounds = {b[0], b[1], b[2], b[3]};
        n.height = jn.at("height").get<int>();
        n.parent = jn.at("parent").get<int>();
        n.children = jn.at("children").get<std::vector<int>>();
        s.nodes.push_back(std::move(n));
      }
      s.levels = js.at("levels").get<std::vector<std::vector<int>>>();
      if (s.nodes.empty() || s.levels.empty()) throw ValidationError("hierarchy index: screen " + s.id + " is empty");
      idx.screens.push_back(std::move(s));
    }
    if (idx.screens.empty()) throw ValidationError("hierarchy index holds no screens");
    return idx;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed hierarchy index: ") + e.what());
  }
}

inline void save_index(const fs::path& path, const HierarchyIndex& idx) {
  write_text_file(path, index_to_json(idx).dump() + "\n");
}

inline HierarchyIndex load_index(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed hierarchy index: ") + e.what());
  }
  return index_from_json(j);
}

}  // namespace guiproto
