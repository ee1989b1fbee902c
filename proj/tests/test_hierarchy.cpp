#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "guiproto/corpus.hpp"
#include "guiproto/evaluation.hpp"
#include "guiproto/hierarchy.hpp"
#include "guiproto/random.hpp"

using namespace guiproto;

namespace {

ScreenRecord record(std::string id, int w, int h, std::vector<GuiNode> kids) {
  ScreenRecord r;
  r.id = std::move(id);
  r.width = w;
  r.height = h;
  r.root = GuiNode::container("FrameLayout", {0, 0, w, h}, std::move(kids));
  return r;
}

std::vector<InputNode> inputs_of(const GuiNode& root) {
  std::vector<InputNode> in;
  for (const auto& l : leaves(root)) in.push_back({l.bounds, l.type, l.component, l.text});
  return in;
}

std::vector<ScreenRecord> synthetic_corpus(int n) {
  std::vector<ScreenRecord> out;
  for (int i = 0; i < n; ++i) {
    const auto cls = static_cast<ComponentClass>(i % 15);
    out.push_back(synthesize_screen(cls, synth_seed(9, cls, static_cast<std::uint64_t>(i)), {}, "s" + std::to_string(100 + i)).record);
  }
  return out;
}

// Best score for one screen over every injective pairing of input to target
// boxes with positive IOU, under the same intersection/union rule.
double brute_score(const std::vector<BoundingBox>& in, const std::vector<BoundingBox>& targets) {
  double area = 0;
  for (const auto& b : in) area += b.area();
  for (const auto& b : targets) area += b.area();
  double best = -1;
  std::vector<bool> used(targets.size(), false);
  std::function<void(std::size_t, double, bool)> rec = [&](std::size_t i, double inter, bool any) {
    if (i == in.size()) {
      if (any) best = std::max(best, inter / (area - inter));
      return;
    }
    rec(i + 1, inter, any);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (used[j] || iou(in[i], targets[j]) <= 0) continue;
      used[j] = true;
      rec(i + 1, inter + intersection_area(in[i], targets[j]), true);
      used[j] = false;
    }
  };
  rec(0, 0.0, false);
  return best;
}

bool leaves_as_multiset_equal(const GuiNode& root, const std::vector<InputNode>& in) {
  std::vector<std::pair<BoundingBox, std::string>> a, b;
  for (const auto& l : leaves(root)) a.emplace_back(l.bounds, l.type);
  for (const auto& n : in) b.emplace_back(n.bounds, n.type);
  auto key = [](const auto& x, const auto& y) { return std::tie(x.first, x.second) < std::tie(y.first, y.second); };
  std::sort(a.begin(), a.end(), key);
  std::sort(b.begin(), b.end(), key);
  return a == b;
}

bool children_inside(const GuiNode& n) {
  for (const auto& c : n.children) {
    if (c.bounds.x < n.bounds.x || c.bounds.y < n.bounds.y || c.bounds.right() > n.bounds.right() ||
        c.bounds.bottom() > n.bounds.bottom())
      return false;
    if (!children_inside(c)) return false;
  }
  return true;
}

}  // namespace

TEST(Index, OneContainerThreeLeaves) {
  const auto r = record("only", 100, 100,
                        {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10}), GuiNode::leaf(ComponentClass::Button, {0, 20, 10, 10}),
                         GuiNode::leaf(ComponentClass::Switch, {0, 40, 10, 10})});
  const auto idx = build_index({r});
  ASSERT_EQ(idx.screens.size(), 1u);
  const auto& s = idx.screens[0];
  ASSERT_EQ(s.levels.size(), 2u);
  EXPECT_EQ(s.levels[0].size(), 3u);
  EXPECT_EQ(s.levels[1].size(), 1u);
  EXPECT_EQ(s.nodes[static_cast<std::size_t>(s.levels[1][0])].type, "FrameLayout");
  EXPECT_THROW(build_index({}), ConfigError);
}

TEST(Index, DeterministicAndTraceable) {
  const auto corpus = synthetic_corpus(20);
  const auto idx = build_index(corpus);
  EXPECT_EQ(build_index(corpus), idx);
  ASSERT_EQ(idx.screens.size(), 20u);
  for (const auto& rec : corpus) {
    const auto it = std::find_if(idx.screens.begin(), idx.screens.end(), [&](const auto& s) { return s.id == rec.id; });
    ASSERT_NE(it, idx.screens.end());
    std::vector<BoundingBox> indexed, truth;
    for (int n : it->levels[0]) {
      const auto& node = it->nodes[static_cast<std::size_t>(n)];
      EXPECT_TRUE(node.component.has_value());
      indexed.push_back(node.bounds);
      // Every leaf climbs to the screen's root.
      int p = n;
      while (it->nodes[static_cast<std::size_t>(p)].parent >= 0) p = it->nodes[static_cast<std::size_t>(p)].parent;
      EXPECT_EQ(p, 0);
    }
    for (const auto& l : leaves(rec.root)) truth.push_back(l.bounds);
    std::sort(indexed.begin(), indexed.end());
    std::sort(truth.begin(), truth.end());
    EXPECT_EQ(indexed, truth) << rec.id;
  }
}

TEST(Index, JsonRoundTrip) {
  const auto idx = build_index(synthetic_corpus(6));
  EXPECT_EQ(index_from_json(nlohmann::json::parse(index_to_json(idx).dump())), idx);
  EXPECT_THROW(index_from_json(nlohmann::json::parse(R"({"format": "other", "version": 1, "screens": []})")), ValidationError);
}

TEST(Match, IdentityScoresOne) {
  const auto corpus = synthetic_corpus(5);
  const auto idx = build_index(corpus);
  for (const auto& rec : corpus) {
    const auto m = match_screen(inputs_of(rec.root), idx, 0, rec.width, rec.height);
    EXPECT_EQ(m.id, rec.id);
    EXPECT_DOUBLE_EQ(m.score, 1.0);
  }
}

TEST(Match, DisjointInputIsNoMatch) {
  const auto idx = build_index({record("a", 100, 100, {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10})})});
  const std::vector<InputNode> far{{{80, 80, 10, 10}, "Button", ComponentClass::Button, {}}};
  EXPECT_THROW(match_screen(far, idx, 0, 100, 100), NoMatch);
  EXPECT_THROW(match_screen({}, idx, 0, 100, 100), ValidationError);
}

TEST(Match, HandComputedThreeScreens) {
  // Input: two 10x10 boxes. Screen a pairs one exactly: 100 / (300 - 100).
  // Screen b pairs both at a 5 px shift: 2*50 / (400 - 100). c pairs both exactly.
  const std::vector<InputNode> in{{{0, 0, 10, 10}, "Button", ComponentClass::Button, {}},
                                  {{20, 0, 10, 10}, "Button", ComponentClass::Button, {}}};
  const auto idx = build_index({
      record("a", 100, 100, {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10})}),
      record("b", 100, 100,
             {GuiNode::leaf(ComponentClass::Button, {5, 0, 10, 10}), GuiNode::leaf(ComponentClass::Button, {25, 0, 10, 10})}),
      record("c", 100, 100,
             {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10}), GuiNode::leaf(ComponentClass::Button, {20, 0, 10, 10})}),
  });
  const auto m = match_screen(in, idx, 0, 100, 100);
  EXPECT_EQ(m.id, "c");
  EXPECT_DOUBLE_EQ(m.score, 1.0);
  const auto without_c = build_index({
      record("a", 100, 100, {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10})}),
      record("b", 100, 100,
             {GuiNode::leaf(ComponentClass::Button, {5, 0, 10, 10}), GuiNode::leaf(ComponentClass::Button, {25, 0, 10, 10})}),
  });
  const auto m2 = match_screen(in, without_c, 0, 100, 100);
  EXPECT_EQ(m2.id, "a");
  EXPECT_DOUBLE_EQ(m2.score, 0.5);
  const auto only_b = build_index({record(
      "b", 100, 100, {GuiNode::leaf(ComponentClass::Button, {5, 0, 10, 10}), GuiNode::leaf(ComponentClass::Button, {25, 0, 10, 10})})});
  EXPECT_DOUBLE_EQ(match_screen(in, only_b, 0, 100, 100).score, 100.0 / 300.0);
  // Tie: identical screens, lowest id wins.
  const auto tie = build_index({record("z", 100, 100, {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10})}),
                                record("y", 100, 100, {GuiNode::leaf(ComponentClass::Button, {0, 0, 10, 10})})});
  EXPECT_EQ(match_screen({in[0]}, tie, 0, 100, 100).id, "y");
}

TEST(Match, ArgmaxAgreesWithBruteForcePairing) {
  Rng rng(12);
  auto rbox = [&] { return BoundingBox{rng.uniform_int(0, 4) * 10, rng.uniform_int(0, 4) * 10, 10 + rng.uniform_int(0, 1) * 10, 10}; };
  int agree = 0, trials = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<ScreenRecord> screens;
    for (int s = 0; s < 3; ++s) {
      std::vector<GuiNode> kids;
      const int n = rng.uniform_int(1, 5);
      for (int i = 0; i < n; ++i) kids.push_back(GuiNode::leaf(ComponentClass::Button, rbox()));
      screens.push_back(record("s" + std::to_string(s), 100, 100, kids));
    }
    std::vector<InputNode> in;
    std::vector<BoundingBox> boxes;
    for (int i = rng.uniform_int(1, 4); i > 0; --i) {
      boxes.push_back(rbox());
      in.push_back({boxes.back(), "Button", ComponentClass::Button, {}});
    }
    const auto idx = build_index(screens);
    double best = -1;
    std::string best_id;
    for (const auto& s : idx.screens) {
      std::vector<BoundingBox> targets;
      for (int n : s.levels[0]) targets.push_back(s.nodes[static_cast<std::size_t>(n)].bounds);
      const double v = brute_score(boxes, targets);
      if (v > best) best = v, best_id = s.id;
    }
    const auto m = try_match_screen(in, idx, 0, 100, 100);
    ASSERT_EQ(m.has_value(), best >= 0);
    if (!m) continue;
    ++trials;
    EXPECT_LE(m->score, best + 1e-12);
    agree += m->id == best_id;
  }
  // Greedy pairing is not optimal in general; on grid-aligned screens of
  // at most five nodes it should pick the brute-force winner almost always.
  EXPECT_GE(agree, trials * 95 / 100) << agree << " of " << trials;
}

TEST(Construct, EmptyInputAndFallback) {
  const auto idx = build_index(synthetic_corpus(2));
  const auto empty = construct_hierarchy({}, idx, 4, 600, 960);
  EXPECT_EQ(empty.root.type, "RelativeLayout");
  EXPECT_TRUE(empty.root.children.empty());

  const std::vector<InputNode> one{{{10, 10, 30, 30}, "Button", ComponentClass::Button, {}}};
  const auto fb = construct_hierarchy(one, HierarchyIndex{}, 4, 600, 960);
  EXPECT_TRUE(fb.fallback_root);
  EXPECT_EQ(fb.root.type, "RelativeLayout");
  EXPECT_EQ(fb.root.bounds, (BoundingBox{0, 0, 600, 960}));
  ASSERT_EQ(fb.root.children.size(), 1u);
  EXPECT_EQ(fb.root.children[0].component, ComponentClass::Button);
  EXPECT_THROW(construct_hierarchy(one, idx, 0, 600, 960), ConfigError);
}

TEST(Construct, RoundTripOverTwentyScreens) {
  const auto corpus = synthetic_corpus(20);
  const auto idx = build_index(corpus);
  for (const auto& rec : corpus) {
    const auto res = construct_hierarchy(inputs_of(rec.root), idx, 4, rec.width, rec.height);
    EXPECT_EQ(preorder_sequence(res.root), preorder_sequence(rec.root)) << rec.id;
    EXPECT_EQ(edit_distance(preorder_sequence(res.root), preorder_sequence(rec.root), {}), 0.0);
    EXPECT_FALSE(res.fallback_root);
  }
}

TEST(Construct, PreservesLeavesAndContainment) {
  const auto idx = build_index(synthetic_corpus(15));
  Rng rng(13);
  for (int t = 0; t < 40; ++t) {
    std::vector<InputNode> in;
    for (int i = rng.uniform_int(1, 8); i > 0; --i) {
      const BoundingBox b{rng.uniform_int(0, 500), rng.uniform_int(0, 900), rng.uniform_int(10, 100), rng.uniform_int(10, 60)};
      const auto cls = static_cast<ComponentClass>(rng.uniform_int(0, 14));
      in.push_back({b, std::string(to_string(cls)), cls, {}});
    }
    const int max_levels = rng.uniform_int(1, 4);
    const auto res = construct_hierarchy(in, idx, max_levels, 600, 960);
    EXPECT_TRUE(leaves_as_multiset_equal(res.root, in));
    EXPECT_TRUE(children_inside(res.root));
    EXPECT_LE(res.levels_used, max_levels);
    EXPECT_EQ(res.leaf_inputs.size(), in.size());
    std::vector<std::size_t> sorted = res.leaf_inputs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  }
}

TEST(Construct, MockupCoordinatesAreScaled) {
  const auto corpus = synthetic_corpus(4);
  const auto idx = build_index(corpus);
  const auto& rec = corpus[1];
  std::vector<InputNode> doubled;
  for (auto n : inputs_of(rec.root)) {
    n.bounds = {n.bounds.x * 2, n.bounds.y * 2, n.bounds.w * 2, n.bounds.h * 2};
    doubled.push_back(n);
  }
  const auto m = match_screen(doubled, idx, 0, 1200, 1920);
  EXPECT_EQ(m.id, rec.id);
  EXPECT_DOUBLE_EQ(m.score, 1.0);
  const auto res = construct_hierarchy(doubled, idx, 4, 1200, 1920);
  EXPECT_EQ(preorder_sequence(res.root), preorder_sequence(rec.root));
  EXPECT_EQ(res.root.bounds, (BoundingBox{0, 0, 1200, 1920}));
}
