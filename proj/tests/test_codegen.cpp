#include <gtest/gtest.h>

#include <set>

#include "guiproto/codegen.hpp"
#include "guiproto/random.hpp"

using namespace guiproto;

namespace {

ComponentStyle red_button_style() { return {Rgb{0xDD, 0x4B, 0x39}, Rgb{0xFE, 0xFE, 0xFF}, 16.8, std::string("OK")}; }

GuiNode linear_with_two_buttons() {
  return GuiNode::container("LinearLayout", {0, 0, 400, 200},
                            {GuiNode::leaf(ComponentClass::Button, {10, 20, 100, 40}),
                             GuiNode::leaf(ComponentClass::Button, {10, 80, 100, 40})});
}

// Random tree whose children sit inside their parent.
GuiNode random_tree(Rng& rng, BoundingBox b, int depth) {
  if (depth == 0 || b.w < 8 || b.h < 8 || rng.uniform() < 0.3)
    return GuiNode::leaf(static_cast<ComponentClass>(rng.uniform_int(0, 14)), b);
  static const char* kTypes[] = {"LinearLayout", "FrameLayout", "RelativeLayout", "android.widget.ScrollView"};
  std::vector<GuiNode> kids;
  const int n = rng.uniform_int(1, 3);
  for (int i = 0; i < n; ++i) {
    const int w = rng.uniform_int(1, b.w), h = rng.uniform_int(1, b.h);
    kids.push_back(random_tree(rng, {b.x + rng.uniform_int(0, b.w - w), b.y + rng.uniform_int(0, b.h - h), w, h}, depth - 1));
  }
  return GuiNode::container(kTypes[rng.uniform_int(0, 3)], b, std::move(kids));
}

std::vector<NodeAttributes> random_attrs(Rng& rng, const GuiNode& tree) {
  std::vector<NodeAttributes> out;
  visit_preorder(tree, [&](const GuiNode&, int) {
    NodeAttributes a;
    if (rng.coin()) {
      const auto v = static_cast<std::uint8_t>(rng.uniform_int(0, 2) * 100);
      a.style = ComponentStyle{Rgb{v, v, v}, rng.coin() ? std::optional<Rgb>(Rgb{0, 0, 0}) : std::nullopt, 12.0, {}};
    }
    out.push_back(a);
  });
  return out;
}

void collect_ids(const LayoutNode& n, std::vector<std::string>& out) {
  out.push_back(n.id);
  for (const auto& c : n.children) collect_ids(c, out);
}

}  // namespace

TEST(BuildIr, MarginsAreParentOffsetsInDp) {
  const auto tree = GuiNode::container("FrameLayout", {0, 0, 200, 200}, {GuiNode::leaf(ComponentClass::Switch, {10, 20, 40, 30})});
  const auto ir = build_ir(tree, {}, 2.0, 200, 200);
  ASSERT_EQ(ir.root.children.size(), 1u);
  const auto& c = ir.root.children[0];
  EXPECT_EQ(c.margin_start_dp, 5.0);
  EXPECT_EQ(c.margin_top_dp, 10.0);
  EXPECT_EQ(c.width_dp, 20.0);
  EXPECT_EQ(c.height_dp, 15.0);
  EXPECT_NE(emit_layout_xml(ir).find("android:layout_marginStart=\"5.0dp\""), std::string::npos);
  EXPECT_NE(emit_layout_xml(ir).find("android:layout_marginTop=\"10.0dp\""), std::string::npos);
  EXPECT_THROW(build_ir(tree, {}, 0.0, 200, 200), ConfigError);
}

TEST(BuildIr, RootOnlyTree) {
  const auto ir = build_ir(GuiNode::container("FrameLayout", {0, 0, 50, 80}), {}, 2.0, 50, 80);
  EXPECT_TRUE(ir.root.children.empty());
  EXPECT_EQ(ir.root.margin_start_dp, 0.0);
  EXPECT_EQ(ir.root.margin_top_dp, 0.0);
  EXPECT_EQ(ir.root.id, "FrameLayout0");
}

TEST(BuildIr, IdenticalStylesShareOneEntry) {
  const ComponentStyle s = red_button_style();
  const auto ir = build_ir(linear_with_two_buttons(), {{}, {s, {}}, {s, {}}}, 2.0, 400, 200);
  ASSERT_EQ(ir.styles.size(), 1u);
  EXPECT_EQ(ir.root.style, -1);
  EXPECT_EQ(ir.root.children[0].style, 0);
  EXPECT_EQ(ir.root.children[1].style, 0);
  const std::string layout = emit_layout_xml(ir);
  std::size_t refs = 0;
  for (auto p = layout.find("style=\"@style/Style1\""); p != std::string::npos; p = layout.find("style=\"@style/Style1\"", p + 1))
    ++refs;
  EXPECT_EQ(refs, 2u);
}

TEST(Emit, LinearLayoutWithTwoButtons) {
  const auto ir = build_ir(linear_with_two_buttons(), {{}, {red_button_style(), {}}, {red_button_style(), {}}}, 2.0, 400, 200);
  const std::string xml = emit_layout_xml(ir);
  const std::string want = R"(<?xml version="1.0" encoding="utf-8"?>
<LinearLayout xmlns:android="http://schemas.android.com/apk/res/android"
    android:id="@+id/LinearLayout0"
    android:layout_width="200.0dp"
    android:layout_height="100.0dp"
    android:layout_marginStart="0.0dp"
    android:layout_marginTop="0.0dp"
    android:orientation="vertical">
    <Button
        android:id="@+id/Button1"
        android:layout_width="50.0dp"
        android:layout_height="20.0dp"
        android:layout_marginStart="5.0dp"
        android:layout_marginTop="10.0dp"
        android:text="OK"
        android:textSize="16.8sp"
        style="@style/Style1" />
    <Button
        android:id="@+id/Button2"
        android:layout_width="50.0dp"
        android:layout_height="20.0dp"
        android:layout_marginStart="5.0dp"
        android:layout_marginTop="40.0dp"
        android:text="OK"
        android:textSize="16.8sp"
        style="@style/Style1" />
</LinearLayout>
)";
  EXPECT_EQ(xml, want);
  EXPECT_EQ(xml.rfind(R"(<?xml version="1.0" encoding="utf-8"?>)", 0), 0u);
}

TEST(Emit, StyleEntryPattern) {
  const auto ir = build_ir(linear_with_two_buttons(), {{}, {red_button_style(), {}}}, 2.0, 400, 200);
  EXPECT_EQ(emit_style_xml(ir), R"(<?xml version="1.0" encoding="utf-8"?>
<resources>
    <style name="Style1">
        <item name="android:background">#DD4B39</item>
        <item name="android:textColor">#FEFEFF</item>
    </style>
</resources>
)");
}

TEST(Emit, ActivitySkeletonNamesLayout) {
  const auto ir = build_ir(linear_with_two_buttons(), {}, 2.0, 400, 200);
  const std::string java = emit_activity(ir);
  EXPECT_NE(java.find("setContentView(R.layout.main_activity);"), std::string::npos);
  EXPECT_NE(java.find("public class MainActivity extends Activity"), std::string::npos);
  EXPECT_NE(emit_activity(ir, "other").find("R.layout.other"), std::string::npos);
}

TEST(Emit, TextBearingLeavesAlwaysCarryTextAndSize) {
  const auto tree = GuiNode::container("FrameLayout", {0, 0, 100, 100},
                                       {GuiNode::leaf(ComponentClass::TextView, {0, 0, 50, 20}),
                                        GuiNode::leaf(ComponentClass::ImageView, {0, 40, 50, 20})});
  const auto ir = build_ir(tree, {}, 2.0, 100, 100);
  const auto layout = parse_layout(emit_layout_xml(ir));
  ASSERT_EQ(layout.children.size(), 2u);
  EXPECT_EQ(layout.children[0].text, "");
  EXPECT_FALSE(layout.children[1].text);
  EXPECT_NE(emit_layout_xml(ir).find("android:textSize=\"14.0sp\""), std::string::npos);
}

TEST(Emit, RoundTripUniqueIdsAndResolvedStyles) {
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    const GuiNode tree = random_tree(rng, {0, 0, rng.uniform_int(40, 1200), rng.uniform_int(40, 1920)}, 4);
    const double density = std::array{1.0, 2.0, 3.0, 2.625}[static_cast<std::size_t>(rng.uniform_int(0, 3))];
    const auto ir = build_ir(tree, random_attrs(rng, tree), density, tree.bounds.w, tree.bounds.h);
    const std::string xml = emit_layout_xml(ir);
    const auto layout = parse_layout(xml);
    EXPECT_EQ(preorder_dp(layout), preorder_dp(ir.root));

    std::vector<std::string> ids;
    collect_ids(layout, ids);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
    EXPECT_TRUE(unresolved_styles(layout, parse_style_names(emit_style_xml(ir))).empty());
    // Byte-stable emission.
    EXPECT_EQ(emit_layout_xml(build_ir(tree, {}, density, 1, 1)), emit_layout_xml(build_ir(tree, {}, density, 1, 1)));
    EXPECT_EQ(xml, emit_layout_xml(ir));
  }
}

TEST(Emit, DanglingStyleReferenceIsReported) {
  const auto ir = build_ir(linear_with_two_buttons(), {{}, {red_button_style(), {}}}, 2.0, 400, 200);
  EXPECT_EQ(unresolved_styles(parse_layout(emit_layout_xml(ir)), {}), std::vector<std::string>{"Style1"});
}

TEST(Emit, TextIsEscaped) {
  const auto tree = GuiNode::container("FrameLayout", {0, 0, 100, 100},
                                       {GuiNode::leaf(ComponentClass::Button, {0, 0, 50, 20}, std::string("a<b & \"c\""))});
  const auto layout = parse_layout(emit_layout_xml(build_ir(tree, {}, 2.0, 100, 100)));
  EXPECT_EQ(layout.children[0].text, "a<b & \"c\"");
}

TEST(Format, ShortestDecimalWithFraction) {
  EXPECT_EQ(format_number(5), "5.0");
  EXPECT_EQ(format_number(16.8), "16.8");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
}
