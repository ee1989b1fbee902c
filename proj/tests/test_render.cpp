#include <gtest/gtest.h>

#include "guiproto/corpus.hpp"
#include "guiproto/io.hpp"
#include "guiproto/random.hpp"
#include "guiproto/render.hpp"

using namespace guiproto;

namespace {

SceneNode leaf_node(ComponentClass cls, BoundingBox b, Rng& rng) {
  SceneNode n;
  n.kind = NodeKind::Leaf;
  n.type = std::string(to_string(cls));
  n.component = cls;
  n.bounds = b;
  n.background = Rgb{static_cast<std::uint8_t>(rng.uniform_int(0, 255)), 90, 200};
  n.text = "Label 42";
  n.text_scale = rng.uniform_int(1, 4);
  n.state.checked = rng.coin();
  n.state.value = rng.uniform();
  n.state.number = rng.uniform_int(0, 5);
  if (rng.coin(0.3)) n.edge = Rgb{1, 2, 3};
  if (rng.coin(0.3)) n.asset = std::make_shared<const Image>(Image(5, 3, Rgb{200, 10, 10}));
  return n;
}

}  // namespace

TEST(Render, EmptyRootOnWhiteCanvas) {
  SceneNode root;
  root.bounds = {0, 0, 30, 20};
  const Image img = render(Scene{30, 20, Rgb{255, 255, 255}, root});
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) ASSERT_EQ(img.at(x, y), (Rgb{255, 255, 255}));
  EXPECT_THROW(render(Scene{0, 20, {}, root}), ValidationError);
}

TEST(Render, FullCanvasContainerFill) {
  SceneNode root;
  root.bounds = {0, 0, 40, 60};
  root.background = parse_hex_color("#DD4B39");
  const Image img = render(Scene{40, 60, Rgb{255, 255, 255}, root});
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 40; ++x) ASSERT_EQ(img.at(x, y), (Rgb{221, 75, 57}));
}

TEST(Render, SynthesizedScreensAreByteStable) {
  for (int c = 0; c < 15; ++c) {
    const auto cls = static_cast<ComponentClass>(c);
    const auto a = synthesize_screen(cls, 99);
    const auto b = synthesize_screen(cls, 99);
    EXPECT_EQ(encode_png(render(a.scene)), encode_png(render(b.scene))) << to_string(cls);
    EXPECT_EQ(render(a.scene), a.screenshot);
  }
}

TEST(Render, PaintersStayInsideTheirBounds) {
  Rng rng(1);
  const Rgb canvas{7, 7, 7};
  for (int i = 0; i < 300; ++i) {
    const auto cls = static_cast<ComponentClass>(i % 15);
    const BoundingBox b{rng.uniform_int(-20, 90), rng.uniform_int(-20, 90), rng.uniform_int(1, 80), rng.uniform_int(1, 60)};
    SceneNode root;
    root.bounds = {0, 0, 120, 100};
    root.children.push_back(leaf_node(cls, b, rng));
    RenderReport report;
    const Image img = render(Scene{120, 100, canvas, root}, &report);
    const BoundingBox clip = clip_box(b, img.rect());
    EXPECT_EQ(report.clipped_nodes, clip == b ? 0u : 1u);
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 120; ++x) {
        const bool inside = x >= clip.x && x < clip.right() && y >= clip.y && y < clip.bottom();
        if (!inside) ASSERT_EQ(img.at(x, y), canvas) << to_string(cls) << " at " << x << "," << y << " case " << i;
      }
  }
}

TEST(Render, ChildrenClipToParent) {
  Rng rng(2);
  SceneNode box;
  box.bounds = {10, 10, 20, 20};
  box.background = Rgb{0, 255, 0};
  box.children.push_back(leaf_node(ComponentClass::Button, {15, 15, 50, 50}, rng));
  SceneNode root;
  root.bounds = {0, 0, 80, 80};
  root.children.push_back(box);
  RenderReport report;
  const Image img = render(Scene{80, 80, Rgb{255, 255, 255}, root}, &report);
  EXPECT_EQ(report.clipped_nodes, 1u);
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 80; ++x)
      if (x < 10 || y < 10 || x >= 30 || y >= 30) ASSERT_EQ(img.at(x, y), (Rgb{255, 255, 255}));
}

TEST(Render, SynthesizedLeavesFrameTheirPixels) {
  for (int c = 0; c < 15; ++c) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto cls = static_cast<ComponentClass>(c);
      const auto s = synthesize_screen(cls, synth_seed(3, cls, seed));
      const Rgb bg = s.scene.background;
      for (const auto& leaf : leaves(s.record.root)) {
        // Leaves sit at least 16 px apart, so an 8 px ring is pure background.
        const BoundingBox around = clip_box({leaf.bounds.x - 8, leaf.bounds.y - 8, leaf.bounds.w + 16, leaf.bounds.h + 16},
                                            s.screenshot.rect());
        int x0 = INT32_MAX, y0 = INT32_MAX, x1 = -1, y1 = -1;
        for (int y = around.y; y < around.bottom(); ++y)
          for (int x = around.x; x < around.right(); ++x)
            if (s.screenshot.at(x, y) != bg) {
              x0 = std::min(x0, x);
              y0 = std::min(y0, y);
              x1 = std::max(x1, x);
              y1 = std::max(y1, y);
            }
        const BoundingBox ink{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
        EXPECT_LE(std::abs(ink.x - leaf.bounds.x), 1) << s.record.id;
        EXPECT_LE(std::abs(ink.y - leaf.bounds.y), 1) << s.record.id;
        EXPECT_LE(std::abs(ink.right() - leaf.bounds.right()), 1) << s.record.id;
        EXPECT_LE(std::abs(ink.bottom() - leaf.bounds.bottom()), 1) << s.record.id;
      }
    }
  }
}

TEST(Render, TextMetrics) {
  EXPECT_EQ(text_width("", 3), 0);
  EXPECT_EQ(text_width("A", 1), 5);
  EXPECT_EQ(text_width("AB", 2), 22);
  EXPECT_EQ(text_height(3), 21);
}

TEST(Render, ScreenRecordUsesPanelsAndInk) {
  ScreenRecord rec;
  rec.width = 60;
  rec.height = 40;
  rec.root = GuiNode::container("FrameLayout", {0, 0, 60, 40}, {GuiNode::leaf(ComponentClass::ImageView, {10, 10, 20, 20})});
  const Image img = render(rec);
  EXPECT_EQ(img.at(0, 0), (Rgb{255, 255, 255}));
  EXPECT_NE(img.at(20, 20), (Rgb{255, 255, 255}));
}
