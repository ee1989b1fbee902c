#include <gtest/gtest.h>

#include "guiproto/random.hpp"
#include "guiproto/render.hpp"
#include "guiproto/style.hpp"

using namespace guiproto;

namespace {

Image random_image(Rng& rng, int w, int h, int palette) {
  std::vector<Rgb> colors;
  for (int i = 0; i < palette; ++i)
    colors.push_back({static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                      static_cast<std::uint8_t>(rng.uniform_int(0, 255))});
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, colors[static_cast<std::size_t>(rng.uniform_int(0, palette - 1))]);
  return img;
}

int channel_gap(Rgb a, Rgb b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
}

}  // namespace

TEST(Histogram, SolidCropIsOneBucket) {
  const auto h = color_histogram(Image(7, 5, Rgb{255, 0, 0}));
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].count, 35u);
  EXPECT_EQ(h[0].representative, (Rgb{248, 8, 8}));
}

TEST(Histogram, EqualCountsBreakTiesByBucketId) {
  Image img(10, 4, Rgb{255, 0, 0});
  for (int y = 0; y < 4; ++y)
    for (int x = 5; x < 10; ++x) img.set(x, y, {0, 0, 255});
  const auto h = color_histogram(img);
  ASSERT_EQ(h.size(), 2u);
  // 4-bit ids: red = 15 << 8, blue = 15.
  EXPECT_EQ(h[0].id, 15u);
  EXPECT_EQ(h[1].id, 15u << 8);
  EXPECT_EQ(h[0].count, 20u);
  EXPECT_EQ(h[1].count, 20u);
}

TEST(Histogram, EightBitsCountsExactColors) {
  Image img(3, 1);
  img.set(0, 0, {1, 2, 3});
  img.set(1, 0, {1, 2, 3});
  img.set(2, 0, {1, 2, 4});
  const auto h = color_histogram(img, 8);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].representative, (Rgb{1, 2, 3}));
  EXPECT_EQ(h[0].count, 2u);
  EXPECT_EQ(h[1].representative, (Rgb{1, 2, 4}));
  EXPECT_THROW(color_histogram(img, 0), ConfigError);
  EXPECT_THROW(color_histogram(Image()), ValidationError);
}

TEST(Histogram, CountsSumToPixelCount) {
  Rng rng(1);
  for (int i = 0; i < 40; ++i) {
    const int w = rng.uniform_int(1, 30), h = rng.uniform_int(1, 30);
    const Image img = random_image(rng, w, h, rng.uniform_int(1, 12));
    for (int bits : {1, 4, 8}) {
      const auto hist = color_histogram(img, bits);
      std::size_t total = 0;
      for (std::size_t j = 0; j < hist.size(); ++j) {
        total += hist[j].count;
        if (j) EXPECT_TRUE(hist[j - 1].count > hist[j].count || (hist[j - 1].count == hist[j].count && hist[j - 1].id < hist[j].id));
      }
      EXPECT_EQ(total, static_cast<std::size_t>(w * h));
    }
  }
}

TEST(InferStyle, FontSizeFromCropHeight) {
  const Image crop(100, 48, Rgb{255, 255, 255});
  const auto s = infer_style(crop, ComponentClass::TextView);
  ASSERT_TRUE(s.font_size_dp.has_value());
  EXPECT_DOUBLE_EQ(*s.font_size_dp, 48 * 0.7 / 2.0);
  EXPECT_DOUBLE_EQ(*s.font_size_dp, 16.8);
  double prev = 0;
  for (int h = 1; h < 200; ++h) {
    const double f = font_size_dp(h);
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(InferStyle, ImageViewHasNoFontFields) {
  Rng rng(2);
  const auto s = infer_style(random_image(rng, 20, 20, 4), ComponentClass::ImageView);
  EXPECT_FALSE(s.font_color);
  EXPECT_FALSE(s.font_size_dp);
  EXPECT_FALSE(s.text);
}

TEST(InferStyle, WhiteButtonWithBlackText) {
  SceneNode button;
  button.kind = NodeKind::Leaf;
  button.type = "Button";
  button.component = ComponentClass::Button;
  button.bounds = {0, 0, 160, 48};
  button.background = Rgb{255, 255, 255};
  button.foreground = Rgb{0, 0, 0};
  button.text = "SIGN UP";
  button.text_scale = 3;
  SceneNode root;
  root.bounds = {0, 0, 160, 48};
  root.children.push_back(button);
  const Image img = render(Scene{160, 48, Rgb{255, 255, 255}, root});

  const auto s = infer_style(img, ComponentClass::Button);
  EXPECT_LE(channel_gap(s.background, {255, 255, 255}), 8);
  ASSERT_TRUE(s.font_color.has_value());
  EXPECT_LE(channel_gap(*s.font_color, {0, 0, 0}), 8);
  EXPECT_EQ(s.background, color_histogram(img).front().representative);
}

TEST(InferStyle, SingleBucketFallsBackToContrast) {
  EXPECT_EQ(infer_style(Image(10, 10, Rgb{250, 250, 250}), ComponentClass::Button).font_color, (Rgb{0, 0, 0}));
  EXPECT_EQ(infer_style(Image(10, 10, Rgb{10, 10, 60}), ComponentClass::Button).font_color, (Rgb{255, 255, 255}));
}

TEST(InferStyle, DeterministicAndBackgroundIsFirstBucket) {
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    const Image img = random_image(rng, rng.uniform_int(2, 40), rng.uniform_int(2, 40), rng.uniform_int(1, 6));
    const auto cls = static_cast<ComponentClass>(rng.uniform_int(0, 14));
    const auto a = infer_style(img, cls);
    EXPECT_EQ(a, infer_style(img, cls));
    EXPECT_EQ(a.background, color_histogram(img).front().representative);
  }
}

TEST(Ocr, StubFindsNothing) {
  const Image screen(50, 50);
  EXPECT_TRUE(stub_ocr()->recognize(screen, {0, 0, 50, 50}).empty());
  const auto s = infer_style(screen, BoundingBox{0, 0, 50, 20}, ComponentClass::TextView, *stub_ocr());
  EXPECT_FALSE(s.text);
}

TEST(Ocr, AnnotationProviderEchoesIntersectingText) {
  MockupDocument doc{200, 100, {{{10, 10, 60, 20}, std::string("Sign up"), {}}, {{100, 60, 40, 20}, std::nullopt, {}}}};
  const auto ocr = annotation_ocr(doc);
  const Image screen(200, 100);
  const auto hits = ocr->recognize(screen, {0, 0, 100, 50});
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0], (TextHit{{10, 10, 60, 20}, "Sign up"}));
  EXPECT_TRUE(ocr->recognize(screen, {90, 50, 100, 50}).empty());
  // Returned boxes stay inside the queried region.
  const auto clipped = ocr->recognize(screen, {40, 0, 100, 25});
  ASSERT_EQ(clipped.size(), 1u);
  EXPECT_EQ(clip_box(clipped[0].box, {40, 0, 100, 25}), clipped[0].box);
  EXPECT_EQ(infer_style(screen, BoundingBox{0, 0, 100, 50}, ComponentClass::Button, *ocr).text, "Sign up");
}
