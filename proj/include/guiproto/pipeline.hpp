#pragma once

// Screenshot (plus optional mockup metadata) to GUI IR: detect or read boxes,
// classify, group into containers, infer styles, build the IR.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "guiproto/codegen.hpp"
#include "guiproto/core.hpp"
#include "guiproto/detection.hpp"
#include "guiproto/hierarchy.hpp"
#include "guiproto/ocr.hpp"
#include "guiproto/parsers.hpp"
#include "guiproto/style.hpp"

namespace guiproto {

using Classifier = std::function<std::vector<std::pair<ComponentClass, double>>(const Image&)>;

struct PrototypeOptions {
  DetectionConfig detection;
  StyleOptions style;  // style.density doubles as the IR density
  int max_levels = 4;
};

struct ClassifiedComponent {
  BoundingBox bounds;
  ComponentClass label = ComponentClass::TextView;
  double score = 0.0;
  std::optional<std::string> text;
  std::optional<std::string> asset;
};

struct PrototypeResult {
  std::vector<ClassifiedComponent> components;  // input order
  HierarchyResult hierarchy;
  GuiIr ir;
};

// With `mockup` the declared boxes are used (scaled to the screenshot if the
// document size differs) and its text fields act as OCR; otherwise the CV
// detector runs and `ocr` (may be null) supplies text.
inline PrototypeResult build_prototype(const Image& screenshot, const MockupDocument* mockup, const Classifier& classify,
                                       const HierarchyIndex& index, const PrototypeOptions& opts,
                                       const OcrProvider* ocr = nullptr) {
  if (screenshot.empty()) throw ValidationError("screenshot is empty");
  std::unique_ptr<OcrProvider> mockup_ocr;
  PrototypeResult out;
  const BoundingBox frame = screenshot.rect();

  if (mockup) {
    if (mockup->width <= 0 || mockup->height <= 0) throw ValidationError("mockup size must be positive");
    for (const auto& o : mockup->objects) {
      const auto b = clip_box(detail::scale_box(o.bounds, mockup->width, mockup->height, frame.w, frame.h), frame);
      if (b.w == 0 || b.h == 0) continue;
      out.components.push_back({b, ComponentClass::TextView, 0.0, o.text, o.asset});
    }
    MockupDocument scaled{frame.w, frame.h, {}};
    for (const auto& c : out.components) scaled.objects.push_back({c.bounds, c.text, c.asset});
    mockup_ocr = annotation_ocr(scaled);
    ocr = mockup_ocr.get();
  } else {
    for (const auto& d : detect_components(screenshot, opts.detection, ocr))
      out.components.push_back({d.bounds, ComponentClass::TextView, 0.0, std::nullopt, std::nullopt});
  }

  std::vector<InputNode> inputs;
  for (auto& c : out.components) {
    const auto ranking = classify(screenshot.crop(c.bounds));
    if (ranking.empty()) throw ValidationError("classifier returned no scores");
    c.label = ranking.front().first;
    c.score = ranking.front().second;
    inputs.push_back({c.bounds, std::string(to_string(c.label)), c.label, c.text});
  }

  out.hierarchy = construct_hierarchy(inputs, index, opts.max_levels, frame.w, frame.h);

  StubOcr none;
  const OcrProvider& text_source = ocr ? *ocr : static_cast<const OcrProvider&>(none);
  std::vector<NodeAttributes> attrs;
  std::size_t leaf = 0;
  visit_preorder(out.hierarchy.root, [&](const GuiNode& n, int) {
    NodeAttributes a;
    if (n.is_leaf()) {
      const auto& src = out.components[out.hierarchy.leaf_inputs[leaf++]];
      const auto region = clip_box(n.bounds, frame);
      if (n.component && region.w > 0 && region.h > 0)
        a.style = infer_style(screenshot, region, *n.component, text_source, opts.style);
      a.asset = src.asset;
    } else {
      std::vector<BoundingBox> kids;
      for (const auto& c : n.children) kids.push_back(c.bounds);
      if (auto bg = infer_container_background(screenshot, n.bounds, kids, opts.style)) a.style = ComponentStyle{*bg, {}, {}, {}};
    }
    attrs.push_back(std::move(a));
  });
  out.ir = build_ir(out.hierarchy.root, attrs, opts.style.density, frame.w, frame.h);
  return out;
}

}  // namespace guiproto
