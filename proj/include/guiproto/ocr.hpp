#pragma once

// Pluggable text recognition. Providers must be safe for concurrent queries.

#include <memory>
#include <string>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/parsers.hpp"

namespace guiproto {

struct TextHit {
  BoundingBox box;  // screen coordinates
  std::string text;
  friend bool operator==(const TextHit&, const TextHit&) = default;
};

class OcrProvider {
 public:
  virtual ~OcrProvider() = default;
  // Text found in `region` of `screen`; every returned box lies inside `region`.
  virtual std::vector<TextHit> recognize(const Image& screen, const BoundingBox& region) const = 0;
};

// Finds nothing. Stands in when no OCR engine is available.
class StubOcr final : public OcrProvider {
 public:
  std::vector<TextHit> recognize(const Image&, const BoundingBox&) const override { return {}; }
};

// Echoes a fixed list of known text boxes (mockup annotations, test fixtures).
class StaticOcr final : public OcrProvider {
 public:
  explicit StaticOcr(std::vector<TextHit> hits) : hits_(std::move(hits)) {}

  std::vector<TextHit> recognize(const Image&, const BoundingBox& region) const override {
    std::vector<TextHit> out;
    for (const auto& h : hits_) {
      if (intersection_area(h.box, region) == 0) continue;
      out.push_back({clip_box(h.box, region), h.text});
    }
    return out;
  }

 private:
  std::vector<TextHit> hits_;
};

inline std::unique_ptr<OcrProvider> stub_ocr() { return std::make_unique<StubOcr>(); }

inline std::unique_ptr<OcrProvider> annotation_ocr(const MockupDocument& doc) {
  std::vector<TextHit> hits;
  for (const auto& o : doc.objects)
    if (o.text && !o.text->empty()) hits.push_back({o.bounds, *o.text});
  return std::make_unique<StaticOcr>(std::move(hits));
}

}  // namespace guiproto
