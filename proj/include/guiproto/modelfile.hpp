#pragma once

// Versioned binary envelope for trained models:
//
//   "GPMF"  u32 version  u32 type tag  u32 header length  header JSON
//   float32 blobs (little-endian), in header "layers" order
//
// The JSON header carries the layer manifest (name + shape), the class-label
// order and model-specific metadata.

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/io.hpp"
#include "guiproto/tensor.hpp"

namespace guiproto {

inline constexpr std::uint32_t kModelFileVersion = 1;

enum class ModelType : std::uint32_t { Cnn = 1, Bovw = 2 };

struct ModelBlob {
  std::string name;
  Tensor tensor;
};

struct ModelFile {
  ModelType type = ModelType::Cnn;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<ComponentClass> labels;
  std::vector<ModelBlob> blobs;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw ParseError("model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_model(const ModelFile& m) {
  nlohmann::ordered_json header;
  header["meta"] = m.meta;
  header["labels"] = nlohmann::ordered_json::array();
  for (auto c : m.labels) header["labels"].push_back(std::string(to_string(c)));
  header["layers"] = nlohmann::ordered_json::array();
  for (const auto& b : m.blobs) header["layers"].push_back({{"name", b.name}, {"shape", b.tensor.shape()}});
  const std::string h = header.dump();

  std::vector<std::uint8_t> out{'G', 'P', 'M', 'F'};
  detail::put_u32(out, kModelFileVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(m.type));
  detail::put_u32(out, static_cast<std::uint32_t>(h.size()));
  out.insert(out.end(), h.begin(), h.end());
  for (const auto& b : m.blobs)
    for (float f : b.tensor.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

inline ModelFile decode_model(const std::vector<std::uint8_t>& in, std::optional<ModelType> expect = std::nullopt) {
  if (in.size() < 16 || std::memcmp(in.data(), "GPMF", 4) != 0) throw ParseError("not a model file (bad magic)");
  std::size_t pos = 4;
  const auto version = detail::get_u32(in, pos);
  if (version != kModelFileVersion)
    throw ValidationError("model file version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFileVersion) + ")");
  ModelFile m;
  const auto tag = detail::get_u32(in, pos);
  if (tag != 1 && tag != 2) throw ParseError("unknown model type tag " + std::to_string(tag));
  m.type = static_cast<ModelType>(tag);
  if (expect && *expect != m.type) throw ValidationError("model file holds a different model type");
  const auto hlen = detail::get_u32(in, pos);
  if (pos + hlen > in.size()) throw ParseError("model file truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.begin() + static_cast<std::ptrdiff_t>(pos), in.begin() + static_cast<std::ptrdiff_t>(pos + hlen));
    pos += hlen;
    m.meta = header.at("meta");
    for (const auto& l : header.at("labels")) {
      const auto c = parse_component_class(l.get<std::string>());
      if (!c) throw ValidationError("model file: unknown class label " + l.get<std::string>());
      m.labels.push_back(*c);
    }
    for (const auto& l : header.at("layers")) {
      Tensor t(l.at("shape").get<std::vector<int>>());
      for (auto& f : t.values()) f = std::bit_cast<float>(detail::get_u32(in, pos));
      m.blobs.push_back({l.at("name").get<std::string>(), std::move(t)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file header: ") + e.what());
  }
  if (pos != in.size()) throw ParseError("model file has trailing bytes");
  return m;
}

inline const Tensor& find_blob(const ModelFile& m, std::string_view name) {
  for (const auto& b : m.blobs)
    if (b.name == name) return b.tensor;
  throw ValidationError("model file lacks layer \"" + std::string(name) + "\"");
}

}  // namespace guiproto
