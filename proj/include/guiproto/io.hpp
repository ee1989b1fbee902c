#pragma once

// File, PNG and hashing helpers used at the process boundary.

#include <png.h>
#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "guiproto/core.hpp"

namespace guiproto {

namespace fs = std::filesystem;

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// PNG (8-bit RGB, alpha dropped on decode)

inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw ParseError(std::string("cannot decode PNG: ") + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  // Transparent areas are composited onto white.
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&img, &background, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw ParseError(std::string("cannot decode PNG: ") + img.message);
  }
  return Image(static_cast<int>(img.width), static_cast<int>(img.height), std::move(pixels));
}

inline std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw ValidationError("cannot encode an empty image");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.data().data(), 0, nullptr))
    throw IoError(std::string("cannot encode PNG: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.data().data(), 0, nullptr))
    throw IoError(std::string("cannot encode PNG: ") + img.message);
  out.resize(size);
  return out;
}

inline std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_binary_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline Image read_png(const fs::path& path) { return decode_png(read_binary_file(path)); }

inline void write_png(const fs::path& path, const Image& image) { write_binary_file(path, encode_png(image)); }

// ---------------------------------------------------------------------------
// SHA-256 (hex) for provenance and manifest hashes.

inline std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("sha256 failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return ss.str();
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_text_file(path)); }

}  // namespace guiproto
