#pragma once

// Minimal XML DOM over Boost.PropertyTree plus attribute escaping.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guiproto/core.hpp"

namespace guiproto::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;

  std::optional<std::string> attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
      if (k == key) return v;
    return std::nullopt;
  }
};

namespace detail {

inline Element from_ptree(const std::string& name, const boost::property_tree::ptree& tree) {
  Element e;
  e.name = name;
  for (const auto& [key, child] : tree) {
    if (key == "<xmlattr>") {
      for (const auto& [ak, av] : child) e.attributes.emplace_back(ak, av.data());
    } else if (key == "<xmltext>" || key == "<xmlcomment>") {
      continue;
    } else {
      e.children.push_back(from_ptree(key, child));
    }
  }
  return e;
}

}  // namespace detail

// Parses a document and returns its single root element.
inline Element parse(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments | pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML: " + e.message(), e.line());
  }
  std::vector<Element> roots;
  for (const auto& [key, child] : tree)
    if (key != "<xmlcomment>" && key != "<xmltext>") roots.push_back(detail::from_ptree(key, child));
  if (roots.size() != 1) throw ParseError("XML document must have exactly one root element");
  return std::move(roots.front());
}

inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::string_view kDeclaration = R"(<?xml version="1.0" encoding="utf-8"?>)";

}  // namespace guiproto::xml
