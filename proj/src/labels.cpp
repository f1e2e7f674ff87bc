#include "histovote/labels.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace histovote {

std::string_view label_name(ClassLabel label) {
  switch (label) {
    case ClassLabel::Normal: return "Normal";
    case ClassLabel::Benign: return "Benign";
    case ClassLabel::InSitu: return "InSitu";
    case ClassLabel::Invasive: return "Invasive";
  }
  return "?";
}

std::optional<ClassLabel> parse_label(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c == ' ' || c == '_' || c == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "normal") return ClassLabel::Normal;
  if (key == "benign") return ClassLabel::Benign;
  if (key == "insitu") return ClassLabel::InSitu;
  if (key == "invasive") return ClassLabel::Invasive;
  return std::nullopt;
}

std::string_view binary_label_name(BinaryLabel label) {
  return label == BinaryLabel::Carcinoma ? "Carcinoma" : "NonCarcinoma";
}

}  // namespace histovote
