#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace histovote {

/// Diagnostic classes. The underlying value is the model's class index.
enum class ClassLabel : std::uint8_t { Normal = 0, Benign = 1, InSitu = 2, Invasive = 3 };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<ClassLabel, kNumClasses> kAllLabels{ClassLabel::Normal, ClassLabel::Benign,
                                                                ClassLabel::InSitu, ClassLabel::Invasive};
/// Most dangerous first; used to break every tie.
inline constexpr std::array<ClassLabel, kNumClasses> kPrecedenceOrder{ClassLabel::Invasive, ClassLabel::InSitu,
                                                                      ClassLabel::Benign, ClassLabel::Normal};

constexpr std::size_t index_of(ClassLabel label) { return static_cast<std::size_t>(label); }

/// 0 is the highest precedence (Invasive).
constexpr int precedence_rank(ClassLabel label) { return 3 - static_cast<int>(label); }

constexpr bool outranks(ClassLabel a, ClassLabel b) { return precedence_rank(a) < precedence_rank(b); }

std::string_view label_name(ClassLabel label);
/// Accepts the canonical names plus common spellings ("in situ", "in_situ", "insitu", lower case).
std::optional<ClassLabel> parse_label(std::string_view text);

enum class BinaryLabel : std::uint8_t { NonCarcinoma = 0, Carcinoma = 1 };

constexpr BinaryLabel to_binary(ClassLabel label) {
  return (label == ClassLabel::InSitu || label == ClassLabel::Invasive) ? BinaryLabel::Carcinoma
                                                                        : BinaryLabel::NonCarcinoma;
}

std::string_view binary_label_name(BinaryLabel label);

}  // namespace histovote
