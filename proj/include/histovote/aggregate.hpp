#pragma once

#include <array>
#include <span>

#include "histovote/labels.hpp"

namespace histovote {

struct ImageDecision {
  ClassLabel label = ClassLabel::Normal;
  std::array<int, kNumClasses> vote_counts{};
  int n_patches = 0;
  bool tie_broken = false;

  int votes(ClassLabel l) const { return vote_counts[index_of(l)]; }
  friend bool operator==(const ImageDecision&, const ImageDecision&) = default;
};

/// Most frequent label; ties resolve Invasive > InSitu > Benign > Normal.
/// Throws EmptyVoteError on an empty list.
ImageDecision majority_vote(std::span<const ClassLabel> labels);

}  // namespace histovote
