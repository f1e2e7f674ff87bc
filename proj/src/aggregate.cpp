#include "histovote/aggregate.hpp"

#include "histovote/errors.hpp"

namespace histovote {

ImageDecision majority_vote(std::span<const ClassLabel> labels) {
  if (labels.empty()) throw EmptyVoteError("majority vote over an empty label list");
  ImageDecision d;
  for (ClassLabel l : labels) ++d.vote_counts[index_of(l)];
  d.n_patches = static_cast<int>(labels.size());

  // Walking in precedence order with a strict comparison leaves the most dangerous class on ties.
  int best = -1;
  int at_max = 0;
  for (ClassLabel l : kPrecedenceOrder) {
    const int v = d.votes(l);
    if (v > best) {
      best = v;
      d.label = l;
      at_max = 1;
    } else if (v == best) {
      ++at_max;
    }
  }
  d.tie_broken = at_max >= 2;
  return d;
}

}  // namespace histovote
