#include <doctest.h>

#include <histovote/aggregate.hpp>
#include <histovote/errors.hpp>

#include <algorithm>
#include <random>

#include "oracles.hpp"

using namespace histovote;
using L = ClassLabel;

namespace {

ImageDecision vote(std::vector<ClassLabel> labels) { return majority_vote(labels); }

}  // namespace

TEST_SUITE("aggregate") {

TEST_CASE("worked examples") {
  const ImageDecision a = vote({L::Invasive, L::Invasive, L::Normal});
  CHECK(a.label == L::Invasive);
  CHECK_FALSE(a.tie_broken);
  CHECK(a.votes(L::Invasive) == 2);
  CHECK(a.n_patches == 3);

  const ImageDecision b = vote({L::Normal, L::Benign});
  CHECK(b.label == L::Benign);
  CHECK(b.tie_broken);

  const ImageDecision c = vote({L::Normal, L::Benign, L::InSitu, L::Invasive});
  CHECK(c.label == L::Invasive);
  CHECK(c.tie_broken);
}

TEST_CASE("single label") {
  const ImageDecision d = vote({L::Normal});
  CHECK(d.label == L::Normal);
  CHECK_FALSE(d.tie_broken);
  CHECK(d.vote_counts == std::array<int, 4>{1, 0, 0, 0});
}

TEST_CASE("ties among a subset resolve within that subset") {
  CHECK(vote({L::Normal, L::InSitu, L::Normal, L::InSitu, L::Invasive}).label == L::InSitu);
  CHECK(vote({L::Benign, L::Benign, L::Normal, L::Normal, L::Invasive}).label == L::Benign);
}

TEST_CASE("every sequence of up to six labels matches the oracle") {
  std::size_t checked = 0;
  for (int len = 1; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<ClassLabel> seq;
      for (int i = 0, c = code; i < len; ++i, c /= 4) seq.push_back(static_cast<ClassLabel>(c % 4));
      const ImageDecision got = majority_vote(seq);
      const oracle::Vote want = oracle::vote(seq);
      REQUIRE(got.label == want.label);
      REQUIRE(got.tie_broken == want.tie);
      int sum = 0;
      for (int v : got.vote_counts) sum += v;
      REQUIRE(sum == got.n_patches);
      ++checked;
    }
  }
  CHECK(checked == 4 + 16 + 64 + 256 + 1024 + 4096);
}

TEST_CASE("permutation invariance") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> l(0, 3), n(1, 30);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ClassLabel> seq(static_cast<std::size_t>(n(rng)));
    for (auto& x : seq) x = static_cast<ClassLabel>(l(rng));
    const ImageDecision base = majority_vote(seq);
    std::shuffle(seq.begin(), seq.end(), rng);
    CHECK(majority_vote(seq) == base);
  }
}

TEST_CASE("appending the winner keeps it winning") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> l(0, 3), n(1, 20);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ClassLabel> seq(static_cast<std::size_t>(n(rng)));
    for (auto& x : seq) x = static_cast<ClassLabel>(l(rng));
    const ClassLabel winner = majority_vote(seq).label;
    seq.push_back(winner);
    const ImageDecision after = majority_vote(seq);
    CHECK(after.label == winner);
    CHECK_FALSE(after.tie_broken);
  }
}

TEST_CASE("empty list") {
  CHECK_THROWS_AS(vote({}), EmptyVoteError);
}

}
