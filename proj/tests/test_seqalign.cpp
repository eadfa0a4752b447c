#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "correctspeech/lexicon.hpp"
#include "correctspeech/seqalign.hpp"
#include "oracles.hpp"

namespace cs = correctspeech;
using Seq = std::vector<int>;
using Words = std::vector<std::string>;

namespace {

Seq random_seq(std::mt19937_64& rng, int alphabet, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  Seq s(len(rng));
  for (auto& x : s) x = sym(rng);
  return s;
}

}  // namespace

TEST(Align, Identity) {
  const Words a = {"a", "b", "c"};
  const auto al = cs::align(a, a);
  EXPECT_EQ(al.ops_string(), "UUU");
  EXPECT_EQ(al.cost, 0u);
}

TEST(Align, AllInsert) {
  const auto al = cs::align(Words{}, Words{"a", "b", "c"});
  EXPECT_EQ(al.ops_string(), "III");
  EXPECT_EQ(al.cost, 3u);
  EXPECT_EQ(cs::align(Words{"a", "b"}, Words{}).ops_string(), "DD");
  EXPECT_EQ(cs::align(Words{}, Words{}).pairs.size(), 0u);
}

TEST(Align, HeavilyWordRow) {
  const Words hyp = {"we", "are", "heavily"};
  const Words ref = {"we", "are", "not", "happy"};
  const auto al = cs::align(hyp, ref);
  EXPECT_EQ(al.cost, 2u);
  EXPECT_EQ(al.cost, oracle::levenshtein_exhaustive(hyp, 0, ref, 0));
  ASSERT_EQ(al.pairs.size(), 4u);
  EXPECT_EQ(al.ops_string(), "UURI");
  EXPECT_EQ(al.pairs[2], (cs::AlignedPair{2, 2, cs::EditOp::kReplace}));
  EXPECT_EQ(al.pairs[3], (cs::AlignedPair{std::nullopt, 3, cs::EditOp::kInsert}));
}

TEST(Align, TieBreakPrefersDiagonalThenDelete) {
  // "ab" -> "b": delete a, keep b.
  EXPECT_EQ(cs::align(Words{"a", "b"}, Words{"b"}).ops_string(), "DU");
  // "ab" -> "ba": replace twice costs 2, as does D/I around a match; diagonal first.
  EXPECT_EQ(cs::align(Words{"a", "b"}, Words{"b", "a"}).ops_string(), "RR");
  // "a" -> "xy": replace then insert.
  EXPECT_EQ(cs::align(Words{"a"}, Words{"x", "y"}).ops_string(), "RI");
  // "xy" -> "a": replace then delete.
  EXPECT_EQ(cs::align(Words{"x", "y"}, Words{"a"}).ops_string(), "RD");
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(cs::edit_distance(Words{"x"}, Words{"x"}), 0u);
  EXPECT_EQ(cs::edit_distance(std::vector<char>{'a', 'b', 'c'}, std::vector<char>{'a', 'x', 'c'}), 1u);
}

TEST(EditDistance, MatchesTextbookOracleAndAlign) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_seq(rng, 1 + static_cast<int>(rng() % 10), 12);
    const auto b = random_seq(rng, 1 + static_cast<int>(rng() % 10), 12);
    const auto al = cs::align(a, b);
    const auto expect = oracle::levenshtein(a, b);
    ASSERT_EQ(al.cost, expect);
    ASSERT_EQ(cs::edit_distance(a, b), expect);
    ASSERT_TRUE(oracle::script_is_valid(al, a, b));
  }
}

TEST(EditDistance, MatchesExhaustiveSearchOnShortInputs) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_seq(rng, 3, 6);
    const auto b = random_seq(rng, 3, 6);
    ASSERT_EQ(cs::align(a, b).cost, oracle::levenshtein_exhaustive(a, 0, b, 0));
  }
}

TEST(Align, EveryIndexAppearsOnce) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_seq(rng, 4, 12);
    const auto b = random_seq(rng, 4, 12);
    const auto al = cs::align(a, b);
    std::vector<int> seen_a(a.size(), 0);
    std::vector<int> seen_b(b.size(), 0);
    std::optional<std::size_t> last_a;
    std::optional<std::size_t> last_b;
    for (const auto& p : al.pairs) {
      if (p.hyp_index) {
        ++seen_a[*p.hyp_index];
        if (last_a) {
          EXPECT_GT(*p.hyp_index, *last_a);
        }
        last_a = p.hyp_index;
      }
      if (p.ref_index) {
        ++seen_b[*p.ref_index];
        if (last_b) {
          EXPECT_GT(*p.ref_index, *last_b);
        }
        last_b = p.ref_index;
      }
    }
    for (int c : seen_a) EXPECT_EQ(c, 1);
    for (int c : seen_b) EXPECT_EQ(c, 1);
  }
}

TEST(Align, TransposeSymmetry) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_seq(rng, 5, 12);
    const auto b = random_seq(rng, 5, 12);
    const auto ab = cs::align(a, b);
    const auto ba = cs::align(b, a);
    EXPECT_EQ(ab.cost, ba.cost);
    auto count = [](const cs::Alignment& al, cs::EditOp op) {
      std::size_t n = 0;
      for (const auto& p : al.pairs) n += p.op == op ? 1 : 0;
      return n;
    };
    // Insert/delete counts swap for some optimal transposed script; the
    // totals of each must balance the length difference either way.
    EXPECT_EQ(count(ab, cs::EditOp::kInsert) - count(ab, cs::EditOp::kDelete) + a.size(), b.size());
    EXPECT_EQ(count(ba, cs::EditOp::kInsert) - count(ba, cs::EditOp::kDelete) + b.size(), a.size());
  }
}

TEST(Align, TriangleInequality) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_seq(rng, 4, 12);
    const auto b = random_seq(rng, 4, 12);
    const auto c = random_seq(rng, 4, 12);
    EXPECT_LE(cs::edit_distance(a, c), cs::edit_distance(a, b) + cs::edit_distance(b, c));
  }
}

TEST(Align, CoarseningNeverIncreasesCost) {
  std::mt19937_64 rng(26);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_seq(rng, 10, 12);
    const auto b = random_seq(rng, 10, 12);
    const int buckets = 1 + static_cast<int>(rng() % 9);
    auto f = [&](Seq s) {
      for (auto& x : s) x %= buckets;
      return s;
    };
    EXPECT_LE(cs::edit_distance(f(a), f(b)), cs::edit_distance(a, b));
  }
}

TEST(Align, CustomEquality) {
  const std::vector<cs::Phone> a = {cs::Phone::from_string("AH0"), cs::Phone::from_string("T")};
  const std::vector<cs::Phone> b = {cs::Phone::from_string("AH1"), cs::Phone::from_string("T")};
  EXPECT_EQ(cs::align(a, b).cost, 1u);
  auto same_base = [](const cs::Phone& x, const cs::Phone& y) { return x.base() == y.base(); };
  EXPECT_EQ(cs::align(a, b, same_base).cost, 0u);
}
