#include <gtest/gtest.h>

#include <random>
#include <string>

#include "crx/levenshtein.hpp"
#include "oracles.hpp"

namespace {

TEST(Levenshtein, EqualStringsHaveDistanceZero) {
  EXPECT_EQ(crx::levenshtein_distance("hirsch", "hirsch"), 0u);
}

TEST(Levenshtein, EmptyAgainstNonEmptyIsLength) {
  EXPECT_EQ(crx::levenshtein_distance("", "abc"), 3u);
  EXPECT_EQ(crx::levenshtein_distance("abc", ""), 3u);
  EXPECT_EQ(crx::levenshtein_distance("", ""), 0u);
}

TEST(Levenshtein, JacsoJackson) {
  // jac[k]so[n]
  ASSERT_EQ(oracle::edit_distance(std::string("jacso"), std::string("jackson")), 2u);
  EXPECT_EQ(crx::levenshtein_distance("jacso", "jackson"), 2u);
}

TEST(Levenshtein, CountsCodePointsNotBytes) {
  const std::u32string a = crx::text::decode_utf8("Glänzel");
  const std::u32string b = crx::text::decode_utf8("Glanzel");
  EXPECT_EQ(crx::levenshtein_distance<char32_t>(a, b), 1u);
  EXPECT_DOUBLE_EQ(crx::similarity("Glänzel", "Glanzel"), 1.0 - 1.0 / 7.0);
}

TEST(Similarity, PaperTitleVariants) {
  ASSERT_EQ(oracle::edit_distance(std::string("p natl acad sci usa"), std::string("p natl acad sci")), 4u);
  EXPECT_NEAR(crx::similarity("p natl acad sci usa", "p natl acad sci"), 1.0 - 4.0 / 19.0, 1e-12);
}

TEST(Similarity, Boundaries) {
  EXPECT_EQ(crx::similarity("", ""), 1.0);
  EXPECT_EQ(crx::similarity("same text", "same text"), 1.0);
  EXPECT_EQ(crx::similarity("a", "b"), 0.0);
  EXPECT_EQ(crx::similarity("", "xyz"), 0.0);
}

TEST(Levenshtein, AgreesWithOracleOnRandomPairs) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 24);
  std::uniform_int_distribution<int> ch('a', 'd');
  for (int t = 0; t < 500; ++t) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>(ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char>(ch(rng)));
    ASSERT_EQ(crx::levenshtein_distance(a, b), oracle::edit_distance(a, b)) << a << " / " << b;
    EXPECT_LE(crx::levenshtein_distance(a, b), std::max(a.size(), b.size()));
  }
}

}  // namespace
