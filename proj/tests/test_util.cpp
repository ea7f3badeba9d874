#include <gtest/gtest.h>

#include <map>
#include <set>

#include "tabprompt/hash.hpp"
#include "tabprompt/random.hpp"

using namespace tabprompt;

TEST(Hash, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hash, HexIsSixteenLowercaseDigits) {
  EXPECT_EQ(to_hex(0), "0000000000000000");
  EXPECT_EQ(to_hex(0xABCDEF0123456789ULL), "abcdef0123456789");
  EXPECT_EQ(hash_hex("a"), "af63dc4c8601ec8c");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(1);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 6000; ++i) {
    const auto v = rng.below(6);
    ASSERT_LT(v, 6u);
    ++counts[v];
  }
  for (const auto& [v, n] : counts) EXPECT_NEAR(n, 1000, 150) << v;
}

TEST(Rng, Uniform01InHalfOpenUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng rng(5);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
  Rng rng(9);
  for (std::size_t count = 0; count <= 10; ++count) {
    const auto s = rng.sample_without_replacement(10, count);
    ASSERT_EQ(s.size(), count);
    std::set<std::size_t> uniq(s.begin(), s.end());
    EXPECT_EQ(uniq.size(), count);
    for (auto v : s) EXPECT_LT(v, 10u);
  }
  EXPECT_EQ(rng.sample_without_replacement(3, 5).size(), 3u);
}

TEST(Rng, StateRoundTripResumesStream) {
  Rng a(11);
  for (int i = 0; i < 17; ++i) a.next();
  Rng b(0);
  b.restore(a.state());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(2);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto w = v;
  rng.shuffle(w);
  std::multiset<int> a(v.begin(), v.end()), b(w.begin(), w.end());
  EXPECT_EQ(a, b);
}
