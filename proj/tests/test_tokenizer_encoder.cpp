#include <gtest/gtest.h>

#include "tabprompt/encoder.hpp"
#include "tabprompt/tokenizer.hpp"

using namespace tabprompt;

TEST(Tokenizer, SplitsWordsAndPunctuation) {
  EXPECT_EQ(Tokenizer::split("l_name, price:USD"),
            (std::vector<std::string>{"l", "_", "name", ",", "price", ":", "USD"}));
  EXPECT_TRUE(Tokenizer::split("   ").empty());
}

TEST(Tokenizer, BuildAssignsIdsInFirstSeenOrder) {
  const std::vector<std::string> texts{"a b", "b c"};
  const Tokenizer t = Tokenizer::build(texts);
  EXPECT_EQ(t.size(), 4u);
  EXPECT_EQ(t.piece(0), "<unk>");
  EXPECT_EQ(t.id("a"), 1);
  EXPECT_EQ(t.id("c"), 3);
  EXPECT_EQ(t.id("zzz"), Tokenizer::kUnknown);
  EXPECT_EQ(t.tokenize("c a q"), (std::vector<int>{3, 1, 0}));
}

TEST(Tokenizer, KnownTokensRoundTrip) {
  const std::vector<std::string> texts{"city zip_code State"};
  const Tokenizer t = Tokenizer::build(texts);
  for (const auto& piece : Tokenizer::split(texts[0])) EXPECT_EQ(t.piece(t.id(piece)), piece);
}

TEST(SeededEncoder, DeterministicShapeAndFinite) {
  SeededEncoder a(20, 16, 2, 5), b(20, 16, 2, 5), c(20, 16, 2, 6);
  const std::vector<int> toks{1, 4, 7, 2};
  const Matrix h = a.encode(toks);
  EXPECT_EQ(h.rows(), 4);
  EXPECT_EQ(h.cols(), 16);
  EXPECT_TRUE(h.allFinite());
  EXPECT_EQ(h, b.encode(toks));
  EXPECT_NE(h, c.encode(toks));
}

TEST(SeededEncoder, ContextChangesLastPosition) {
  SeededEncoder e(20, 16, 2, 5);
  const Matrix a = e.encode(std::vector<int>{1, 2, 3});
  const Matrix b = e.encode(std::vector<int>{4, 2, 3});
  EXPECT_GT((a.row(2) - b.row(2)).norm(), 1e-6);
}

TEST(SeededEncoder, RejectsOutOfRangeTokens) {
  SeededEncoder e(5, 8, 1, 0);
  EXPECT_ANY_THROW(e.encode(std::vector<int>{5}));
}

TEST(VocabProjection, TiedToEmbeddings) {
  SeededEncoder e(12, 8, 1, 0);
  const auto p = VocabProjection::tied(e);
  EXPECT_EQ(p.weights, e.token_embeddings().transpose());
}
