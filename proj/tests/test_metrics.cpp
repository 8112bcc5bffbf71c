#include "veilbench/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace veilbench;
using namespace veilbench::metrics;

namespace {

// reference LCS: try every subsequence of the shorter side (lengths <= 10)
std::size_t brute_force_lcs(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
  const std::vector<std::string>& s = a.size() <= b.size() ? a : b;
  const std::vector<std::string>& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    std::vector<const std::string*> sub;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask & (1u << i)) sub.push_back(&s[i]);
    std::size_t j = 0;
    for (const std::string& tok : t) {
      if (j < sub.size() && tok == *sub[j]) ++j;
    }
    if (j == sub.size() && sub.size() > best) best = sub.size();
  }
  return best;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng,
                                       std::size_t max_len) {
  static const std::vector<std::string> vocab = {"red", "green", "blue",
                                                 "cyan"};
  std::vector<std::string> out;
  std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) out.push_back(vocab[rng() % 4]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// tokenization
// ---------------------------------------------------------------------------

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  std::vector<std::string> toks = tokenize("The cat, the CAT -- sat!");
  std::vector<std::string> want = {"the", "cat", "the", "cat", "sat"};
  EXPECT_EQ(toks, want);
}

TEST(Tokenize, DigitsKeptAndUnderscoreSplits) {
  std::vector<std::string> toks = tokenize("page_003 met 42 users");
  std::vector<std::string> want = {"page", "003", "met", "42", "users"};
  EXPECT_EQ(toks, want);
}

TEST(Tokenize, NonAsciiBytesStayInWords) {
  std::vector<std::string> toks = tokenize("caf\xC3\xA9 au lait");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0], "caf\xC3\xA9");
}

TEST(Tokenize, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("--- ... !!!").empty());
}

// ---------------------------------------------------------------------------
// LCS against the brute-force oracle
// ---------------------------------------------------------------------------

TEST(Lcs, PinnedExamples) {
  EXPECT_EQ(lcs_length(tokenize("a b c d"), tokenize("a c d")), 3u);
  EXPECT_EQ(lcs_length(tokenize("a b"), tokenize("c d")), 0u);
  EXPECT_EQ(lcs_length(tokenize("x"), tokenize("x")), 1u);
  EXPECT_EQ(lcs_length({}, tokenize("x y")), 0u);
}

TEST(Lcs, MatchesBruteForceOnRandomPairs) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::string> a = random_tokens(rng, 10);
    std::vector<std::string> b = random_tokens(rng, 10);
    EXPECT_EQ(lcs_length(a, b), brute_force_lcs(a, b))
        << "iteration " << iter;
  }
}

TEST(Lcs, SymmetricInArguments) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<std::string> a = random_tokens(rng, 10);
    std::vector<std::string> b = random_tokens(rng, 10);
    EXPECT_EQ(lcs_length(a, b), lcs_length(b, a));
  }
}

// ---------------------------------------------------------------------------
// ROUGE-L F1
// ---------------------------------------------------------------------------

TEST(RougeL, WorkedSixFiveExample) {
  RougeScore s = rouge_l_f1("the cat sat on the mat", "the cat on the mat");
  EXPECT_EQ(s.lcs_len, 5);
  EXPECT_EQ(s.ref_len, 6);
  EXPECT_EQ(s.cand_len, 5);
  EXPECT_NEAR(s.recall, 5.0 / 6.0, 1e-9);
  EXPECT_NEAR(s.precision, 1.0, 1e-9);
  EXPECT_NEAR(s.f1, 10.0 / 11.0, 1e-9);
}

TEST(RougeL, IdenticalTextsScoreOne) {
  EXPECT_NEAR(rouge_l_f1("alpha beta gamma", "alpha beta gamma").f1, 1.0,
              1e-12);
}

TEST(RougeL, DisjointTextsScoreZero) {
  EXPECT_EQ(rouge_l_f1("alpha beta", "gamma delta").f1, 0.0);
}

TEST(RougeL, EmptySidesAreZeroNotNan) {
  EXPECT_EQ(rouge_l_f1("", "some words").f1, 0.0);
  EXPECT_EQ(rouge_l_f1("some words", "").f1, 0.0);
  EXPECT_EQ(rouge_l_f1("", "").f1, 0.0);
}

TEST(RougeL, BetaWeightsRecall) {
  RougeConfig recall_heavy;
  recall_heavy.beta = 2.0;
  RougeScore base = rouge_l_f1("a b c d e f", "a b");
  RougeScore heavy =
      rouge_l_f1(tokenize("a b c d e f"), tokenize("a b"), recall_heavy);
  // candidate is precise but incomplete, so weighting recall lowers the score
  EXPECT_LT(heavy.f1, base.f1);
}

TEST(RougeL, ScoreWithinUnitInterval) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::string> a = random_tokens(rng, 10);
    std::vector<std::string> b = random_tokens(rng, 10);
    double f1 = rouge_l_f1(a, b).f1;
    EXPECT_GE(f1, 0.0);
    EXPECT_LE(f1, 1.0 + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// embeddings and cosine similarity
// ---------------------------------------------------------------------------

TEST(Cosine, SelfSimilarityIsOne) {
  FallbackEmbedder fb;
  EmbeddingVector v = fb.embed("a quiet page about sailing routes");
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-9);
}

TEST(Cosine, DisjointTokenSetsScoreZero) {
  FallbackEmbedder fb;
  EmbeddingVector u = fb.embed("alpha beta");
  EmbeddingVector v = fb.embed("gamma delta");
  EXPECT_NEAR(cosine_similarity(u, v), 0.0, 1e-9);
}

TEST(Cosine, ScaleInvariant) {
  FallbackEmbedder fb;
  EmbeddingVector u = fb.embed("one two three four");
  EmbeddingVector v = fb.embed("one two five");
  double base = cosine_similarity(u, v);
  EmbeddingVector scaled = u;
  for (double& d : scaled.dims) d *= 37.5;
  EXPECT_NEAR(cosine_similarity(scaled, v), base, 1e-9);
}

TEST(Cosine, MismatchedDimensionsRejected) {
  EmbeddingVector u, v;
  u.dims = {1.0, 0.0};
  v.dims = {1.0, 0.0, 0.0};
  EXPECT_THROW(cosine_similarity(u, v), EmbeddingMismatch);
}

TEST(Cosine, ZeroVectorRejected) {
  EmbeddingVector u, v;
  u.dims = {0.0, 0.0};
  v.dims = {1.0, 0.0};
  EXPECT_THROW(cosine_similarity(u, v), DegenerateEmbedding);
}

TEST(FallbackEmbedding, UnitNormAndStableProviderId) {
  FallbackEmbedder fb;
  EXPECT_EQ(fb.id(), "fallback-tf-384");
  EmbeddingVector v = fb.embed("the quick brown fox jumps");
  ASSERT_EQ(v.dims.size(), static_cast<std::size_t>(kEmbeddingDims));
  EXPECT_EQ(v.provider_id, "fallback-tf-384");
  double norm = 0;
  for (double d : v.dims) norm += d * d;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
}

TEST(FallbackEmbedding, EmptyTextRejected) {
  FallbackEmbedder fb;
  EXPECT_THROW(fb.embed(""), DegenerateEmbedding);
  EXPECT_THROW(fb.embed("!!! ---"), DegenerateEmbedding);
}

TEST(FallbackEmbedding, TokenOrderIrrelevantButCountsMatter) {
  FallbackEmbedder fb;
  EmbeddingVector a = fb.embed("alpha beta gamma");
  EmbeddingVector b = fb.embed("gamma beta alpha");
  EXPECT_NEAR(cosine_similarity(a, b), 1.0, 1e-12);
  EmbeddingVector c = fb.embed("alpha alpha beta gamma");
  EXPECT_LT(cosine_similarity(a, c), 1.0 - 1e-6);
}

TEST(Cosine, RandomTextPropertyChecks) {
  FallbackEmbedder fb;
  std::mt19937_64 rng(31337);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> a = random_tokens(rng, 10);
    std::vector<std::string> b = random_tokens(rng, 10);
    if (a.empty() || b.empty()) continue;
    std::string sa, sb;
    for (const std::string& t : a) sa += t + " ";
    for (const std::string& t : b) sb += t + " ";
    EmbeddingVector u = fb.embed(sa);
    EmbeddingVector v = fb.embed(sb);
    double uv = cosine_similarity(u, v);
    EXPECT_NEAR(uv, cosine_similarity(v, u), 1e-12);
    EXPECT_GE(uv, -1.0 - 1e-9);
    EXPECT_LE(uv, 1.0 + 1e-9);
  }
}
