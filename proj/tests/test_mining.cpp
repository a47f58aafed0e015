#include <gtest/gtest.h>

#include <random>

#include "bginv/mining.hpp"
#include "test_util.hpp"

namespace bginv {
namespace {

using testing::four_image_corpus;

KeywordId kw(const Corpus& c, const char* s) { return *c.find_keyword(s); }

// Hand counts over the four transactions: sky 3, tree 3, water 2,
// {sky,tree} 2, {tree,water} 2, {sky,water} 1.
TEST(MineApriori, FourImageCorpusAtHalfSupport) {
  const Corpus c = four_image_corpus();
  const auto s = mine_apriori(c, 0.5);
  EXPECT_EQ(s.total_images, 4u);
  EXPECT_DOUBLE_EQ(s.pair_support(kw(c, "sky"), kw(c, "tree")), 0.5);
  EXPECT_DOUBLE_EQ(s.pair_support(kw(c, "tree"), kw(c, "water")), 0.5);
  EXPECT_FALSE(s.has_pair(kw(c, "sky"), kw(c, "water")));
  EXPECT_EQ(s.pair_count.size(), 2u);
  EXPECT_DOUBLE_EQ(s.singleton_support(kw(c, "sky")), 0.75);
}

TEST(MineApriori, FullSupportLeavesNoPairs) {
  const Corpus c = four_image_corpus();
  EXPECT_TRUE(mine_apriori(c, 1.0).pair_count.empty());
  EXPECT_TRUE(mine_fpgrowth(c, 1.0).pair_count.empty());
  EXPECT_TRUE(mine_bruteforce(c, 1.0).pair_count.empty());
}

TEST(MineApriori, SingleImageForcesFullSupport) {
  const Corpus c = load_corpus_string(R"({"id":"x","role":"background","keywords":["a","b"]})"
                                      "\n");
  for (const auto& s : {mine_apriori(c, 1.0), mine_fpgrowth(c, 1.0), mine_bruteforce(c, 1.0)})
    EXPECT_DOUBLE_EQ(s.pair_support(kw(c, "a"), kw(c, "b")), 1.0);
}

TEST(MineFpGrowth, MatchesAprioriOnFourImageCorpus) {
  const Corpus c = four_image_corpus();
  for (double ms : {0.25, 0.5, 0.75, 1.0}) {
    EXPECT_EQ(mine_fpgrowth(c, ms), mine_apriori(c, ms)) << ms;
    EXPECT_EQ(mine_bruteforce(c, ms), mine_apriori(c, ms)) << ms;
  }
}

TEST(MineFpGrowth, RandomCorpusSeed7EqualsApriori) {
  Rng rng(7);
  const auto txns = testing::random_transactions(rng, 12, 200);
  for (double ms : {0.01, 0.05, 0.1, 0.2}) {
    const auto fp = mine_fpgrowth(txns, ms);
    EXPECT_EQ(fp, mine_apriori(txns, ms));
    EXPECT_EQ(fp, mine_bruteforce(txns, 12, ms));
  }
}

TEST(MineFpGrowth, ThresholdJustAboveOneExcludesSingletons) {
  // Pairs {a,b} occur twice, {a,c} once.
  const Corpus c = load_corpus_string(
      R"({"id":"1","role":"background","keywords":["a","b"]})"
      "\n"
      R"({"id":"2","role":"background","keywords":["a","b"]})"
      "\n"
      R"({"id":"3","role":"background","keywords":["a","c"]})"
      "\n"
      R"({"id":"4","role":"background","keywords":["d"]})"
      "\n");
  const auto s = mine_fpgrowth(c, 1.0 / 4.0 + 1e-6);
  EXPECT_TRUE(s.has_pair(kw(c, "a"), kw(c, "b")));
  EXPECT_FALSE(s.has_pair(kw(c, "a"), kw(c, "c")));
  EXPECT_EQ(s, mine_apriori(c, 1.0 / 4.0 + 1e-6));
}

TEST(MineBruteforce, DisjointKeywordsGiveNoPairs) {
  const Corpus c = load_corpus_string(
      R"({"id":"1","role":"background","keywords":["a"]})"
      "\n"
      R"({"id":"2","role":"background","keywords":["b"]})"
      "\n"
      R"({"id":"3","role":"background","keywords":["c"]})"
      "\n");
  EXPECT_TRUE(mine_bruteforce(c, 0.1).pair_count.empty());
}

TEST(MineBruteforce, RefusesLargeKeywordTables) {
  std::vector<KeywordSet> txns{{0, 1}};
  EXPECT_THROW(mine_bruteforce(txns, 21, 0.5), Error);
}

TEST(Mining, OnlyBackgroundsAreMined) {
  const Corpus c = load_corpus_string(
      R"({"id":"t","role":"target","keywords":["fish","water"],"foreground":"fish"})"
      "\n"
      R"({"id":"b","role":"background","keywords":["water","sky"]})"
      "\n");
  const auto s = mine_apriori(c, 1.0);
  EXPECT_EQ(s.total_images, 1u);
  EXPECT_FALSE(s.singleton_count.count(kw(c, "fish")));
}

TEST(Mining, EmptyInputsAreErrors) {
  std::vector<KeywordSet> none;
  EXPECT_THROW(mine_apriori(none, 0.5), Error);
  EXPECT_THROW(mine_fpgrowth(none, 0.5), Error);
  const Corpus targets_only = load_corpus_string(R"({"id":"t","role":"target","keywords":["x"],"foreground":"x"})"
                                                 "\n");
  EXPECT_THROW(mine_fpgrowth(targets_only, 0.5), Error);
  EXPECT_THROW(min_count_for(0.0, 10), Error);
}

TEST(Confidences, FourImageCorpusHandArithmetic) {
  const Corpus c = four_image_corpus();
  const auto conf = confidences(mine_apriori(c, 0.25));
  EXPECT_NEAR(conf.confidence(kw(c, "sky"), kw(c, "tree")), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(conf.confidence(kw(c, "tree"), kw(c, "sky")), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(conf.confidence(kw(c, "water"), kw(c, "tree")), 1.0, 1e-15);
  EXPECT_NEAR(conf.confidence(kw(c, "sky"), kw(c, "water")), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(conf.confidence(kw(c, "water"), kw(c, "sky")), 0.5, 1e-15);
  EXPECT_EQ(conf.entries.size(), 6u);
}

TEST(Confidences, NonCommutativeWitness) {
  // support a = 0.8, b = 0.2, {a,b} = 0.2 over ten transactions.
  SupportTable s;
  s.total_images = 10;
  s.singleton_count = {{0, 8}, {1, 2}};
  s.pair_count = {{{0, 1}, 2}};
  const auto conf = confidences(s);
  EXPECT_DOUBLE_EQ(conf.confidence(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(conf.confidence(1, 0), 1.0);
}

TEST(Confidences, PairWithoutSingletonIsRejected) {
  SupportTable s;
  s.total_images = 2;
  s.pair_count = {{{0, 1}, 1}};
  EXPECT_THROW(confidences(s), Error);
}

// Property sweep: the three miners agree, supports are anti-monotone,
// confidence identity holds, and record order does not matter.
TEST(MiningProperties, RandomCorporaAgree) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const std::size_t nk = 2 + rng.below(11);
    const std::size_t ni = 1 + rng.below(200);
    auto txns = testing::random_transactions(rng, nk, ni);
    const double ms = rng.uniform(0.005, 0.5);
    const auto a = mine_apriori(txns, ms);
    ASSERT_EQ(a, mine_fpgrowth(txns, ms)) << "seed " << seed;
    ASSERT_EQ(a, mine_bruteforce(txns, nk, ms)) << "seed " << seed;

    for (const auto& [p, c] : a.pair_count) {
      EXPECT_LE(c, a.singleton_count.at(p.first));
      EXPECT_LE(c, a.singleton_count.at(p.second));
    }
    for (const auto& [p, rule] : confidences(a).entries)
      EXPECT_NEAR(rule.confidence * a.singleton_support(p.first), a.pair_support(p.first, p.second), 1e-12);

    std::shuffle(txns.begin(), txns.end(), std::mt19937(static_cast<unsigned>(seed)));
    EXPECT_EQ(a, mine_fpgrowth(txns, ms));
    EXPECT_EQ(a, mine_apriori(txns, ms));
  }
}

TEST(SupportDump, JsonRoundTrip) {
  const Corpus c = four_image_corpus();
  const auto s = mine_fpgrowth(c, 0.25);
  const json j = support_to_json(s, c.keyword_table());
  EXPECT_EQ(j["total"], 4);
  EXPECT_EQ(support_from_json(j, c), s);
}

}  // namespace
}  // namespace bginv
