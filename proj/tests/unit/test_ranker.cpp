#include <gtest/gtest.h>

#include <random>

#include "core/error.hpp"
#include "core/ranker.hpp"

using namespace webprf;
using namespace webprf::ranker;
using classifier::RoutingModel;
using features::SparseVector;

namespace {

RoutingModel identity_model(const std::string& id) { return RoutingModel{id, {1.0}, 0.0, true, 1}; }

CorpusVectors corpus_of(const std::vector<std::pair<std::string, double>>& docs) {
  CorpusVectors c;
  c.dim = 1;
  for (const auto& [id, x] : docs) {
    c.doc_ids.push_back(id);
    c.vectors.push_back(SparseVector{{{0, x}}});
  }
  return c;
}

}  // namespace

TEST(Rank, OrderByProbability) {
  auto corpus = corpus_of({{"d1", -2.0}, {"d2", 2.0}, {"d3", 0.0}});
  RankerConfig cfg;
  io::Run run = rank_collection({identity_model("1")}, corpus, cfg);
  const auto& e = run.topics.at("1");
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].doc_id, "d2");
  EXPECT_EQ(e[1].doc_id, "d3");
  EXPECT_EQ(e[2].doc_id, "d1");
  EXPECT_EQ(e[0].rank, 1u);
  EXPECT_EQ(run.tag, "webprf");
}

TEST(Rank, TiesByDocId) {
  auto corpus = corpus_of({{"b", 1.0}, {"c", 1.0}, {"a", 1.0}});
  RankerConfig cfg;
  cfg.depth = 2;
  io::Run run = rank_collection({identity_model("1")}, corpus, cfg);
  const auto& e = run.topics.at("1");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].doc_id, "a");
  EXPECT_EQ(e[1].doc_id, "b");
}

TEST(Rank, DepthAndPrefix) {
  std::mt19937 rng(4);
  std::normal_distribution<double> n;
  std::vector<std::pair<std::string, double>> docs;
  for (int i = 0; i < 15000; ++i) docs.push_back({"D" + std::to_string(i), n(rng)});
  auto corpus = corpus_of(docs);
  RankerConfig full;
  full.threads = 2;
  io::Run big = rank_collection({identity_model("1"), identity_model("2")}, corpus, full);
  EXPECT_EQ(big.topics.at("1").size(), 10000u);
  RankerConfig small = full;
  small.depth = 100;
  io::Run top = rank_collection({identity_model("1")}, corpus, small);
  const auto& a = top.topics.at("1");
  const auto& b = big.topics.at("1");
  ASSERT_EQ(a.size(), 100u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_GE(b[i - 1].score, b[i].score);
}

TEST(Rank, DimensionMismatch) {
  auto corpus = corpus_of({{"a", 1.0}});
  RoutingModel m{"1", {1.0, 2.0}, 0.0, true, 1};
  EXPECT_THROW(rank_collection({m}, corpus, RankerConfig{}), ValidationError);
}

TEST(Rank, ConfigValidation) {
  RankerConfig c;
  c.depth = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.depth = io::kMaxRunDepth + 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c.depth = 10;
  c.run_tag = "a b";
  EXPECT_THROW(c.validate(), ConfigError);
}
