#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/metrics.hpp"

using namespace webprf;
using namespace webprf::metrics;

namespace {

io::Run make_run(const std::map<std::string, std::vector<std::string>>& lists, const std::string& tag = "r") {
  io::Run run;
  run.tag = tag;
  for (const auto& [t, docs] : lists) {
    auto& e = run.topics[t];
    for (std::size_t i = 0; i < docs.size(); ++i)
      e.push_back({docs[i], static_cast<std::uint32_t>(i + 1), 1.0 - 0.01 * static_cast<double>(i)});
  }
  return run;
}

TopicScores scores(std::initializer_list<std::pair<const char*, double>> v) {
  TopicScores s;
  for (const auto& [t, x] : v) s.scores[t] = x;
  return s;
}

using L = std::vector<std::string>;

}  // namespace

TEST(Ndcg, HandExample) {
  io::Qrels q = io::parse_qrels(std::string_view("1 0 a 1\n1 0 c 1\n1 0 b 0\n"));
  io::Run run = make_run({{"1", {"a", "b", "c"}}});
  auto s = ndcg(run, q, 10);
  EXPECT_NEAR(s.scores.at("1"), 1.5 / (1.0 + 1.0 / std::log2(3.0)), 1e-12);
  EXPECT_NEAR(s.scores.at("1"), 0.9198, 1e-4);
}

TEST(Ndcg, IdealAndEmpty) {
  io::Qrels q = io::parse_qrels(std::string_view("1 0 a 2\n1 0 b 1\n2 0 x 0\n"));
  EXPECT_DOUBLE_EQ(ndcg(make_run({{"1", {"a", "b", "z"}}}), q, 10).scores.at("1"), 1.0);
  EXPECT_DOUBLE_EQ(ndcg(make_run({{"1", {"z", "y"}}}), q, 10).scores.at("1"), 0.0);
  auto s = ndcg(make_run({{"2", {"x"}}, {"3", {"x"}}}), q, 10);
  EXPECT_EQ(s.size(), 0u);
  EXPECT_EQ(s.skipped.size(), 2u);
  EXPECT_THROW(ndcg(make_run({{"1", {"a"}}}), q, 0), ConfigError);
}

TEST(Ap, HandExampleAndPrecision) {
  io::Qrels q = io::parse_qrels(std::string_view("1 0 a 1\n1 0 c 2\n"));
  io::Run run = make_run({{"1", {"a", "b", "c"}}});
  EXPECT_NEAR(average_precision(run, q).scores.at("1"), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(precision_at_k(run, q, 10).scores.at("1"), 0.2);
  io::Run empty;
  empty.tag = "e";
  empty.topics["1"] = {};
  EXPECT_DOUBLE_EQ(average_precision(empty, q).scores.at("1"), 0.0);
  EXPECT_THROW(precision_at_k(run, q, 0), ConfigError);
}

TEST(Rbo, Examples) {
  EXPECT_NEAR(rbo(L{"a", "b"}, L{"b", "a"}, 0.9, 1000), 0.90, 1e-9);
  EXPECT_NEAR(rbo(L{"a", "b", "c"}, L{"a", "b", "c"}, 0.3, 1000), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(rbo(L{"a", "b"}, L{"c", "d"}, 0.8, 10), 0.0);
  EXPECT_DOUBLE_EQ(rbo(L{}, L{}, 0.8, 10), 1.0);
  EXPECT_DOUBLE_EQ(rbo(L{"a"}, L{}, 0.8, 10), 0.0);
  EXPECT_THROW(rbo(L{"a"}, L{"a"}, 1.0, 10), ConfigError);
  EXPECT_THROW(rbo(L{"a", "a"}, L{"a"}, 0.5, 10), ValidationError);
}

TEST(Rbo, SymmetricForEqualLengths) {
  std::mt19937 rng(8);
  for (int i = 0; i < 100; ++i) {
    L a, b;
    for (int k = 0; k < 8; ++k) a.push_back(std::to_string(k)), b.push_back(std::to_string(k + 3));
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    EXPECT_NEAR(rbo(a, b, 0.8, 8), rbo(b, a, 0.8, 8), 1e-15);
    double r = rbo(a, b, 0.8, 8);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Ktu, Examples) {
  EXPECT_DOUBLE_EQ(ktu(L{"a", "b", "c"}, L{"a", "b", "c"}, 10).value(), 1.0);
  EXPECT_DOUBLE_EQ(ktu(L{"a", "b", "c"}, L{"c", "b", "a"}, 10).value(), -1.0);
  EXPECT_NEAR(ktu(L{"a", "b", "c"}, L{"a", "c", "b"}, 10).value(), 1.0 / 3.0, 1e-15);
  EXPECT_FALSE(ktu(L{}, L{}, 10).has_value());
}

TEST(Ktu, MissingDocumentsRankedAfter) {
  // a: [a,b], b: [b,c]. Ranks over {a,b,c}: A = (1,2,3), B = (3,1,2).
  std::vector<double> x = {1, 2, 3}, y = {3, 1, 2};
  EXPECT_DOUBLE_EQ(ktu(L{"a", "b"}, L{"b", "c"}, 10).value(), kendall_tau_b(x, y).value());
  EXPECT_DOUBLE_EQ(ktu(L{"a", "b", "x"}, L{"b", "a", "y"}, 2).value(), -1.0);
}

TEST(TauB, Ties) {
  std::vector<double> x = {1, 1, 2, 3}, y = {1, 2, 2, 3};
  // concordant 4, discordant 0, ties x 1, ties y 1.
  EXPECT_NEAR(kendall_tau_b(x, y).value(), 4.0 / std::sqrt(5.0 * 5.0), 1e-15);
  std::vector<double> c = {2, 2, 2};
  EXPECT_FALSE(kendall_tau_b(c, std::vector<double>{1, 2, 3}).has_value());
}

TEST(Rmse, Examples) {
  auto a = scores({{"1", 0.5}, {"2", 0.7}}), b = scores({{"1", 0.4}, {"2", 0.9}, {"3", 0.1}});
  EXPECT_NEAR(rmse(a, b), std::sqrt(0.05 / 2.0), 1e-12);
  EXPECT_NEAR(rmse(a, b), 0.1581, 1e-4);
  EXPECT_DOUBLE_EQ(rmse(a, b), rmse(b, a));
  EXPECT_DOUBLE_EQ(rmse(a, a), 0.0);
  EXPECT_THROW(rmse(a, scores({{"9", 1.0}})), ValidationError);
}

TEST(EffectRatio, DeltasAndTableMeans) {
  auto ob = scores({{"1", 0.2}, {"2", 0.4}}), oa = scores({{"1", 0.3}, {"2", 0.6}});
  EXPECT_NEAR(effect_ratio(ob, oa, ob, oa).value(), 1.0, 1e-12);
  auto rb = scores({{"1", 0.2}, {"2", 0.5}}), ra = scores({{"1", 0.25}, {"2", 0.55}});
  EXPECT_NEAR(effect_ratio(ob, oa, rb, ra).value(), 0.05 / 0.15, 1e-12);
  EXPECT_NEAR(effect_ratio(ob, oa, rb, ra).value(),
              effect_ratio_from_means(ob.mean(), oa.mean(), rb.mean(), ra.mean()).value(), 1e-12);
  EXPECT_FALSE(effect_ratio(ob, ob, rb, ra).has_value());
  EXPECT_NEAR(effect_ratio_from_means(0.5306, 0.5822, 0.5325, 0.5713).value(), 0.7538, 0.01);
  EXPECT_NEAR(effect_ratio_from_means(0.5306, 0.5822, 0.5735, 0.5633).value(), -0.1985, 0.01);
}

TEST(Dri, TableMeans) {
  EXPECT_DOUBLE_EQ(delta_relative_improvement(0.4, 0.5, 0.4, 0.5), 0.0);
  EXPECT_NEAR(delta_relative_improvement(0.5306, 0.5822, 0.5325, 0.5713), 0.0242, 1e-3);
  EXPECT_NEAR(delta_relative_improvement(0.5306, 0.5822, 0.5735, 0.5633), 0.1150, 1e-3);
  EXPECT_THROW(delta_relative_improvement(0.0, 0.5, 0.4, 0.5), ValidationError);
}

TEST(Invariance, DocumentRelabeling) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    L docs;
    for (int i = 0; i < 12; ++i) docs.push_back("d" + std::to_string(i));
    std::shuffle(docs.begin(), docs.end(), rng);
    std::string qtext, qtext2;
    for (int i = 0; i < 12; ++i) {
      int g = static_cast<int>(rng() % 3);
      qtext += "1 0 d" + std::to_string(i) + " " + std::to_string(g) + "\n";
      qtext2 += "1 0 z" + std::to_string(i) + "x " + std::to_string(g) + "\n";
    }
    L relabeled;
    for (const auto& d : docs) relabeled.push_back("z" + d.substr(1) + "x");
    io::Qrels q1 = io::parse_qrels(qtext), q2 = io::parse_qrels(qtext2);
    io::Run r1 = make_run({{"1", docs}}), r2 = make_run({{"1", relabeled}});
    auto n1 = ndcg(r1, q1, 10), n2 = ndcg(r2, q2, 10);
    EXPECT_EQ(n1.scores, n2.scores);
    EXPECT_EQ(average_precision(r1, q1).scores, average_precision(r2, q2).scores);
    EXPECT_EQ(precision_at_k(r1, q1, 5).scores, precision_at_k(r2, q2, 5).scores);
  }
}

TEST(Reports, EvaluateCsv) {
  io::Qrels q = io::parse_qrels(std::string_view("1 0 a 1\n2 0 b 1\n"));
  io::Run run = make_run({{"1", {"a", "b"}}, {"2", {"a", "b"}}});
  MetricConfig cfg;
  auto rows = evaluate(run, q, cfg);
  std::ostringstream out;
  write_evaluation_csv(rows, out);
  std::string csv = out.str();
  EXPECT_EQ(csv.rfind("measure,cutoff,topic,value\n", 0), 0u);
  EXPECT_NE(csv.find("ndcg,1000,MEAN,"), std::string::npos);
  EXPECT_NE(csv.find("map,,MEAN,0.75"), std::string::npos);
  EXPECT_NE(csv.find("p,10,MEAN,0.1"), std::string::npos);
}

TEST(Reports, SelfComparison) {
  io::Qrels q = io::parse_qrels(std::string_view("1 0 a 1\n2 0 b 1\n3 0 c 2\n"));
  io::Run run = make_run({{"1", {"a", "b", "c"}}, {"2", {"c", "b", "a"}}, {"3", {"b", "c", "a"}}});
  MetricConfig cfg;
  auto pair = compare_rankings(run, run, q, cfg);
  for (auto d : cfg.ktu_depths) EXPECT_DOUBLE_EQ(pair.ktu.at(d), 1.0);
  for (auto d : cfg.rbo_depths) EXPECT_NEAR(pair.rbo.at(d), 1.0, 1e-12);
  for (auto d : cfg.rmse_depths) EXPECT_DOUBLE_EQ(pair.rmse.at(d), 0.0);
  auto rows = compare(run, run, q, cfg, {&run, &run});
  std::ostringstream out;
  write_comparison_csv(rows, out);
  std::string csv = out.str();
  EXPECT_NE(csv.find("r|r,ktu@10,1,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("r|r,paired_ttest_ndcg@1000,"), std::string::npos);
  EXPECT_NE(csv.find("r|r,er_ndcg@1000,NA,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("r|r,dri_ndcg@1000,0,"), std::string::npos) << csv;
}
