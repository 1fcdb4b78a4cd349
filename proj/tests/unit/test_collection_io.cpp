#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "core/collection_io.hpp"
#include "core/error.hpp"

using namespace webprf;
using namespace webprf::io;

TEST(Topics, SgmlBlock) {
  const char* text =
      "<top>\n<num> Number: 341 \n<title>  airport security\n"
      "<desc> Description:\nA relevant document   would discuss\nscreening.\n"
      "<narr> Narrative:\nAnything goes.\n</top>\n";
  TopicSet set = parse_topics(std::string_view(text), TopicFormat::kTrecSgml);
  ASSERT_EQ(set.size(), 1u);
  const Topic& t = set.topics()[0];
  EXPECT_EQ(t.id, "341");
  EXPECT_EQ(t.title, "airport security");
  EXPECT_EQ(t.description, "A relevant document would discuss screening.");
  ASSERT_TRUE(t.narrative.has_value());
  EXPECT_EQ(*t.narrative, "Anything goes.");
}

TEST(Topics, EmptyInput) {
  EXPECT_TRUE(parse_topics(std::string_view(""), TopicFormat::kTrecSgml).empty());
  EXPECT_TRUE(parse_topics(std::string_view(""), TopicFormat::kJsonLines).empty());
}

TEST(Topics, MissingTitleIsParseError) {
  const char* text = "<top><num> 1 <desc> d </top>";
  EXPECT_THROW(parse_topics(std::string_view(text), TopicFormat::kTrecSgml), ParseError);
}

TEST(Topics, ErrorNamesOffsetAndCount) {
  const char* text = "<top><num>1<title>a</top>\n<top><num>2<desc>x</top>";
  try {
    parse_topics(std::string_view(text), TopicFormat::kTrecSgml);
    FAIL();
  } catch (const ParseError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("byte"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1 topic"), std::string::npos) << msg;
  }
}

TEST(Topics, DuplicateIdRejected) {
  const char* text = "{\"id\":\"1\",\"title\":\"a\"}\n{\"id\":1,\"title\":\"b\"}\n";
  EXPECT_THROW(parse_topics(std::string_view(text), TopicFormat::kJsonLines), Error);
}

TEST(Topics, JsonLines) {
  const char* text =
      "{\"id\":\"7\",\"title\":\" a \",\"description\":\"b c\"}\n\n{\"id\":8,\"title\":\"x\",\"narrative\":\"n\"}\n";
  TopicSet set = parse_topics(std::string_view(text), TopicFormat::kJsonLines);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.topics()[0].title, "a");
  EXPECT_EQ(set.topics()[1].id, "8");
  EXPECT_NE(set.find("8"), nullptr);
  EXPECT_EQ(set.find("9"), nullptr);
}

TEST(Topics, QueryRendering) {
  Topic t{"1", "a", "b c", std::nullopt};
  EXPECT_EQ(render_query(t, QueryFormulation::kTitleOnly), "a");
  EXPECT_EQ(render_query(t, QueryFormulation::kTitleAndDescription), "a b c");
  EXPECT_EQ(render_query(t, QueryFormulation::kTitleAndDescription, " | "), "a | b c");
  EXPECT_EQ(parse_query_code("td"), QueryFormulation::kTitleAndDescription);
  EXPECT_EQ(query_code(QueryFormulation::kTitleOnly), "t");
}

TEST(Qrels, ParseAndOverride) {
  Qrels q = parse_qrels(std::string_view("341 0 d1 1\n341 0 d1 0\n341 0 d2 2\n"));
  EXPECT_EQ(q.grade("341", "d1"), 0);
  EXPECT_EQ(q.grade("341", "d2"), 2);
  EXPECT_EQ(q.grade("341", "unknown"), 0);
  EXPECT_EQ(q.relevant_count("341"), 1u);
}

TEST(Qrels, ErrorsCarryLineNumbers) {
  try {
    parse_qrels(std::string_view("341 0 d1 x"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  EXPECT_THROW(parse_qrels(std::string_view("341 0 d1 1\n341 0 d1")), ParseError);
}

TEST(Qrels, RoundTrip) {
  Qrels q = parse_qrels(std::string_view("2 0 b 1\n10 0 a 0\n2 0 a 3\n"));
  std::ostringstream out;
  write_qrels(q, out);
  EXPECT_EQ(parse_qrels(out.str()), q);
}

TEST(Run, WriteLineFormat) {
  io::Run run;
  run.tag = "webprf";
  run.topics["341"] = {{"doc17", 1, 0.9731}};
  std::ostringstream out;
  write_run(run, out);
  EXPECT_EQ(out.str(), "341 Q0 doc17 1 0.9731 webprf\n");
}

TEST(Run, ScoreFormatting) {
  EXPECT_EQ(format_score(0.5), "0.5000");
  EXPECT_EQ(format_score(1.0), "1.0000");
  EXPECT_EQ(format_score(0.123456789), "0.123456789");
  EXPECT_EQ(std::stod(format_score(1e-20)), 1e-20);
}

TEST(Run, TopicsInAscendingIdOrder) {
  io::Run run;
  run.tag = "t";
  run.topics["10"] = {{"a", 1, 1.0}};
  run.topics["9"] = {{"b", 1, 1.0}};
  std::ostringstream out;
  write_run(run, out);
  EXPECT_EQ(out.str().substr(0, 2), "9 ");
}

TEST(Run, ParseErrors) {
  EXPECT_THROW(parse_run(std::string_view("1 Q0 d 1 0.5\n")), ParseError);
  EXPECT_THROW(parse_run(std::string_view("1 Q0 d 1 0.5 t\n1 Q0 e 3 0.4 t\n")), ValidationError);
  EXPECT_THROW(parse_run(std::string_view("1 Q0 d 1 0.5 t\n1 Q0 d 2 0.4 t\n")), ValidationError);
}

TEST(Run, WriteRejectsIncreasingScores) {
  io::Run run;
  run.tag = "t";
  run.topics["1"] = {{"a", 1, 0.1}, {"b", 2, 0.9}};
  std::ostringstream out;
  EXPECT_THROW(write_run(run, out), ValidationError);
}

TEST(Run, DepthCap) {
  io::Run run;
  run.tag = "t";
  auto& e = run.topics["1"];
  for (std::uint32_t i = 1; i <= kMaxRunDepth + 1; ++i) e.push_back({"d" + std::to_string(i), i, 1.0});
  EXPECT_THROW(validate_run(run), ValidationError);
}

TEST(Run, RandomRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    io::Run run;
    run.tag = "tag";
    for (int t = 0; t < 3; ++t) {
      auto& e = run.topics[std::to_string(t * 17 + 1)];
      double s = u(rng) * 10;
      for (std::uint32_t r = 1; r <= 20; ++r) {
        e.push_back({"d" + std::to_string(r), r, s});
        s *= u(rng);
      }
    }
    std::ostringstream out;
    write_run(run, out);
    EXPECT_EQ(parse_run(out.str()), run);
  }
}

TEST(Corpus, Streaming) {
  std::istringstream in("{\"doc_id\":\"a\",\"body\":\"x\"}\n{\"doc_id\":\"b\",\"body\":\"\"}\n");
  auto docs = parse_corpus(in);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[1].body, "");
}

TEST(Corpus, DuplicateAndBadJson) {
  std::istringstream dup("{\"doc_id\":\"a\",\"body\":\"x\"}\n{\"doc_id\":\"a\",\"body\":\"y\"}\n");
  EXPECT_THROW(parse_corpus(dup), Error);
  std::istringstream bad("{\"doc_id\":\"a\",\"body\":\"x\"}\n{oops\n");
  try {
    parse_corpus(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(TopicIds, NumericOrder) {
  TopicIdLess less;
  EXPECT_TRUE(less("9", "10"));
  EXPECT_FALSE(less("10", "9"));
  EXPECT_TRUE(less("10", "a"));
  EXPECT_TRUE(less("a", "b"));
}
