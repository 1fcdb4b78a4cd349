#include "synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace webprf::testing {

namespace {

const std::vector<std::string> kNoise = {"report", "today",  "people", "city",  "market",
                                         "update", "world",  "video",  "local", "story",
                                         "official", "week", "season", "plan",  "group"};

std::size_t pick(std::mt19937& rng, std::size_t n) { return rng() % n; }

std::string words_of_topic(std::mt19937& rng, int topic, int words_per_topic, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += topic_word(topic, static_cast<int>(pick(rng, static_cast<std::size_t>(words_per_topic))));
  }
  return out;
}

std::string noise(std::mt19937& rng, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += kNoise[pick(rng, kNoise.size())];
  }
  return out;
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

}  // namespace

std::string topic_word(int topic, int j) {
  std::string w = "x";
  w += static_cast<char>('a' + topic);
  w += static_cast<char>('a' + j % 26);
  if (j >= 26) w += static_cast<char>('a' + j / 26);
  w += "qz";
  return w;
}

SyntheticPaths write_synthetic(const fs::path& dir, const SyntheticSpec& spec) {
  fs::create_directories(dir);
  std::mt19937 rng(spec.seed);
  SyntheticPaths paths;
  paths.dir = dir;
  paths.topics = dir / "topics.jsonl";
  paths.archive = dir / ("serp_google_" + spec.date + ".jsonl");
  paths.corpus = dir / "corpus.jsonl";
  paths.qrels = dir / "qrels.txt";

  std::ostringstream topics, archive;
  for (int t = 0; t < spec.topics; ++t) {
    std::string id = std::to_string(401 + t);
    paths.topic_ids.push_back(id);
    std::string title = topic_word(t, 0) + " " + topic_word(t, 1);
    nlohmann::ordered_json topic = {{"id", id},
                                    {"title", title},
                                    {"description", "documents about " + topic_word(t, 2)},
                                    {"narrative", "any mention of " + topic_word(t, 3)}};
    topics << topic.dump() << '\n';

    nlohmann::ordered_json rec = {{"engine", "google"},
                                  {"topic_id", id},
                                  {"query", title},
                                  {"fetched_at", spec.date + "T12:00:00Z"},
                                  {"results", nlohmann::ordered_json::array()}};
    for (int i = 0; i < spec.texts_per_topic; ++i) {
      std::string rtitle = words_of_topic(rng, t, spec.words_per_topic, 3);
      std::string snippet = words_of_topic(rng, t, spec.words_per_topic, 8) + " " + noise(rng, 3);
      std::string page = "<html><head><title>" + rtitle + "</title><script>var q = 1;</script></head>"
                         "<body><h1>" + rtitle + "</h1><p>" + snippet + "</p><div>" + snippet +
                         " " + rtitle + "</div></body></html>";
      rec["results"].push_back({{"rank", i + 1},
                                {"url", "https://example.org/" + id + "/" + std::to_string(i)},
                                {"title", rtitle},
                                {"snippet", snippet},
                                {"page_text", page}});
    }
    archive << rec.dump() << '\n';
  }
  write(paths.topics, topics.str());
  write(paths.archive, archive.str());

  // Relevant documents first in generation order, then shuffled ids.
  struct Doc {
    std::string body;
    int topic;
  };
  std::vector<Doc> docs;
  for (int t = 0; t < spec.topics; ++t)
    for (int i = 0; i < spec.relevant_per_topic; ++i)
      docs.push_back({words_of_topic(rng, t, spec.words_per_topic, 12) + " " + noise(rng, 6), t});
  while (static_cast<int>(docs.size()) < spec.corpus_size)
    docs.push_back({noise(rng, 18) + " unrelated filler", -1});
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[pick(rng, i)]);

  std::ostringstream corpus, qrels;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Doc& d = docs[order[k]];
    char id[32];
    std::snprintf(id, sizeof(id), "D%04zu", k + 1);
    corpus << nlohmann::ordered_json{{"doc_id", id}, {"body", d.body}}.dump() << '\n';
    for (int t = 0; t < spec.topics; ++t) {
      if (d.topic == t) qrels << paths.topic_ids[t] << " 0 " << id << " 1\n";
      else if (d.topic == -1 && k % 7 == static_cast<std::size_t>(t)) qrels << paths.topic_ids[t] << " 0 " << id << " 0\n";
    }
  }
  write(paths.corpus, corpus.str());
  write(paths.qrels, qrels.str());
  return paths;
}

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("webprf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace webprf::testing
