#pragma once

// Test-collection artifacts: topics, qrels, normalized corpus documents and
// TREC run files.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace webprf::io {

// Orders topic ids numerically when both are all-digit, lexicographically
// otherwise. Numeric ids sort before non-numeric ones.
struct TopicIdLess {
  bool operator()(std::string_view a, std::string_view b) const;
  using is_transparent = void;
};

struct Topic {
  std::string id;
  std::string title;
  std::string description;
  std::optional<std::string> narrative;

  bool operator==(const Topic&) const = default;
};

enum class QueryFormulation { kTitleOnly, kTitleAndDescription };

// "t" / "td"
std::string_view query_code(QueryFormulation q);
QueryFormulation parse_query_code(std::string_view code);

std::string render_query(const Topic& topic, QueryFormulation q,
                         std::string_view delimiter = " ");

enum class TopicFormat { kTrecSgml, kJsonLines };

class TopicSet {
 public:
  TopicSet() = default;
  explicit TopicSet(std::vector<Topic> topics);  // validates

  const std::vector<Topic>& topics() const noexcept { return topics_; }
  std::size_t size() const noexcept { return topics_.size(); }
  bool empty() const noexcept { return topics_.empty(); }
  const Topic* find(std::string_view id) const;

  auto begin() const { return topics_.begin(); }
  auto end() const { return topics_.end(); }

 private:
  std::vector<Topic> topics_;
  std::unordered_map<std::string, std::size_t> index_;
};

TopicSet parse_topics(std::istream& in, TopicFormat format);
TopicSet parse_topics(std::string_view text, TopicFormat format);

struct Document {
  std::string doc_id;
  std::string body;
};

// Relevance judgments. Pairs that were never judged have grade 0.
class Qrels {
 public:
  void set(const std::string& topic_id, const std::string& doc_id, int grade);
  int grade(std::string_view topic_id, std::string_view doc_id) const;
  bool has_topic(std::string_view topic_id) const;

  // All judged grades of one topic (including zeros), unordered.
  std::vector<int> grades(std::string_view topic_id) const;
  std::size_t relevant_count(std::string_view topic_id, int min_grade = 1) const;
  std::vector<std::string> topic_ids() const;  // TopicIdLess order

  const std::map<std::string, std::map<std::string, int>, TopicIdLess>& judgments()
      const noexcept {
    return judgments_;
  }

  bool operator==(const Qrels&) const = default;

 private:
  std::map<std::string, std::map<std::string, int>, TopicIdLess> judgments_;
};

Qrels parse_qrels(std::istream& in);
Qrels parse_qrels(std::string_view text);
void write_qrels(const Qrels& qrels, std::ostream& out);

// Longest permitted ranking per topic.
inline constexpr std::size_t kMaxRunDepth = 10000;

struct RunEntry {
  std::string doc_id;
  std::uint32_t rank = 0;
  double score = 0.0;

  bool operator==(const RunEntry&) const = default;
};

struct Run {
  std::string tag;
  std::map<std::string, std::vector<RunEntry>, TopicIdLess> topics;

  // Ranked doc ids of one topic; empty when the topic is absent.
  std::vector<std::string> doc_ids(std::string_view topic_id) const;

  bool operator==(const Run&) const = default;
};

// Checks ranks 1..n, non-increasing scores, unique docs, the depth cap and
// a whitespace-free tag. Throws ValidationError naming the topic.
void validate_run(const Run& run);

Run parse_run(std::istream& in);
Run parse_run(std::string_view text);
void write_run(const Run& run, std::ostream& out);

// Shortest fixed-notation representation that parses back to the same
// double, padded to at least four decimals.
std::string format_score(double score);

// Streams documents from JSON lines ({"doc_id": ..., "body": ...}).
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in) : in_(in) {}

  // False at end of input.
  bool next(Document& doc);
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::unordered_set<std::string> seen_;
};

std::vector<Document> parse_corpus(std::istream& in);

}  // namespace webprf::io
