#include "core/collection_io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "core/error.hpp"
#include "core/strings.hpp"
#include "json.hpp"

namespace webprf::io {

using detail::squeeze_spaces;
using detail::trim;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string strip_label(std::string_view value, std::string_view label) {
  value = trim(value);
  if (detail::starts_with_icase(value, label)) value.remove_prefix(label.size());
  return squeeze_spaces(value);
}

// Finds the next "<tag>" (case-insensitive, attributes not supported) at or
// after pos. Returns npos when absent.
std::size_t find_tag(std::string_view text, std::string_view tag, std::size_t pos) {
  while (true) {
    pos = text.find('<', pos);
    if (pos == std::string_view::npos) return pos;
    std::string_view rest = text.substr(pos + 1);
    if (detail::starts_with_icase(rest, tag) && rest.size() > tag.size() &&
        rest[tag.size()] == '>')
      return pos;
    ++pos;
  }
}

// Text of a topic field: from the end of its opening tag to the next '<'.
std::optional<std::string> field(std::string_view block, std::string_view tag) {
  std::size_t open = find_tag(block, tag, 0);
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t start = open + tag.size() + 2;
  std::size_t stop = block.find('<', start);
  if (stop == std::string_view::npos) stop = block.size();
  return std::string(block.substr(start, stop - start));
}

TopicSet parse_sgml_topics(std::string_view text) {
  std::vector<Topic> topics;
  std::size_t pos = 0;
  auto fail = [&](std::size_t offset, const std::string& msg) -> ParseError {
    return ParseError("topic block at byte " + std::to_string(offset) + ": " + msg +
                      " (" + std::to_string(topics.size()) + " topics parsed)");
  };
  while (true) {
    std::size_t open = find_tag(text, "top", pos);
    if (open == std::string_view::npos) break;
    std::size_t close = find_tag(text, "/top", open + 5);
    if (close == std::string_view::npos) throw fail(open, "missing </top>");
    std::size_t next_open = find_tag(text, "top", open + 5);
    if (next_open != std::string_view::npos && next_open < close)
      throw fail(open, "nested <top> before </top>");
    std::string_view block = text.substr(open + 5, close - open - 5);

    auto num = field(block, "num");
    auto title = field(block, "title");
    if (!num) throw fail(open, "missing <num>");
    if (!title) throw fail(open, "missing <title>");
    Topic t;
    t.id = strip_label(*num, "Number:");
    t.title = squeeze_spaces(*title);
    if (auto desc = field(block, "desc")) t.description = strip_label(*desc, "Description:");
    if (auto narr = field(block, "narr")) t.narrative = strip_label(*narr, "Narrative:");
    if (t.id.empty()) throw fail(open, "empty <num>");
    if (t.title.empty()) throw fail(open, "empty <title>");
    topics.push_back(std::move(t));
    pos = close + 6;
  }
  return TopicSet(std::move(topics));
}

TopicSet parse_jsonl_topics(std::istream& in) {
  std::vector<Topic> topics;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(lineno, "expected a JSON object");
    auto text_field = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        if (required) throw ParseError(lineno, std::string("missing key '") + key + "'");
        return std::nullopt;
      }
      if (it->is_number_integer() && std::string_view(key) == "id")
        return std::to_string(it->get<long long>());
      if (!it->is_string())
        throw ParseError(lineno, std::string("key '") + key + "' must be a string");
      return squeeze_spaces(it->get<std::string>());
    };
    Topic t;
    t.id = *text_field("id", true);
    t.title = *text_field("title", true);
    t.description = text_field("description", false).value_or("");
    t.narrative = text_field("narrative", false);
    if (t.id.empty()) throw ParseError(lineno, "empty topic id");
    if (t.title.empty()) throw ParseError(lineno, "empty topic title");
    topics.push_back(std::move(t));
  }
  return TopicSet(std::move(topics));
}

}  // namespace

bool TopicIdLess::operator()(std::string_view a, std::string_view b) const {
  bool da = all_digits(a);
  bool db = all_digits(b);
  if (da && db) {
    std::string_view ta = a.substr(std::min(a.find_first_not_of('0'), a.size()));
    std::string_view tb = b.substr(std::min(b.find_first_not_of('0'), b.size()));
    if (ta.size() != tb.size()) return ta.size() < tb.size();
    if (ta != tb) return ta < tb;
    return a < b;  // "007" vs "7"
  }
  if (da != db) return da;
  return a < b;
}

std::string_view query_code(QueryFormulation q) {
  return q == QueryFormulation::kTitleOnly ? "t" : "td";
}

QueryFormulation parse_query_code(std::string_view code) {
  if (code == "t") return QueryFormulation::kTitleOnly;
  if (code == "td") return QueryFormulation::kTitleAndDescription;
  throw ConfigError("unknown query formulation '" + std::string(code) + "' (expected t or td)");
}

std::string render_query(const Topic& topic, QueryFormulation q, std::string_view delimiter) {
  if (q == QueryFormulation::kTitleOnly || topic.description.empty()) return topic.title;
  std::string out = topic.title;
  out += delimiter;
  out += topic.description;
  return out;
}

TopicSet::TopicSet(std::vector<Topic> topics) : topics_(std::move(topics)) {
  for (std::size_t i = 0; i < topics_.size(); ++i) {
    const Topic& t = topics_[i];
    if (t.id.empty()) throw ValidationError("topic with empty id");
    if (t.title.empty()) throw ValidationError("topic " + t.id + " has an empty title");
    if (!index_.emplace(t.id, i).second) throw ValidationError("duplicate topic id " + t.id);
  }
}

const Topic* TopicSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &topics_[it->second];
}

TopicSet parse_topics(std::istream& in, TopicFormat format) {
  if (format == TopicFormat::kJsonLines) return parse_jsonl_topics(in);
  return parse_sgml_topics(read_all(in));
}

TopicSet parse_topics(std::string_view text, TopicFormat format) {
  if (format == TopicFormat::kTrecSgml) return parse_sgml_topics(text);
  std::istringstream in{std::string(text)};
  return parse_jsonl_topics(in);
}

// ---------------------------------------------------------------- qrels

void Qrels::set(const std::string& topic_id, const std::string& doc_id, int grade) {
  judgments_[topic_id][doc_id] = grade;
}

int Qrels::grade(std::string_view topic_id, std::string_view doc_id) const {
  auto t = judgments_.find(topic_id);
  if (t == judgments_.end()) return 0;
  auto d = t->second.find(std::string(doc_id));
  return d == t->second.end() ? 0 : d->second;
}

bool Qrels::has_topic(std::string_view topic_id) const {
  return judgments_.find(topic_id) != judgments_.end();
}

std::vector<int> Qrels::grades(std::string_view topic_id) const {
  std::vector<int> out;
  auto t = judgments_.find(topic_id);
  if (t == judgments_.end()) return out;
  out.reserve(t->second.size());
  for (const auto& [doc, g] : t->second) out.push_back(g);
  return out;
}

std::size_t Qrels::relevant_count(std::string_view topic_id, int min_grade) const {
  auto t = judgments_.find(topic_id);
  if (t == judgments_.end()) return 0;
  return static_cast<std::size_t>(std::count_if(
      t->second.begin(), t->second.end(),
      [&](const auto& kv) { return kv.second >= min_grade; }));
}

std::vector<std::string> Qrels::topic_ids() const {
  std::vector<std::string> ids;
  ids.reserve(judgments_.size());
  for (const auto& [id, docs] : judgments_) ids.push_back(id);
  return ids;
}

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 4)
      throw ParseError(lineno, "expected 4 fields 'topic 0 doc grade', got " +
                                   std::to_string(fields.size()));
    auto grade = detail::parse_number<int>(fields[3]);
    if (!grade) throw ParseError(lineno, "grade '" + std::string(fields[3]) + "' is not an integer");
    if (*grade < 0) throw ParseError(lineno, "negative grade");
    qrels.set(std::string(fields[0]), std::string(fields[2]), *grade);
  }
  return qrels;
}

Qrels parse_qrels(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_qrels(in);
}

void write_qrels(const Qrels& qrels, std::ostream& out) {
  for (const auto& [topic, docs] : qrels.judgments())
    for (const auto& [doc, grade] : docs) out << topic << " 0 " << doc << ' ' << grade << '\n';
}

// ---------------------------------------------------------------- runs

std::vector<std::string> Run::doc_ids(std::string_view topic_id) const {
  std::vector<std::string> ids;
  auto it = topics.find(topic_id);
  if (it == topics.end()) return ids;
  ids.reserve(it->second.size());
  for (const auto& e : it->second) ids.push_back(e.doc_id);
  return ids;
}

namespace {

void validate_ranking(const std::string& topic, const std::vector<RunEntry>& entries,
                      bool check_scores) {
  if (entries.size() > kMaxRunDepth)
    throw ValidationError("topic " + topic + ": " + std::to_string(entries.size()) +
                          " entries exceed the depth cap of " + std::to_string(kMaxRunDepth));
  std::unordered_set<std::string_view> seen;
  seen.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const RunEntry& e = entries[i];
    if (e.rank != i + 1)
      throw ValidationError("topic " + topic + ": expected rank " + std::to_string(i + 1) +
                            ", found " + std::to_string(e.rank));
    if (e.doc_id.empty() || std::any_of(e.doc_id.begin(), e.doc_id.end(), detail::is_space))
      throw ValidationError("topic " + topic + ": invalid doc id at rank " +
                            std::to_string(e.rank));
    if (!seen.insert(e.doc_id).second)
      throw ValidationError("topic " + topic + ": duplicate doc " + e.doc_id);
    if (check_scores && i > 0 && e.score > entries[i - 1].score)
      throw ValidationError("topic " + topic + ": score increases at rank " +
                            std::to_string(e.rank));
  }
}

}  // namespace

void validate_run(const Run& run) {
  if (run.tag.empty() || std::any_of(run.tag.begin(), run.tag.end(), detail::is_space))
    throw ValidationError("run tag must be non-empty and contain no whitespace");
  for (const auto& [topic, entries] : run.topics) {
    if (topic.empty() || std::any_of(topic.begin(), topic.end(), detail::is_space))
      throw ValidationError("invalid topic id '" + topic + "'");
    validate_ranking(topic, entries, true);
  }
}

std::string format_score(double score) {
  char buf[512];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), score, std::chars_format::fixed);
  if (ec != std::errc()) throw ValidationError("score not representable");
  std::string s(buf, ptr);
  std::size_t dot = s.find('.');
  std::size_t decimals = 0;
  if (dot == std::string::npos) {
    s += '.';
  } else {
    decimals = s.size() - dot - 1;
  }
  if (decimals < 4) s.append(4 - decimals, '0');
  return s;
}

Run parse_run(std::istream& in) {
  Run run;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = detail::split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 6)
      throw ParseError(lineno, "expected 6 fields 'qid Q0 docno rank score tag', got " +
                                   std::to_string(f.size()));
    auto rank = detail::parse_number<std::uint32_t>(f[3]);
    if (!rank || *rank == 0) throw ParseError(lineno, "rank must be a positive integer");
    auto score = detail::parse_number<double>(f[4]);
    if (!score) throw ParseError(lineno, "score '" + std::string(f[4]) + "' is not a number");
    if (run.tag.empty()) run.tag = std::string(f[5]);
    run.topics[std::string(f[0])].push_back(RunEntry{std::string(f[2]), *rank, *score});
  }
  for (auto& [topic, entries] : run.topics) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    validate_ranking(topic, entries, false);
  }
  return run;
}

Run parse_run(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_run(in);
}

void write_run(const Run& run, std::ostream& out) {
  validate_run(run);
  std::string buffer;
  for (const auto& [topic, entries] : run.topics) {
    for (const auto& e : entries) {
      buffer.clear();
      buffer += topic;
      buffer += " Q0 ";
      buffer += e.doc_id;
      buffer += ' ';
      buffer += std::to_string(e.rank);
      buffer += ' ';
      buffer += format_score(e.score);
      buffer += ' ';
      buffer += run.tag;
      buffer += '\n';
      out << buffer;
    }
  }
  if (!out) throw IoError("failed writing run");
}

// ---------------------------------------------------------------- corpus

bool CorpusReader::next(Document& doc) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_, std::string("bad JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_, "expected a JSON object");
    auto id = obj.find("doc_id");
    if (id == obj.end() || !id->is_string() || id->get_ref<const std::string&>().empty())
      throw ParseError(line_, "missing or empty string key 'doc_id'");
    auto body = obj.find("body");
    if (body != obj.end() && !body->is_null() && !body->is_string())
      throw ParseError(line_, "key 'body' must be a string");
    doc.doc_id = id->get<std::string>();
    if (std::any_of(doc.doc_id.begin(), doc.doc_id.end(), detail::is_space))
      throw ParseError(line_, "doc_id contains whitespace");
    doc.body = (body == obj.end() || body->is_null()) ? std::string() : body->get<std::string>();
    if (!seen_.insert(doc.doc_id).second)
      throw ParseError(line_, "duplicate doc_id " + doc.doc_id);
    return true;
  }
  return false;
}

std::vector<Document> parse_corpus(std::istream& in) {
  CorpusReader reader(in);
  std::vector<Document> docs;
  Document d;
  while (reader.next(d)) docs.push_back(std::move(d));
  return docs;
}

}  // namespace webprf::io
