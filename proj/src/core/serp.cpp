#include "core/serp.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include "core/html_text.hpp"
#include "core/strings.hpp"
#include "json.hpp"

namespace webprf::serp {

std::string_view engine_name(Engine e) {
  return e == Engine::kGoogle ? "google" : "duckduckgo";
}

char engine_initial(Engine e) { return e == Engine::kGoogle ? 'g' : 'd'; }

Engine parse_engine(std::string_view name) {
  std::string n = detail::to_lower_ascii(name);
  if (n == "google" || n == "g") return Engine::kGoogle;
  if (n == "duckduckgo" || n == "ddg" || n == "d") return Engine::kDuckDuckGo;
  throw ConfigError("unknown engine '" + std::string(name) + "' (expected google or duckduckgo)");
}

std::string_view mode_name(TextMode m) {
  return m == TextMode::kSnippetOnly ? "snippet" : "fullpage";
}

std::string_view run_prefix(TextMode m) {
  return m == TextMode::kSnippetOnly ? "uwmrgx" : "uwmrg";
}

TextMode parse_mode(std::string_view name) {
  if (name == "snippet" || name == "uwmrgx") return TextMode::kSnippetOnly;
  if (name == "fullpage" || name == "uwmrg") return TextMode::kFullPage;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected snippet or fullpage)");
}

// ---------------------------------------------------------------- time

namespace {

// Howard Hinnant's civil-calendar conversions.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

unsigned digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ParseError("timestamp '" + std::string(s) + "' is truncated");
  unsigned v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9')
      throw ParseError("timestamp '" + std::string(s) + "' is not RFC 3339");
    v = v * 10 + static_cast<unsigned>(s[i] - '0');
  }
  return v;
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  std::int64_t secs = t.time_since_epoch().count();
  std::int64_t days = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
  std::int64_t rem = secs - days * 86400;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return buf;
}

std::string format_date(Timestamp t) { return format_timestamp(t).substr(0, 10); }

Timestamp parse_timestamp(std::string_view s) {
  auto bad = [&] { return ParseError("timestamp '" + std::string(s) + "' is not RFC 3339"); };
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't') ||
      s[13] != ':' || s[16] != ':')
    throw bad();
  unsigned y = digits(s, 0, 4), mo = digits(s, 5, 2), d = digits(s, 8, 2);
  unsigned h = digits(s, 11, 2), mi = digits(s, 14, 2), sec = digits(s, 17, 2);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) throw bad();
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) throw bad();
  }
  std::int64_t offset = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    int sign = s[pos] == '+' ? 1 : -1;
    if (pos + 6 > s.size() || s[pos + 3] != ':') throw bad();
    offset = sign * (static_cast<std::int64_t>(digits(s, pos + 1, 2)) * 3600 +
                     digits(s, pos + 4, 2) * 60);
    pos += 6;
  } else {
    throw bad();
  }
  if (pos != s.size()) throw bad();
  std::int64_t secs = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec - offset;
  return Timestamp(std::chrono::seconds(secs));
}

// ---------------------------------------------------------------- records

void validate_record(const SerpRecord& record) {
  if (record.topic_id.empty()) throw ValidationError("SERP record with empty topic_id");
  for (std::size_t i = 0; i < record.results.size(); ++i) {
    const SerpResult& r = record.results[i];
    if (r.rank != i + 1)
      throw ValidationError("topic " + record.topic_id + ": result ranks must run 1..n, found " +
                            std::to_string(r.rank) + " at position " + std::to_string(i + 1));
    if (r.url.empty())
      throw ValidationError("topic " + record.topic_id + ": empty url at rank " +
                            std::to_string(r.rank));
  }
}

void SerpConfig::validate() const {
  if (max_results < 1) throw ConfigError("max_results must be >= 1");
  if (request_delay.count() < 0) throw ConfigError("request_delay must be >= 0");
  if (page_concurrency < 1) throw ConfigError("page_concurrency must be >= 1");
}

// ---------------------------------------------------------------- archives

namespace {

using ordered_json = nlohmann::ordered_json;

const std::string& require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing key '") + key + "'");
  if (!it->is_string()) throw ParseError(line, std::string("key '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

SerpRecord record_from_json(const nlohmann::json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
  SerpRecord rec;
  try {
    rec.engine = parse_engine(require_string(obj, "engine", line));
  } catch (const ConfigError& e) {
    throw ParseError(line, e.what());
  }
  rec.topic_id = require_string(obj, "topic_id", line);
  rec.query = require_string(obj, "query", line);
  try {
    rec.fetched_at = parse_timestamp(require_string(obj, "fetched_at", line));
  } catch (const ParseError& e) {
    if (std::string_view(e.what()).rfind("line ", 0) == 0) throw;
    throw ParseError(line, e.what());
  }
  auto results = obj.find("results");
  if (results == obj.end() || !results->is_array())
    throw ParseError(line, "key 'results' must be an array");
  for (const auto& r : *results) {
    if (!r.is_object()) throw ParseError(line, "result entries must be objects");
    SerpResult res;
    auto rank = r.find("rank");
    if (rank == r.end() || !rank->is_number_integer() || rank->get<long long>() < 1)
      throw ParseError(line, "result 'rank' must be an integer >= 1");
    res.rank = static_cast<std::uint32_t>(rank->get<long long>());
    res.url = require_string(r, "url", line);
    res.title = require_string(r, "title", line);
    res.snippet = require_string(r, "snippet", line);
    auto page = r.find("page_text");
    if (page != r.end() && !page->is_null()) {
      if (!page->is_string()) throw ParseError(line, "'page_text' must be a string or null");
      res.page_text = page->get<std::string>();
    }
    rec.results.push_back(std::move(res));
  }
  try {
    validate_record(rec);
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }
  return rec;
}

}  // namespace

std::vector<SerpRecord> load_serp_archive(std::istream& in) {
  std::vector<SerpRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad JSON: ") + e.what());
    }
    records.push_back(record_from_json(obj, lineno));
  }
  return records;
}

std::vector<SerpRecord> load_serp_archive_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SERP archive " + path);
  try {
    return load_serp_archive(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_serp_record(const SerpRecord& record, std::ostream& out) {
  validate_record(record);
  ordered_json obj;
  obj["engine"] = engine_name(record.engine);
  obj["topic_id"] = record.topic_id;
  obj["query"] = record.query;
  obj["fetched_at"] = format_timestamp(record.fetched_at);
  ordered_json results = ordered_json::array();
  for (const auto& r : record.results) {
    ordered_json jr;
    jr["rank"] = r.rank;
    jr["url"] = r.url;
    jr["title"] = r.title;
    jr["snippet"] = r.snippet;
    if (r.page_text) {
      jr["page_text"] = *r.page_text;
    } else {
      jr["page_text"] = nullptr;
    }
    results.push_back(std::move(jr));
  }
  obj["results"] = std::move(results);
  out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  if (!out) throw IoError("failed writing SERP archive");
}

void write_serp_archive(const std::vector<SerpRecord>& records, std::ostream& out) {
  for (const auto& r : records) write_serp_record(r, out);
}

// ---------------------------------------------------------------- texts

TopicTexts build_topic_texts(const std::vector<SerpRecord>& records, TextMode mode,
                             const PageFetcher& fetch_missing) {
  TopicTexts out;
  if (mode == TextMode::kFullPage && !fetch_missing) {
    std::vector<std::string> missing;
    for (const auto& rec : records)
      for (const auto& r : rec.results)
        if (!r.page_text) missing.push_back(r.url);
    if (!missing.empty()) {
      std::string msg = "full-page mode needs page_text for " + std::to_string(missing.size()) +
                        " result(s) and page fetching is disabled:";
      for (const auto& u : missing) msg += "\n  " + u;
      throw ValidationError(msg);
    }
  }
  for (const auto& rec : records) {
    for (const auto& r : rec.results) {
      std::string text;
      if (mode == TextMode::kSnippetOnly) {
        text = html::fragment_text(r.title + " " + r.snippet);
      } else if (r.page_text) {
        text = html::extract_page_text(*r.page_text);
      } else {
        auto page = fetch_missing(r.url);
        if (!page) {
          ++out.skipped_non_html;
          continue;
        }
        text = html::extract_page_text(*page);
      }
      if (text.empty()) {
        ++out.dropped_empty;
        continue;
      }
      out.texts.push_back(TrainingText{rec.topic_id, r.url, std::move(text)});
    }
  }
  return out;
}

std::vector<TrainingText> merge_per_topic(const std::vector<TrainingText>& texts) {
  std::vector<TrainingText> merged;
  std::map<std::string, std::size_t> index;
  for (const auto& t : texts) {
    auto [it, inserted] = index.emplace(t.topic_id, merged.size());
    if (inserted) {
      merged.push_back(TrainingText{t.topic_id, t.source_url, t.text});
    } else {
      merged[it->second].text += ' ';
      merged[it->second].text += t.text;
    }
  }
  return merged;
}

std::string normalize_url(std::string_view url) {
  std::string out(detail::trim(url));
  std::size_t host_start = 0;
  std::size_t scheme = out.find("://");
  if (scheme != std::string::npos) {
    for (std::size_t i = 0; i < scheme; ++i)
      out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
    host_start = scheme + 3;
  }
  std::size_t host_end = out.find_first_of("/?#", host_start);
  if (host_end == std::string::npos) host_end = out.size();
  for (std::size_t i = host_start; i < host_end; ++i)
    out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out;
}

double url_intersection(const SerpRecord& a, const SerpRecord& b) {
  std::unordered_set<std::string> ua, ub;
  for (const auto& r : a.results) ua.insert(normalize_url(r.url));
  for (const auto& r : b.results) ub.insert(normalize_url(r.url));
  if (ua.empty() && ub.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& u : ua) shared += ub.count(u);
  return static_cast<double>(shared) / static_cast<double>(std::max(ua.size(), ub.size()));
}

}  // namespace webprf::serp
