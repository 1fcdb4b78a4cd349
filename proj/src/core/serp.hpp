#pragma once

// Search engine result pages: records, archives, live fetching and the
// assembly of per-topic training texts.

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/collection_io.hpp"
#include "core/error.hpp"

namespace webprf::serp {

enum class Engine { kGoogle, kDuckDuckGo };

std::string_view engine_name(Engine e);  // "google" / "duckduckgo"
char engine_initial(Engine e);           // 'g' / 'd'
Engine parse_engine(std::string_view name);

// uwmrgx trains on title + snippet, uwmrg on the linked page text.
enum class TextMode { kSnippetOnly, kFullPage };

std::string_view mode_name(TextMode m);  // "snippet" / "fullpage"
std::string_view run_prefix(TextMode m);  // "uwmrgx" / "uwmrg"
TextMode parse_mode(std::string_view name);

using Timestamp = std::chrono::sys_seconds;

// RFC 3339 in UTC, "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);
// Accepts 'Z' or a numeric offset and optional fractional seconds (dropped).
Timestamp parse_timestamp(std::string_view text);
std::string format_date(Timestamp t);  // "YYYY-MM-DD"

struct SerpResult {
  std::uint32_t rank = 0;
  std::string url;
  std::string title;
  std::string snippet;
  std::optional<std::string> page_text;  // raw page content, if downloaded

  bool operator==(const SerpResult&) const = default;
};

struct SerpRecord {
  Engine engine = Engine::kGoogle;
  std::string topic_id;
  std::string query;
  Timestamp fetched_at{};
  std::vector<SerpResult> results;

  bool operator==(const SerpRecord&) const = default;
};

// Throws ValidationError unless ranks run 1..n and urls are non-empty.
void validate_record(const SerpRecord& record);

struct SerpConfig {
  std::size_t max_results = 10;
  std::chrono::milliseconds request_delay{2000};
  std::string language_code = "en";
  TextMode mode = TextMode::kSnippetOnly;
  std::string user_agent;
  std::size_t page_concurrency = 4;

  void validate() const;
};

// ---------------------------------------------------------------- archives

std::vector<SerpRecord> load_serp_archive(std::istream& in);
std::vector<SerpRecord> load_serp_archive_file(const std::string& path);
void write_serp_record(const SerpRecord& record, std::ostream& out);
void write_serp_archive(const std::vector<SerpRecord>& records, std::ostream& out);

// ---------------------------------------------------------------- texts

struct TrainingText {
  std::string topic_id;
  std::string source_url;
  std::string text;

  bool operator==(const TrainingText&) const = default;
};

struct TopicTexts {
  std::vector<TrainingText> texts;
  std::size_t dropped_empty = 0;
  std::size_t skipped_non_html = 0;
};

// Optional page downloader for full-page mode; returns nullopt for pages
// that are not HTML.
using PageFetcher = std::function<std::optional<std::string>(const std::string& url)>;

TopicTexts build_topic_texts(const std::vector<SerpRecord>& records, TextMode mode,
                             const PageFetcher& fetch_missing = {});

// Joins every text of a topic into one sample per topic, in input order.
std::vector<TrainingText> merge_per_topic(const std::vector<TrainingText>& texts);

// Lowercases scheme and host and strips trailing slashes.
std::string normalize_url(std::string_view url);

// |urls(a) n urls(b)| / max(|urls(a)|, |urls(b)|); 1.0 when both are empty.
double url_intersection(const SerpRecord& a, const SerpRecord& b);

// ---------------------------------------------------------------- live

class FetchError : public Error {
 public:
  FetchError(const std::string& what, std::string raw_response)
      : Error(ErrorCode::kFetch, what), raw_response_(std::move(raw_response)) {}
  const std::string& raw_response() const noexcept { return raw_response_; }

 private:
  std::string raw_response_;
};

struct HttpResponse {
  int status = 0;
  std::string content_type;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Network failures throw FetchError; HTTP error statuses are returned.
  virtual HttpResponse get(const std::string& url, const HttpHeaders& headers) = 0;
};

// cpp-httplib client; follows redirects.
std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout);

// Enforces the minimum spacing between consecutive requests per engine.
class RequestThrottle {
 public:
  explicit RequestThrottle(std::chrono::milliseconds delay) : delay_(delay) {}
  void wait(Engine engine);

 private:
  using Clock = std::chrono::steady_clock;
  std::chrono::milliseconds delay_;
  std::mutex mu_;
  std::map<Engine, Clock::time_point> last_;
};

std::string percent_encode(std::string_view text);
std::string search_url(Engine engine, std::string_view query, const SerpConfig& config);

// Organic results only: ads, related searches and other SERP sections are
// skipped. Ranks are assigned 1..n in page order.
std::vector<SerpResult> parse_google_serp(std::string_view html, std::size_t max_results);
std::vector<SerpResult> parse_duckduckgo_serp(std::string_view html, std::size_t max_results);

// Queries one engine for a topic. In full-page mode the linked pages are
// downloaded into page_text (non-HTML pages become ""). Zero parsed
// results or an HTTP error raise FetchError with the raw response.
SerpRecord fetch_serp(const io::Topic& topic, io::QueryFormulation formulation, Engine engine,
                      const SerpConfig& config, HttpTransport& transport,
                      RequestThrottle& throttle, std::string_view query_delimiter = " ");

}  // namespace webprf::serp
