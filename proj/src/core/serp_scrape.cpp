#include <algorithm>
#include <chrono>
#include <future>
#include <thread>
#include <unordered_set>

#include "core/html_text.hpp"
#include "core/serp.hpp"
#include "core/strings.hpp"

namespace webprf::serp {

void RequestThrottle::wait(Engine engine) {
  std::unique_lock lock(mu_);
  auto now = Clock::now();
  auto it = last_.find(engine);
  if (it != last_.end()) {
    auto ready = it->second + delay_;
    if (now < ready) {
      std::this_thread::sleep_for(ready - now);
      now = Clock::now();
    }
  }
  last_[engine] = now;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else if (c == ' ') {
      out.push_back('+');
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

namespace {

std::string percent_decode(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '+') {
      out.push_back(' ');
    } else if (c == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Value of a query-string parameter in a URL or relative reference.
std::optional<std::string> query_param(std::string_view url, std::string_view key) {
  std::size_t q = url.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  std::string_view rest = url.substr(q + 1);
  while (!rest.empty()) {
    std::size_t amp = rest.find('&');
    std::string_view pair = rest.substr(0, amp);
    std::size_t eq = pair.find('=');
    if (pair.substr(0, eq) == key)
      return percent_decode(eq == std::string_view::npos ? "" : pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest.remove_prefix(amp + 1);
  }
  return std::nullopt;
}

bool is_http_url(std::string_view url) {
  return detail::starts_with_icase(url, "http://") || detail::starts_with_icase(url, "https://");
}

std::string host_of(std::string_view url) {
  std::size_t s = url.find("://");
  if (s == std::string_view::npos) return {};
  std::string_view rest = url.substr(s + 3);
  return detail::to_lower_ascii(rest.substr(0, rest.find_first_of("/?#:")));
}

bool is_google_host(const std::string& host) {
  return host == "google.com" || host.find(".google.") != std::string::npos ||
         host.rfind("google.", 0) == 0 || host.find("googleusercontent") != std::string::npos ||
         host.find("gstatic") != std::string::npos;
}

// Walks the token stream keeping a stack of open elements, so that text
// capture and "inside an ad block" can be tracked per element.
struct Frame {
  std::string name;
  bool ad = false;
};

class ElementStack {
 public:
  bool in_ad() const { return !frames_.empty() && frames_.back().ad; }
  std::size_t depth() const { return frames_.size(); }

  void push(std::string name, bool ad) {
    frames_.push_back(Frame{std::move(name), ad || in_ad()});
  }

  // Pops to the innermost frame named `name`; returns the depth it had (its
  // index + 1) or 0 when no such frame is open.
  std::size_t pop(std::string_view name) {
    for (std::size_t i = frames_.size(); i-- > 0;) {
      if (frames_[i].name == name) {
        frames_.resize(i);
        return i + 1;
      }
    }
    return 0;
  }

 private:
  std::vector<Frame> frames_;
};

bool opens_frame(const html::Token& t) { return !t.self_closing; }

struct Capture {
  std::size_t depth = 0;  // stack depth of the capturing element, 0 = idle
  std::string raw;

  bool active() const { return depth != 0; }
  void start(std::size_t d) {
    depth = d;
    raw.clear();
  }
  std::string finish() {
    depth = 0;
    return html::fragment_text(raw);
  }
};

void add_result(std::vector<SerpResult>& results, std::unordered_set<std::string>& seen,
                std::string url, std::string title) {
  if (url.empty() || title.empty()) return;
  if (!seen.insert(normalize_url(url)).second) return;
  SerpResult r;
  r.rank = static_cast<std::uint32_t>(results.size() + 1);
  r.url = std::move(url);
  r.title = std::move(title);
  results.push_back(std::move(r));
}

bool google_ad_marker(const html::Token& t) {
  if (const auto* id = t.attribute("id"))
    if (*id == "tads" || *id == "bottomads" || *id == "tvcap" || *id == "taw") return true;
  return t.attribute("data-text-ad") != nullptr || t.has_class("uEierd") ||
         t.has_class("commercial-unit-desktop-top");
}

bool google_snippet_marker(const html::Token& t) {
  return t.has_class("VwiC3b") || t.has_class("s3v9rd") || t.has_class("st") ||
         t.has_class("IsZvec") || t.has_class("yDYNvb") || t.has_class("lEBKkf") ||
         t.attribute("data-sncf") != nullptr;
}

// Resolves a result anchor to the target URL; empty for navigation links.
std::string google_target(const std::string& href) {
  std::string url;
  if (href.rfind("/url?", 0) == 0) {
    url = query_param(href, "q").value_or(query_param(href, "url").value_or(""));
  } else {
    url = href;
  }
  if (!is_http_url(url)) return {};
  if (is_google_host(host_of(url))) return {};
  return url;
}

}  // namespace

std::string search_url(Engine engine, std::string_view query, const SerpConfig& config) {
  if (engine == Engine::kGoogle) {
    return "https://www.google.com/search?q=" + percent_encode(query) +
           "&hl=" + percent_encode(config.language_code) +
           "&num=" + std::to_string(config.max_results) + "&gbv=1";
  }
  return "https://html.duckduckgo.com/html/?q=" + percent_encode(query);
}

std::vector<SerpResult> parse_google_serp(std::string_view html_text, std::size_t max_results) {
  std::vector<SerpResult> results;
  std::unordered_set<std::string> seen;
  html::Tokenizer tok(html_text);
  html::Token t;
  ElementStack stack;

  std::size_t anchor_depth = 0;
  std::string anchor_href;
  Capture title;
  std::string pending_title;
  Capture snippet;
  bool awaiting_snippet = false;

  while (tok.next(t)) {
    switch (t.kind) {
      case html::Token::Kind::kStartTag: {
        if (!opens_frame(t)) break;
        stack.push(t.name, google_ad_marker(t));
        std::size_t d = stack.depth();
        if (t.name == "a" && !stack.in_ad() && anchor_depth == 0) {
          if (const auto* href = t.attribute("href")) {
            anchor_depth = d;
            anchor_href = *href;
            pending_title.clear();
          }
        } else if (anchor_depth != 0 && !title.active() &&
                   (t.name == "h3" || t.has_class("vvjwJb"))) {
          title.start(d);
        } else if (anchor_depth == 0 && awaiting_snippet && !snippet.active() &&
                   !stack.in_ad() && google_snippet_marker(t)) {
          snippet.start(d);
        }
        break;
      }
      case html::Token::Kind::kText:
        if (title.active()) title.raw += t.raw;
        if (snippet.active()) snippet.raw += t.raw;
        break;
      case html::Token::Kind::kEndTag: {
        std::size_t closed = stack.pop(t.name);
        if (closed == 0) break;
        if (title.active() && closed <= title.depth) pending_title = title.finish();
        if (snippet.active() && closed <= snippet.depth) {
          std::string text = snippet.finish();
          if (!text.empty() && !results.empty()) {
            results.back().snippet = std::move(text);
            awaiting_snippet = false;
          }
        }
        if (anchor_depth != 0 && closed <= anchor_depth) {
          if (title.active()) pending_title = title.finish();
          anchor_depth = 0;
          std::string url = google_target(anchor_href);
          if (!url.empty() && !pending_title.empty()) {
            std::size_t before = results.size();
            add_result(results, seen, std::move(url), pending_title);
            if (results.size() > before) awaiting_snippet = true;
          }
          pending_title.clear();
        }
        break;
      }
      case html::Token::Kind::kComment:
        break;
    }
    if (results.size() >= max_results && !awaiting_snippet) break;
    if (results.size() > max_results) break;
  }
  if (results.size() > max_results) results.resize(max_results);
  return results;
}

std::vector<SerpResult> parse_duckduckgo_serp(std::string_view html_text,
                                              std::size_t max_results) {
  std::vector<SerpResult> results;
  std::unordered_set<std::string> seen;
  html::Tokenizer tok(html_text);
  html::Token t;
  ElementStack stack;

  Capture title;
  std::string title_href;
  Capture snippet;

  while (tok.next(t)) {
    switch (t.kind) {
      case html::Token::Kind::kStartTag: {
        if (!opens_frame(t)) break;
        bool ad = t.has_class("result--ad") || t.has_class("badge--ad");
        stack.push(t.name, ad);
        if (stack.in_ad()) break;
        if (t.name == "a" && t.has_class("result__a") && !title.active()) {
          title.start(stack.depth());
          const auto* href = t.attribute("href");
          title_href = href ? *href : "";
        } else if (t.has_class("result__snippet") && !snippet.active()) {
          snippet.start(stack.depth());
        }
        break;
      }
      case html::Token::Kind::kText:
        if (title.active()) title.raw += t.raw;
        if (snippet.active()) snippet.raw += t.raw;
        break;
      case html::Token::Kind::kEndTag: {
        std::size_t closed = stack.pop(t.name);
        if (closed == 0) break;
        if (title.active() && closed <= title.depth) {
          std::string text = title.finish();
          std::string url = title_href;
          if (auto target = query_param(url, "uddg")) url = *target;
          if (url.rfind("//", 0) == 0) url = "https:" + url;
          if (is_http_url(url) && host_of(url).find("duckduckgo.com") == std::string::npos)
            add_result(results, seen, std::move(url), std::move(text));
        }
        if (snippet.active() && closed <= snippet.depth) {
          std::string text = snippet.finish();
          if (!results.empty() && results.back().snippet.empty())
            results.back().snippet = std::move(text);
        }
        break;
      }
      case html::Token::Kind::kComment:
        break;
    }
    if (results.size() > max_results) break;
  }
  if (results.size() > max_results) results.resize(max_results);
  return results;
}

SerpRecord fetch_serp(const io::Topic& topic, io::QueryFormulation formulation, Engine engine,
                      const SerpConfig& config, HttpTransport& transport,
                      RequestThrottle& throttle, std::string_view query_delimiter) {
  config.validate();
  SerpRecord record;
  record.engine = engine;
  record.topic_id = topic.id;
  record.query = io::render_query(topic, formulation, query_delimiter);

  HttpHeaders headers = {{"Accept-Language", config.language_code}};
  if (!config.user_agent.empty()) headers.emplace_back("User-Agent", config.user_agent);

  throttle.wait(engine);
  record.fetched_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  HttpResponse resp = transport.get(search_url(engine, record.query, config), headers);
  if (resp.status < 200 || resp.status >= 300)
    throw FetchError("topic " + topic.id + ": " + std::string(engine_name(engine)) +
                         " answered HTTP " + std::to_string(resp.status),
                     resp.body);
  record.results = engine == Engine::kGoogle ? parse_google_serp(resp.body, config.max_results)
                                             : parse_duckduckgo_serp(resp.body, config.max_results);
  if (record.results.empty())
    throw FetchError("topic " + topic.id + ": no organic results parsed from " +
                         std::string(engine_name(engine)) + " (layout change or block page)",
                     resp.body);

  if (config.mode == TextMode::kFullPage) {
    // Pages of one SERP download concurrently, in batches.
    auto download = [&](const std::string& url) -> std::string {
      try {
        HttpResponse page = transport.get(url, headers);
        if (page.status < 200 || page.status >= 300) return {};
        std::string ct = detail::to_lower_ascii(page.content_type);
        if (!ct.empty() && ct.find("html") == std::string::npos &&
            ct.find("text/plain") == std::string::npos)
          return {};
        return std::move(page.body);
      } catch (const FetchError&) {
        return {};
      }
    };
    std::size_t batch = std::max<std::size_t>(1, config.page_concurrency);
    for (std::size_t start = 0; start < record.results.size(); start += batch) {
      std::vector<std::future<std::string>> jobs;
      std::size_t stop = std::min(record.results.size(), start + batch);
      for (std::size_t i = start; i < stop; ++i)
        jobs.push_back(std::async(std::launch::async, download, record.results[i].url));
      for (std::size_t i = start; i < stop; ++i) record.results[i].page_text = jobs[i - start].get();
    }
  }
  return record;
}

}  // namespace webprf::serp
