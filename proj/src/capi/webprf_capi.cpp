#include "webprf/webprf.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/pipeline.hpp"

using namespace webprf;

struct webprf_topics {
  io::TopicSet set;
};
struct webprf_qrels {
  io::Qrels qrels;
};
struct webprf_run {
  io::Run run;
};
struct webprf_archive {
  std::vector<serp::SerpRecord> records;
};
struct webprf_http_response {
  serp::HttpResponse response;
};
struct webprf_scrape_report {
  pipeline::ScrapeReport report;
  std::string archive_path;
};
struct webprf_pipeline_report {
  pipeline::PipelineReport report;
  std::string run_path;
};

namespace {

thread_local std::string g_last_error;

webprf_status set_error(webprf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

webprf_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return WEBPRF_E_PARSE;
    case ErrorCode::kValidation: return WEBPRF_E_VALIDATION;
    case ErrorCode::kIo: return WEBPRF_E_IO;
    case ErrorCode::kFetch: return WEBPRF_E_FETCH;
    case ErrorCode::kTraining: return WEBPRF_E_TRAINING;
    case ErrorCode::kConfig: return WEBPRF_E_CONFIG;
    case ErrorCode::kUndefined: return WEBPRF_E_UNDEFINED;
  }
  return WEBPRF_E_INTERNAL;
}

template <typename Fn>
webprf_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return WEBPRF_OK;
  } catch (const Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(WEBPRF_E_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(WEBPRF_E_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(WEBPRF_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(WEBPRF_E_INTERNAL, "unknown error");
  }
}

#define WEBPRF_REQUIRE(cond)                                                 \
  do {                                                                       \
    if (!(cond)) return set_error(WEBPRF_E_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string str_or(const char* s, const char* fallback) { return s ? s : fallback; }

serp::Engine to_engine(webprf_engine e) {
  switch (e) {
    case WEBPRF_ENGINE_GOOGLE: return serp::Engine::kGoogle;
    case WEBPRF_ENGINE_DUCKDUCKGO: return serp::Engine::kDuckDuckGo;
  }
  throw ConfigError("unknown engine value");
}

io::QueryFormulation to_query(webprf_query q) {
  switch (q) {
    case WEBPRF_QUERY_TITLE: return io::QueryFormulation::kTitleOnly;
    case WEBPRF_QUERY_TITLE_DESC: return io::QueryFormulation::kTitleAndDescription;
  }
  throw ConfigError("unknown query formulation value");
}

serp::TextMode to_mode(webprf_mode m) {
  switch (m) {
    case WEBPRF_MODE_SNIPPET: return serp::TextMode::kSnippetOnly;
    case WEBPRF_MODE_FULLPAGE: return serp::TextMode::kFullPage;
  }
  throw ConfigError("unknown text mode value");
}

metrics::MetricConfig to_metric_config(const webprf_metric_options* o) {
  metrics::MetricConfig c;
  if (!o) return c;
  c.ndcg_depth = o->ndcg_depth;
  c.precision_k = o->precision_k;
  c.rbo_p = o->rbo_p;
  c.alpha = o->alpha;
  if (o->cutoff_count > 8) throw ConfigError("at most 8 cutoffs");
  std::vector<std::size_t> cut(o->cutoffs, o->cutoffs + o->cutoff_count);
  if (cut.empty()) throw ConfigError("at least one cutoff is needed");
  c.ktu_depths = c.rbo_depths = c.rmse_depths = cut;
  c.validate();
  return c;
}

std::vector<std::string> to_list(const char* const* items, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!items[i]) throw ValidationError("null id at position " + std::to_string(i));
    out.emplace_back(items[i]);
  }
  return out;
}

// Adapts the user callback to the transport interface. Calls may come from
// several threads at once in full-page mode.
class CallbackTransport : public serp::HttpTransport {
 public:
  CallbackTransport(webprf_http_get_fn fn, void* user) : fn_(fn), user_(user) {}
  serp::HttpResponse get(const std::string& url, const serp::HttpHeaders&) override {
    webprf_http_response r;
    if (fn_(user_, url.c_str(), &r) != 0)
      throw serp::FetchError("request to " + url + " failed", {});
    return std::move(r.response);
  }

 private:
  webprf_http_get_fn fn_;
  void* user_;
};

}  // namespace

extern "C" {

const char* webprf_version(void) { return "0.1.0"; }

const char* webprf_last_error(void) { return g_last_error.c_str(); }

const char* webprf_status_name(webprf_status status) {
  switch (status) {
    case WEBPRF_OK: return "ok";
    case WEBPRF_E_PARSE: return "parse error";
    case WEBPRF_E_VALIDATION: return "validation error";
    case WEBPRF_E_IO: return "i/o error";
    case WEBPRF_E_FETCH: return "fetch error";
    case WEBPRF_E_TRAINING: return "training error";
    case WEBPRF_E_CONFIG: return "configuration error";
    case WEBPRF_E_UNDEFINED: return "undefined value";
    case WEBPRF_E_ARGUMENT: return "invalid argument";
    case WEBPRF_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void webprf_string_free(char* s) { std::free(s); }

webprf_status webprf_parse_engine(const char* name, webprf_engine* out) {
  WEBPRF_REQUIRE(name && out);
  return guarded([&] {
    *out = serp::parse_engine(name) == serp::Engine::kGoogle ? WEBPRF_ENGINE_GOOGLE
                                                              : WEBPRF_ENGINE_DUCKDUCKGO;
  });
}

webprf_status webprf_parse_query(const char* code, webprf_query* out) {
  WEBPRF_REQUIRE(code && out);
  return guarded([&] {
    *out = io::parse_query_code(code) == io::QueryFormulation::kTitleOnly ? WEBPRF_QUERY_TITLE
                                                                          : WEBPRF_QUERY_TITLE_DESC;
  });
}

webprf_status webprf_parse_mode(const char* name, webprf_mode* out) {
  WEBPRF_REQUIRE(name && out);
  return guarded([&] {
    *out = serp::parse_mode(name) == serp::TextMode::kSnippetOnly ? WEBPRF_MODE_SNIPPET
                                                                  : WEBPRF_MODE_FULLPAGE;
  });
}

// ---------------------------------------------------------------- collections

webprf_status webprf_topics_load(const char* path, webprf_topics** out) {
  WEBPRF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new webprf_topics{pipeline::load_topics(path)}; });
}

size_t webprf_topics_count(const webprf_topics* topics) { return topics ? topics->set.size() : 0; }

const char* webprf_topics_id(const webprf_topics* topics, size_t index) {
  if (!topics || index >= topics->set.size()) return nullptr;
  return topics->set.topics()[index].id.c_str();
}

webprf_status webprf_topics_query(const webprf_topics* topics, size_t index, webprf_query query,
                                  const char* delimiter, char** out) {
  WEBPRF_REQUIRE(topics && out && index < topics->set.size());
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(io::render_query(topics->set.topics()[index], to_query(query),
                                       delimiter ? delimiter : " "));
  });
}

void webprf_topics_free(webprf_topics* topics) { delete topics; }

webprf_status webprf_qrels_load(const char* path, webprf_qrels** out) {
  WEBPRF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new webprf_qrels{pipeline::load_qrels(path)}; });
}

int webprf_qrels_grade(const webprf_qrels* qrels, const char* topic_id, const char* doc_id) {
  if (!qrels || !topic_id || !doc_id) return 0;
  return qrels->qrels.grade(topic_id, doc_id);
}

void webprf_qrels_free(webprf_qrels* qrels) { delete qrels; }

webprf_status webprf_run_load(const char* path, webprf_run** out) {
  WEBPRF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new webprf_run{pipeline::load_run(path)}; });
}

webprf_status webprf_run_parse(const char* text, size_t length, webprf_run** out) {
  WEBPRF_REQUIRE((text || length == 0) && out);
  *out = nullptr;
  return guarded([&] {
    *out = new webprf_run{io::parse_run(std::string_view(text ? text : "", length))};
  });
}

const char* webprf_run_tag(const webprf_run* run) { return run ? run->run.tag.c_str() : nullptr; }

size_t webprf_run_topic_count(const webprf_run* run) { return run ? run->run.topics.size() : 0; }

webprf_status webprf_run_write(const webprf_run* run, char** out) {
  WEBPRF_REQUIRE(run && out);
  *out = nullptr;
  return guarded([&] {
    std::ostringstream s;
    io::write_run(run->run, s);
    *out = dup_string(s.str());
  });
}

void webprf_run_free(webprf_run* run) { delete run; }

webprf_status webprf_archive_load(const char* path, webprf_archive** out) {
  WEBPRF_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open SERP archive ") + path);
    *out = new webprf_archive{serp::load_serp_archive(in)};
  });
}

size_t webprf_archive_count(const webprf_archive* archive) {
  return archive ? archive->records.size() : 0;
}

webprf_status webprf_archive_write(const webprf_archive* archive, char** out) {
  WEBPRF_REQUIRE(archive && out);
  *out = nullptr;
  return guarded([&] {
    std::ostringstream s;
    serp::write_serp_archive(archive->records, s);
    *out = dup_string(s.str());
  });
}

void webprf_archive_free(webprf_archive* archive) { delete archive; }

// ---------------------------------------------------------------- measures

void webprf_metric_options_init(webprf_metric_options* options) {
  if (!options) return;
  *options = webprf_metric_options{};
  metrics::MetricConfig d;
  options->ndcg_depth = d.ndcg_depth;
  options->precision_k = d.precision_k;
  options->rbo_p = d.rbo_p;
  options->alpha = d.alpha;
  options->cutoff_count = d.ktu_depths.size();
  for (std::size_t i = 0; i < d.ktu_depths.size(); ++i) options->cutoffs[i] = d.ktu_depths[i];
}

webprf_status webprf_evaluate(const webprf_run* run, const webprf_qrels* qrels,
                              const webprf_metric_options* options, char** csv) {
  WEBPRF_REQUIRE(run && qrels && csv);
  *csv = nullptr;
  return guarded([&] {
    std::ostringstream s;
    metrics::write_evaluation_csv(metrics::evaluate(run->run, qrels->qrels, to_metric_config(options)), s);
    *csv = dup_string(s.str());
  });
}

webprf_status webprf_compare(const webprf_run* original, const webprf_run* reproduced,
                             const webprf_qrels* qrels, const webprf_run* original_baseline,
                             const webprf_run* reproduced_baseline,
                             const webprf_metric_options* options, char** csv) {
  WEBPRF_REQUIRE(original && reproduced && qrels && csv);
  WEBPRF_REQUIRE((original_baseline == nullptr) == (reproduced_baseline == nullptr));
  *csv = nullptr;
  return guarded([&] {
    metrics::BaselinePair base;
    if (original_baseline) base = {&original_baseline->run, &reproduced_baseline->run};
    std::ostringstream s;
    metrics::write_comparison_csv(
        metrics::compare(original->run, reproduced->run, qrels->qrels, to_metric_config(options), base), s);
    *csv = dup_string(s.str());
  });
}

webprf_status webprf_drift(const webprf_archive* const* archives, size_t count, double rbo_p,
                           char** csv, char** warnings) {
  WEBPRF_REQUIRE((archives || count == 0) && csv);
  *csv = nullptr;
  if (warnings) *warnings = nullptr;
  return guarded([&] {
    std::vector<serp::SerpRecord> all;
    for (std::size_t i = 0; i < count; ++i) {
      if (!archives[i]) throw ValidationError("null archive handle");
      all.insert(all.end(), archives[i]->records.begin(), archives[i]->records.end());
    }
    metrics::DriftTable table = metrics::drift_analysis(all, rbo_p);
    std::ostringstream s;
    metrics::write_drift_csv(table, s);
    std::string w;
    for (const auto& line : table.warnings) w += line + "\n";
    char* c = dup_string(s.str());
    if (warnings) {
      try {
        *warnings = dup_string(w);
      } catch (...) {
        std::free(c);
        throw;
      }
    }
    *csv = c;
  });
}

webprf_status webprf_rbo(const char* const* a, size_t a_len, const char* const* b, size_t b_len,
                         double p, size_t depth, double* out) {
  WEBPRF_REQUIRE((a || a_len == 0) && (b || b_len == 0) && out);
  return guarded([&] { *out = metrics::rbo(to_list(a, a_len), to_list(b, b_len), p, depth); });
}

webprf_status webprf_ktu(const char* const* a, size_t a_len, const char* const* b, size_t b_len,
                         size_t depth, double* out, int* defined) {
  WEBPRF_REQUIRE((a || a_len == 0) && (b || b_len == 0) && out && defined);
  return guarded([&] {
    auto v = metrics::ktu(to_list(a, a_len), to_list(b, b_len), depth);
    *defined = v.has_value();
    *out = v.value_or(0.0);
  });
}

webprf_status webprf_effect_ratio(double orig_base, double orig_adv, double rep_base,
                                  double rep_adv, double* out, int* defined) {
  WEBPRF_REQUIRE(out && defined);
  return guarded([&] {
    auto v = metrics::effect_ratio_from_means(orig_base, orig_adv, rep_base, rep_adv);
    *defined = v.has_value();
    *out = v.value_or(0.0);
  });
}

webprf_status webprf_delta_relative_improvement(double orig_base, double orig_adv,
                                                double rep_base, double rep_adv, double* out) {
  WEBPRF_REQUIRE(out);
  return guarded([&] {
    *out = metrics::delta_relative_improvement(orig_base, orig_adv, rep_base, rep_adv);
  });
}

// ---------------------------------------------------------------- scraping

void webprf_http_response_set(webprf_http_response* response, int status,
                              const char* content_type, const char* body, size_t body_length) {
  if (!response) return;
  response->response.status = status;
  response->response.content_type = content_type ? content_type : "";
  response->response.body.assign(body ? body : "", body ? body_length : 0);
}

void webprf_scrape_options_init(webprf_scrape_options* options) {
  if (!options) return;
  *options = webprf_scrape_options{};
  serp::SerpConfig d;
  options->engine = WEBPRF_ENGINE_GOOGLE;
  options->query = WEBPRF_QUERY_TITLE;
  options->query_delimiter = " ";
  options->mode = WEBPRF_MODE_SNIPPET;
  options->max_results = d.max_results;
  options->request_delay_ms = static_cast<uint32_t>(d.request_delay.count());
  options->language_code = "en";
  options->page_concurrency = d.page_concurrency;
  options->timeout_seconds = 30;
}

webprf_status webprf_scrape(const webprf_scrape_options* options, webprf_scrape_report** out) {
  WEBPRF_REQUIRE(options && out && options->topics_path && options->archive_dir);
  *out = nullptr;
  return guarded([&] {
    pipeline::ScrapeConfig c;
    c.topics_path = options->topics_path;
    c.archive_dir = options->archive_dir;
    c.engine = to_engine(options->engine);
    c.query = to_query(options->query);
    c.query_delimiter = str_or(options->query_delimiter, " ");
    c.serp.mode = to_mode(options->mode);
    c.serp.max_results = options->max_results;
    c.serp.request_delay = std::chrono::milliseconds(options->request_delay_ms);
    c.serp.language_code = str_or(options->language_code, "en");
    c.serp.user_agent = str_or(options->user_agent, "");
    c.serp.page_concurrency = options->page_concurrency;
    c.http_timeout = std::chrono::seconds(options->timeout_seconds);

    auto now = options->now_unix != 0
                   ? serp::Timestamp(std::chrono::seconds(options->now_unix))
                   : std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    serp::RequestThrottle throttle(c.serp.request_delay);
    std::unique_ptr<serp::HttpTransport> transport;
    if (options->http_get)
      transport = std::make_unique<CallbackTransport>(options->http_get, options->http_user_data);
    else
      transport = serp::make_http_transport(c.http_timeout);
    auto report = std::make_unique<webprf_scrape_report>();
    report->report = pipeline::scrape(c, *transport, throttle, now);
    report->archive_path = report->report.archive_path.string();
    *out = report.release();
  });
}

const char* webprf_scrape_archive_path(const webprf_scrape_report* report) {
  return report ? report->archive_path.c_str() : nullptr;
}
size_t webprf_scrape_added(const webprf_scrape_report* report) {
  return report ? report->report.added : 0;
}
size_t webprf_scrape_skipped(const webprf_scrape_report* report) {
  return report ? report->report.skipped_existing : 0;
}
size_t webprf_scrape_failure_count(const webprf_scrape_report* report) {
  return report ? report->report.failures.size() : 0;
}
const char* webprf_scrape_failure_topic(const webprf_scrape_report* report, size_t i) {
  if (!report || i >= report->report.failures.size()) return nullptr;
  return report->report.failures[i].topic_id.c_str();
}
const char* webprf_scrape_failure_message(const webprf_scrape_report* report, size_t i) {
  if (!report || i >= report->report.failures.size()) return nullptr;
  return report->report.failures[i].message.c_str();
}
void webprf_scrape_report_free(webprf_scrape_report* report) { delete report; }

// ---------------------------------------------------------------- pipeline

void webprf_pipeline_options_init(webprf_pipeline_options* options) {
  if (!options) return;
  *options = webprf_pipeline_options{};
  classifier::TrainConfig t;
  options->engine = WEBPRF_ENGINE_GOOGLE;
  options->query = WEBPRF_QUERY_TITLE;
  options->mode = WEBPRF_MODE_SNIPPET;
  options->query_delimiter = " ";
  options->collection = "collection";
  options->sublinear_tf = 1;
  options->smooth_idf = 1;
  options->tolerance = t.tolerance;
  options->max_iterations = t.max_iterations;
  options->regularization = t.regularization_strength;
  options->depth = io::kMaxRunDepth;
}

webprf_status webprf_pipeline_run(const webprf_pipeline_options* options,
                                  webprf_pipeline_report** out) {
  WEBPRF_REQUIRE(options && out);
  WEBPRF_REQUIRE(options->archive_paths || options->archive_count == 0);
  *out = nullptr;
  return guarded([&] {
    pipeline::PipelineConfig c;
    c.topics_path = str_or(options->topics_path, "");
    c.corpus_path = str_or(options->corpus_path, "");
    for (std::size_t i = 0; i < options->archive_count; ++i) {
      if (!options->archive_paths[i]) throw ConfigError("null archive path");
      c.archive_paths.emplace_back(options->archive_paths[i]);
    }
    c.output_dir = str_or(options->output_dir, "");
    c.stopwords_path = str_or(options->stopwords_path, "");
    c.engine = to_engine(options->engine);
    c.query = to_query(options->query);
    c.mode = to_mode(options->mode);
    c.query_delimiter = str_or(options->query_delimiter, " ");
    c.collection = str_or(options->collection, "collection");
    if (options->snapshot_date) c.snapshot_date = options->snapshot_date;
    c.run_tag = str_or(options->run_tag, "");
    c.merge_per_topic = options->merge_per_topic != 0;
    c.write_svmlight = options->write_svmlight != 0;
    c.write_models = options->write_models != 0;
    c.features.sublinear_tf = options->sublinear_tf != 0;
    c.features.smooth_idf = options->smooth_idf != 0;
    c.train.tolerance = options->tolerance;
    c.train.max_iterations = options->max_iterations;
    c.train.regularization_strength = options->regularization;
    c.ranker.depth = options->depth;
    c.ranker.threads = options->threads;
    auto report = std::make_unique<webprf_pipeline_report>();
    report->report = pipeline::run_pipeline(c);
    report->run_path = report->report.run_path.string();
    *out = report.release();
  });
}

const char* webprf_report_run_path(const webprf_pipeline_report* r) {
  return r ? r->run_path.c_str() : nullptr;
}
const char* webprf_report_run_tag(const webprf_pipeline_report* r) {
  return r ? r->report.run_tag.c_str() : nullptr;
}
size_t webprf_report_topics(const webprf_pipeline_report* r) { return r ? r->report.topics : 0; }
size_t webprf_report_training_texts(const webprf_pipeline_report* r) {
  return r ? r->report.training_texts : 0;
}
size_t webprf_report_vocabulary_size(const webprf_pipeline_report* r) {
  return r ? r->report.vocabulary_size : 0;
}
size_t webprf_report_corpus_documents(const webprf_pipeline_report* r) {
  return r ? r->report.corpus_documents : 0;
}
uint64_t webprf_report_corpus_hash(const webprf_pipeline_report* r) {
  return r ? r->report.corpus_vectors_hash : 0;
}
uint64_t webprf_report_training_hash(const webprf_pipeline_report* r) {
  return r ? r->report.training_vectors_hash : 0;
}
size_t webprf_report_warning_count(const webprf_pipeline_report* r) {
  return r ? r->report.warnings.size() : 0;
}
const char* webprf_report_warning(const webprf_pipeline_report* r, size_t i) {
  if (!r || i >= r->report.warnings.size()) return nullptr;
  return r->report.warnings[i].c_str();
}
size_t webprf_report_not_converged_count(const webprf_pipeline_report* r) {
  return r ? r->report.not_converged.size() : 0;
}
void webprf_pipeline_report_free(webprf_pipeline_report* report) { delete report; }

}  // extern "C"
