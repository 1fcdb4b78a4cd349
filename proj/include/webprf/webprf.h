#ifndef WEBPRF_WEBPRF_H
#define WEBPRF_WEBPRF_H

/* C interface of libwebprf. Every function returning webprf_status leaves a
 * message for webprf_last_error() on failure (per thread). Strings handed
 * out through char** parameters are freed with webprf_string_free; handles
 * with their matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WEBPRF_API __declspec(dllexport)
#elif defined(WEBPRF_BUILDING_LIBRARY)
#define WEBPRF_API __attribute__((visibility("default")))
#else
#define WEBPRF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum webprf_status {
  WEBPRF_OK = 0,
  WEBPRF_E_PARSE = 1,
  WEBPRF_E_VALIDATION = 2,
  WEBPRF_E_IO = 3,
  WEBPRF_E_FETCH = 4,
  WEBPRF_E_TRAINING = 5,
  WEBPRF_E_CONFIG = 6,
  WEBPRF_E_UNDEFINED = 7,
  WEBPRF_E_ARGUMENT = 20,
  WEBPRF_E_INTERNAL = 21
} webprf_status;

typedef enum webprf_engine { WEBPRF_ENGINE_GOOGLE = 0, WEBPRF_ENGINE_DUCKDUCKGO = 1 } webprf_engine;
typedef enum webprf_query { WEBPRF_QUERY_TITLE = 0, WEBPRF_QUERY_TITLE_DESC = 1 } webprf_query;
typedef enum webprf_mode { WEBPRF_MODE_SNIPPET = 0, WEBPRF_MODE_FULLPAGE = 1 } webprf_mode;

WEBPRF_API const char* webprf_version(void);
WEBPRF_API const char* webprf_last_error(void);
WEBPRF_API const char* webprf_status_name(webprf_status status);
WEBPRF_API void webprf_string_free(char* s);

/* "google"/"duckduckgo", "t"/"td", "snippet"/"fullpage" */
WEBPRF_API webprf_status webprf_parse_engine(const char* name, webprf_engine* out);
WEBPRF_API webprf_status webprf_parse_query(const char* code, webprf_query* out);
WEBPRF_API webprf_status webprf_parse_mode(const char* name, webprf_mode* out);

/* ------------------------------------------------------------ collections */

typedef struct webprf_topics webprf_topics;
typedef struct webprf_qrels webprf_qrels;
typedef struct webprf_run webprf_run;
typedef struct webprf_archive webprf_archive;

/* ".jsonl"/".json" files are JSON lines, anything else TREC SGML. */
WEBPRF_API webprf_status webprf_topics_load(const char* path, webprf_topics** out);
WEBPRF_API size_t webprf_topics_count(const webprf_topics* topics);
/* NULL when index is out of range. Valid until the handle is freed. */
WEBPRF_API const char* webprf_topics_id(const webprf_topics* topics, size_t index);
WEBPRF_API webprf_status webprf_topics_query(const webprf_topics* topics, size_t index,
                                             webprf_query query, const char* delimiter,
                                             char** out);
WEBPRF_API void webprf_topics_free(webprf_topics* topics);

WEBPRF_API webprf_status webprf_qrels_load(const char* path, webprf_qrels** out);
WEBPRF_API int webprf_qrels_grade(const webprf_qrels* qrels, const char* topic_id,
                                  const char* doc_id);
WEBPRF_API void webprf_qrels_free(webprf_qrels* qrels);

WEBPRF_API webprf_status webprf_run_load(const char* path, webprf_run** out);
WEBPRF_API webprf_status webprf_run_parse(const char* text, size_t length, webprf_run** out);
WEBPRF_API const char* webprf_run_tag(const webprf_run* run);
WEBPRF_API size_t webprf_run_topic_count(const webprf_run* run);
WEBPRF_API webprf_status webprf_run_write(const webprf_run* run, char** out);
WEBPRF_API void webprf_run_free(webprf_run* run);

WEBPRF_API webprf_status webprf_archive_load(const char* path, webprf_archive** out);
WEBPRF_API size_t webprf_archive_count(const webprf_archive* archive);
WEBPRF_API webprf_status webprf_archive_write(const webprf_archive* archive, char** out);
WEBPRF_API void webprf_archive_free(webprf_archive* archive);

/* ------------------------------------------------------------ measures */

typedef struct webprf_metric_options {
  size_t ndcg_depth;   /* 1000 */
  size_t precision_k;  /* 10 */
  double rbo_p;        /* 0.8 */
  double alpha;        /* 0.05 */
  size_t cutoffs[8];   /* KTU/RBO/RMSE cutoffs, ascending; 10, 100, 1000 */
  size_t cutoff_count;
} webprf_metric_options;

WEBPRF_API void webprf_metric_options_init(webprf_metric_options* options);

/* CSV "measure,cutoff,topic,value" */
WEBPRF_API webprf_status webprf_evaluate(const webprf_run* run, const webprf_qrels* qrels,
                                         const webprf_metric_options* options, char** csv);
/* CSV "run_pair,measure,value,p_value". The baselines are optional (both or
 * neither); with them ER and DRI rows are added. */
WEBPRF_API webprf_status webprf_compare(const webprf_run* original, const webprf_run* reproduced,
                                        const webprf_qrels* qrels,
                                        const webprf_run* original_baseline,
                                        const webprf_run* reproduced_baseline,
                                        const webprf_metric_options* options, char** csv);
/* CSV "date,mean_rbo,mean_intersection" over the records of all archives.
 * Warnings, one per line, go to *warnings when it is not NULL. */
WEBPRF_API webprf_status webprf_drift(const webprf_archive* const* archives, size_t count,
                                      double rbo_p, char** csv, char** warnings);

WEBPRF_API webprf_status webprf_rbo(const char* const* a, size_t a_len, const char* const* b,
                                    size_t b_len, double p, size_t depth, double* out);
/* *defined = 0 when the value is undefined. */
WEBPRF_API webprf_status webprf_ktu(const char* const* a, size_t a_len, const char* const* b,
                                    size_t b_len, size_t depth, double* out, int* defined);
WEBPRF_API webprf_status webprf_effect_ratio(double orig_base, double orig_adv, double rep_base,
                                             double rep_adv, double* out, int* defined);
WEBPRF_API webprf_status webprf_delta_relative_improvement(double orig_base, double orig_adv,
                                                           double rep_base, double rep_adv,
                                                           double* out);

/* ------------------------------------------------------------ scraping */

typedef struct webprf_http_response webprf_http_response;

WEBPRF_API void webprf_http_response_set(webprf_http_response* response, int status,
                                         const char* content_type, const char* body,
                                         size_t body_length);

/* Return 0 after filling the response, nonzero on a network failure. */
typedef int (*webprf_http_get_fn)(void* user_data, const char* url,
                                  webprf_http_response* response);

typedef struct webprf_scrape_options {
  const char* topics_path;
  const char* archive_dir;
  webprf_engine engine;
  webprf_query query;
  const char* query_delimiter; /* " " */
  webprf_mode mode;
  size_t max_results;          /* 10 */
  uint32_t request_delay_ms;   /* 2000 */
  const char* language_code;   /* "en" */
  const char* user_agent;      /* NULL = built-in */
  size_t page_concurrency;     /* 4 */
  uint32_t timeout_seconds;    /* 30 */
  int64_t now_unix;            /* 0 = current time */
  webprf_http_get_fn http_get; /* NULL = built-in HTTP client */
  void* http_user_data;
} webprf_scrape_options;

typedef struct webprf_scrape_report webprf_scrape_report;

WEBPRF_API void webprf_scrape_options_init(webprf_scrape_options* options);
/* Returns WEBPRF_OK even when some topics failed; check the failure count. */
WEBPRF_API webprf_status webprf_scrape(const webprf_scrape_options* options,
                                       webprf_scrape_report** out);
WEBPRF_API const char* webprf_scrape_archive_path(const webprf_scrape_report* report);
WEBPRF_API size_t webprf_scrape_added(const webprf_scrape_report* report);
WEBPRF_API size_t webprf_scrape_skipped(const webprf_scrape_report* report);
WEBPRF_API size_t webprf_scrape_failure_count(const webprf_scrape_report* report);
WEBPRF_API const char* webprf_scrape_failure_topic(const webprf_scrape_report* report, size_t i);
WEBPRF_API const char* webprf_scrape_failure_message(const webprf_scrape_report* report, size_t i);
WEBPRF_API void webprf_scrape_report_free(webprf_scrape_report* report);

/* ------------------------------------------------------------ pipeline */

typedef struct webprf_pipeline_options {
  const char* topics_path;
  const char* corpus_path;
  const char* const* archive_paths;
  size_t archive_count;
  const char* output_dir;
  const char* stopwords_path;  /* NULL = bundled English list */
  webprf_engine engine;
  webprf_query query;
  webprf_mode mode;
  const char* query_delimiter; /* " " */
  const char* collection;      /* "collection" */
  const char* snapshot_date;   /* NULL = first matching record */
  const char* run_tag;         /* NULL = derived */
  int merge_per_topic;
  int write_svmlight;
  int write_models;
  int sublinear_tf;            /* 1 */
  int smooth_idf;              /* 1 */
  double tolerance;            /* 1e-4 */
  uint32_t max_iterations;     /* 200000 */
  double regularization;       /* C = 1 */
  size_t depth;                /* 10000 */
  size_t threads;              /* 0 = hardware */
} webprf_pipeline_options;

typedef struct webprf_pipeline_report webprf_pipeline_report;

WEBPRF_API void webprf_pipeline_options_init(webprf_pipeline_options* options);
WEBPRF_API webprf_status webprf_pipeline_run(const webprf_pipeline_options* options,
                                             webprf_pipeline_report** out);
WEBPRF_API const char* webprf_report_run_path(const webprf_pipeline_report* report);
WEBPRF_API const char* webprf_report_run_tag(const webprf_pipeline_report* report);
WEBPRF_API size_t webprf_report_topics(const webprf_pipeline_report* report);
WEBPRF_API size_t webprf_report_training_texts(const webprf_pipeline_report* report);
WEBPRF_API size_t webprf_report_vocabulary_size(const webprf_pipeline_report* report);
WEBPRF_API size_t webprf_report_corpus_documents(const webprf_pipeline_report* report);
WEBPRF_API uint64_t webprf_report_corpus_hash(const webprf_pipeline_report* report);
WEBPRF_API uint64_t webprf_report_training_hash(const webprf_pipeline_report* report);
WEBPRF_API size_t webprf_report_warning_count(const webprf_pipeline_report* report);
WEBPRF_API const char* webprf_report_warning(const webprf_pipeline_report* report, size_t i);
WEBPRF_API size_t webprf_report_not_converged_count(const webprf_pipeline_report* report);
WEBPRF_API void webprf_pipeline_report_free(webprf_pipeline_report* report);

#ifdef __cplusplus
}
#endif

#endif
