// webprf: command-line front end over libwebprf.

#include <webprf/webprf.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

struct CStr {
  char* p = nullptr;
  ~CStr() { webprf_string_free(p); }
};

int fail(webprf_status st) {
  std::cerr << "webprf: " << webprf_status_name(st) << ": " << webprf_last_error() << "\n";
  return 1;
}

// Writes to path, or stdout for "" / "-".
bool emit(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return std::fflush(stdout) == 0;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "webprf: cannot write " << path << "\n";
    return false;
  }
  return true;
}

template <typename T, typename Fn>
std::unique_ptr<T, void (*)(T*)> load(const std::string& path, Fn loader, void (*deleter)(T*),
                                      webprf_status& st) {
  T* h = nullptr;
  st = loader(path.c_str(), &h);
  return {h, deleter};
}

struct Common {
  std::string engine = "google";
  std::string query = "t";
  std::string mode = "snippet";
  std::string delimiter = " ";
};

webprf_status resolve(const Common& c, webprf_engine& e, webprf_query& q, webprf_mode& m) {
  webprf_status st = webprf_parse_engine(c.engine.c_str(), &e);
  if (st == WEBPRF_OK) st = webprf_parse_query(c.query.c_str(), &q);
  if (st == WEBPRF_OK) st = webprf_parse_mode(c.mode.c_str(), &m);
  return st;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--engine", c.engine, "google or duckduckgo")
      ->check(CLI::IsMember({"google", "duckduckgo"}))
      ->capture_default_str();
  cmd->add_option("--query", c.query, "t (title) or td (title + description)")
      ->check(CLI::IsMember({"t", "td"}))
      ->capture_default_str();
  cmd->add_option("--mode", c.mode, "snippet or fullpage")
      ->check(CLI::IsMember({"snippet", "fullpage"}))
      ->capture_default_str();
  cmd->add_option("--query-delimiter", c.delimiter, "joins title and description");
}

struct MetricArgs {
  std::size_t ndcg_depth = 1000;
  std::size_t k = 10;
  double rbo_p = 0.8;
  double alpha = 0.05;
  std::vector<std::size_t> cutoffs = {10, 100, 1000};
};

void add_metric_args(CLI::App* cmd, MetricArgs& m) {
  cmd->add_option("--ndcg-depth", m.ndcg_depth)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--precision-k", m.k)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--rbo-p", m.rbo_p)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--alpha", m.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--cutoffs", m.cutoffs, "KTU/RBO/RMSE cutoffs")->delimiter(',')->expected(1, 8);
}

webprf_metric_options metric_options(const MetricArgs& m) {
  webprf_metric_options o;
  webprf_metric_options_init(&o);
  o.ndcg_depth = m.ndcg_depth;
  o.precision_k = m.k;
  o.rbo_p = m.rbo_p;
  o.alpha = m.alpha;
  o.cutoff_count = std::min<std::size_t>(m.cutoffs.size(), 8);
  for (std::size_t i = 0; i < o.cutoff_count; ++i) o.cutoffs[i] = m.cutoffs[i];
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Routing runs trained on search engine results, with run comparison reports"};
  app.set_config("--config", "", "INI file; command-line flags take precedence");
  app.set_version_flag("--version", std::string(webprf_version()));
  app.require_subcommand(1);

  // scrape
  Common sc;
  std::string sc_topics, sc_dir;
  std::size_t sc_max = 10, sc_pages = 4;
  unsigned sc_delay = 2000, sc_timeout = 30;
  std::string sc_lang = "en";
  auto* scrape = app.add_subcommand("scrape", "Query an engine for every topic into a dated archive");
  scrape->add_option("--topics", sc_topics, "topics file (SGML or .jsonl)")->required();
  scrape->add_option("--archive-dir", sc_dir, "directory of serp_<engine>_<date>.jsonl archives")->required();
  add_common(scrape, sc);
  scrape->add_option("--max-results", sc_max)->check(CLI::PositiveNumber)->capture_default_str();
  scrape->add_option("--delay-ms", sc_delay, "spacing between requests to one engine")->capture_default_str();
  scrape->add_option("--language", sc_lang)->capture_default_str();
  scrape->add_option("--page-concurrency", sc_pages)->check(CLI::PositiveNumber)->capture_default_str();
  scrape->add_option("--timeout", sc_timeout, "HTTP timeout in seconds")->capture_default_str();

  // pipeline
  Common pc;
  std::string p_topics, p_corpus, p_out, p_stop, p_collection = "collection", p_date, p_tag;
  std::vector<std::string> p_archives;
  std::size_t p_depth = 10000, p_threads = 0;
  double p_tol = 1e-4, p_c = 1.0;
  std::uint32_t p_iter = 200000;
  bool p_merge = false, p_svm = false, p_models = false, p_plain_tf = false, p_plain_idf = false;
  auto* pipe = app.add_subcommand("pipeline", "Train per-topic routing models on SERP text and rank the corpus");
  pipe->add_option("--topics", p_topics)->required();
  pipe->add_option("--corpus", p_corpus, "JSON lines {doc_id, body}")->required();
  pipe->add_option("--archive", p_archives, "SERP archive(s)")->required();
  pipe->add_option("--out", p_out, "output directory")->required();
  add_common(pipe, pc);
  pipe->add_option("--depth", p_depth)->check(CLI::Range(1, 10000))->capture_default_str();
  pipe->add_option("--stopwords", p_stop, "stopword file (default: bundled English list)");
  pipe->add_option("--collection", p_collection, "collection name used in the run tag")->capture_default_str();
  pipe->add_option("--date", p_date, "use the snapshot of this UTC date (YYYY-MM-DD)");
  pipe->add_option("--tag", p_tag, "run tag (default derived from mode, collection, engine, query)");
  pipe->add_option("--tolerance", p_tol)->capture_default_str();
  pipe->add_option("--max-iterations", p_iter)->capture_default_str();
  pipe->add_option("--C", p_c, "inverse regularization strength")->capture_default_str();
  pipe->add_option("--threads", p_threads, "0 = all cores")->capture_default_str();
  pipe->add_flag("--merge-per-topic", p_merge, "one training sample per topic");
  pipe->add_flag("--svmlight", p_svm, "also write per-topic SVMlight training files");
  pipe->add_flag("--save-models", p_models, "also write the term model and routing models");
  pipe->add_flag("--raw-tf", p_plain_tf, "raw counts instead of 1 + ln(c)");
  pipe->add_flag("--plain-idf", p_plain_idf, "ln(N/df) + 1 instead of the smoothed idf");

  // evaluate
  std::string e_run, e_qrels, e_out;
  MetricArgs em;
  auto* eval = app.add_subcommand("evaluate", "Per-topic and mean nDCG, AP and P@k as CSV");
  eval->add_option("--run", e_run)->required();
  eval->add_option("--qrels", e_qrels)->required();
  eval->add_option("-o,--output", e_out, "CSV path (default stdout)");
  add_metric_args(eval, em);

  // compare
  std::string c_orig, c_rep, c_qrels, c_obase, c_rbase, c_out;
  MetricArgs cm;
  auto* cmp = app.add_subcommand("compare", "KTU, RBO, RMSE, t-tests and ER/DRI between two runs");
  cmp->add_option("--original", c_orig)->required();
  cmp->add_option("--reproduced", c_rep)->required();
  cmp->add_option("--qrels", c_qrels)->required();
  cmp->add_option("--original-baseline", c_obase);
  cmp->add_option("--reproduced-baseline", c_rbase);
  cmp->add_option("-o,--output", c_out, "CSV path (default stdout)");
  add_metric_args(cmp, cm);

  // drift
  std::vector<std::string> d_archives;
  std::string d_out;
  double d_p = 0.8;
  auto* drift = app.add_subcommand("drift", "Day-by-day RBO and URL overlap against the first snapshot");
  drift->add_option("archives", d_archives, "SERP archives")->required();
  drift->add_option("--rbo-p", d_p)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  drift->add_option("-o,--output", d_out, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*scrape) {
    webprf_scrape_options o;
    webprf_scrape_options_init(&o);
    if (webprf_status st = resolve(sc, o.engine, o.query, o.mode); st != WEBPRF_OK) return fail(st);
    o.topics_path = sc_topics.c_str();
    o.archive_dir = sc_dir.c_str();
    o.query_delimiter = sc.delimiter.c_str();
    o.max_results = sc_max;
    o.request_delay_ms = sc_delay;
    o.language_code = sc_lang.c_str();
    o.page_concurrency = sc_pages;
    o.timeout_seconds = sc_timeout;
    const char* ua = std::getenv("WEBPRF_USER_AGENT");
    o.user_agent = ua && *ua ? ua : nullptr;
    webprf_scrape_report* r = nullptr;
    if (webprf_status st = webprf_scrape(&o, &r); st != WEBPRF_OK) return fail(st);
    std::unique_ptr<webprf_scrape_report, void (*)(webprf_scrape_report*)> guard(r, webprf_scrape_report_free);
    std::cerr << webprf_scrape_archive_path(r) << ": " << webprf_scrape_added(r) << " added, "
              << webprf_scrape_skipped(r) << " already present, " << webprf_scrape_failure_count(r)
              << " failed\n";
    for (std::size_t i = 0; i < webprf_scrape_failure_count(r); ++i)
      std::cerr << "  topic " << webprf_scrape_failure_topic(r, i) << ": "
                << webprf_scrape_failure_message(r, i) << "\n";
    return webprf_scrape_failure_count(r) == 0 ? 0 : 1;
  }

  if (*pipe) {
    webprf_pipeline_options o;
    webprf_pipeline_options_init(&o);
    if (webprf_status st = resolve(pc, o.engine, o.query, o.mode); st != WEBPRF_OK) return fail(st);
    std::vector<const char*> archives;
    for (const auto& a : p_archives) archives.push_back(a.c_str());
    o.topics_path = p_topics.c_str();
    o.corpus_path = p_corpus.c_str();
    o.archive_paths = archives.data();
    o.archive_count = archives.size();
    o.output_dir = p_out.c_str();
    o.stopwords_path = p_stop.empty() ? nullptr : p_stop.c_str();
    o.query_delimiter = pc.delimiter.c_str();
    o.collection = p_collection.c_str();
    o.snapshot_date = p_date.empty() ? nullptr : p_date.c_str();
    o.run_tag = p_tag.empty() ? nullptr : p_tag.c_str();
    o.merge_per_topic = p_merge;
    o.write_svmlight = p_svm;
    o.write_models = p_models;
    o.sublinear_tf = !p_plain_tf;
    o.smooth_idf = !p_plain_idf;
    o.tolerance = p_tol;
    o.max_iterations = p_iter;
    o.regularization = p_c;
    o.depth = p_depth;
    o.threads = p_threads;
    webprf_pipeline_report* r = nullptr;
    if (webprf_status st = webprf_pipeline_run(&o, &r); st != WEBPRF_OK) return fail(st);
    std::unique_ptr<webprf_pipeline_report, void (*)(webprf_pipeline_report*)> guard(r, webprf_pipeline_report_free);
    for (std::size_t i = 0; i < webprf_report_warning_count(r); ++i)
      std::cerr << "warning: " << webprf_report_warning(r, i) << "\n";
    if (std::size_t n = webprf_report_not_converged_count(r))
      std::cerr << "warning: " << n << " routing model(s) stopped at the iteration cap\n";
    std::cerr << webprf_report_run_tag(r) << ": " << webprf_report_topics(r) << " topics, "
              << webprf_report_training_texts(r) << " training texts, vocabulary "
              << webprf_report_vocabulary_size(r) << ", " << webprf_report_corpus_documents(r)
              << " documents\n";
    std::cout << webprf_report_run_path(r) << "\n";
    return 0;
  }

  if (*eval) {
    webprf_status st;
    auto run = load<webprf_run>(e_run, webprf_run_load, webprf_run_free, st);
    if (st != WEBPRF_OK) return fail(st);
    auto qrels = load<webprf_qrels>(e_qrels, webprf_qrels_load, webprf_qrels_free, st);
    if (st != WEBPRF_OK) return fail(st);
    auto opts = metric_options(em);
    CStr csv;
    if ((st = webprf_evaluate(run.get(), qrels.get(), &opts, &csv.p)) != WEBPRF_OK) return fail(st);
    return emit(e_out, csv.p) ? 0 : 1;
  }

  if (*cmp) {
    if (c_obase.empty() != c_rbase.empty()) {
      std::cerr << "webprf: --original-baseline and --reproduced-baseline go together\n";
      return 1;
    }
    webprf_status st;
    auto a = load<webprf_run>(c_orig, webprf_run_load, webprf_run_free, st);
    if (st != WEBPRF_OK) return fail(st);
    auto b = load<webprf_run>(c_rep, webprf_run_load, webprf_run_free, st);
    if (st != WEBPRF_OK) return fail(st);
    auto qrels = load<webprf_qrels>(c_qrels, webprf_qrels_load, webprf_qrels_free, st);
    if (st != WEBPRF_OK) return fail(st);
    std::unique_ptr<webprf_run, void (*)(webprf_run*)> ab(nullptr, webprf_run_free), bb(nullptr, webprf_run_free);
    if (!c_obase.empty()) {
      ab = load<webprf_run>(c_obase, webprf_run_load, webprf_run_free, st);
      if (st != WEBPRF_OK) return fail(st);
      bb = load<webprf_run>(c_rbase, webprf_run_load, webprf_run_free, st);
      if (st != WEBPRF_OK) return fail(st);
    }
    auto opts = metric_options(cm);
    CStr csv;
    if ((st = webprf_compare(a.get(), b.get(), qrels.get(), ab.get(), bb.get(), &opts, &csv.p)) != WEBPRF_OK)
      return fail(st);
    return emit(c_out, csv.p) ? 0 : 1;
  }

  if (*drift) {
    std::vector<std::unique_ptr<webprf_archive, void (*)(webprf_archive*)>> handles;
    std::vector<const webprf_archive*> ptrs;
    for (const auto& path : d_archives) {
      webprf_status st;
      handles.push_back(load<webprf_archive>(path, webprf_archive_load, webprf_archive_free, st));
      if (st != WEBPRF_OK) return fail(st);
      ptrs.push_back(handles.back().get());
    }
    CStr csv, warnings;
    if (webprf_status st = webprf_drift(ptrs.data(), ptrs.size(), d_p, &csv.p, &warnings.p); st != WEBPRF_OK)
      return fail(st);
    if (warnings.p && *warnings.p) std::cerr << warnings.p;
    return emit(d_out, csv.p) ? 0 : 1;
  }
  return 0;
}
