#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "core/error.hpp"
#include "core/strings.hpp"

namespace fs = std::filesystem;

namespace webprf::pipeline {

namespace {

std::ifstream open_input(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is not set");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  return in;
}

// Prefixes the message; keeps the error code.
[[noreturn]] void rethrow_in(const std::string& where) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIo, where + ": " + e.what());
  }
}

void write_file_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string safe_file_part(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_');
  return out;
}

}  // namespace

io::TopicFormat topic_format_for(const fs::path& path) {
  auto ext = detail::to_lower_ascii(path.extension().string());
  return ext == ".jsonl" || ext == ".json" ? io::TopicFormat::kJsonLines : io::TopicFormat::kTrecSgml;
}

io::TopicSet load_topics(const fs::path& path) {
  auto in = open_input(path, "topics file");
  try {
    return io::parse_topics(in, topic_format_for(path));
  } catch (...) {
    rethrow_in(path.string());
  }
}

io::Qrels load_qrels(const fs::path& path) {
  auto in = open_input(path, "qrels file");
  try {
    return io::parse_qrels(in);
  } catch (...) {
    rethrow_in(path.string());
  }
}

io::Run load_run(const fs::path& path) {
  auto in = open_input(path, "run file");
  try {
    return io::parse_run(in);
  } catch (...) {
    rethrow_in(path.string());
  }
}

text::StopwordList load_stopwords(const fs::path& path) {
  if (path.empty()) return text::StopwordList::english();
  auto in = open_input(path, "stopword file");
  return text::StopwordList::load(in, path.filename().string());
}

std::string archive_file_name(serp::Engine engine, serp::Timestamp when) {
  return "serp_" + std::string(serp::engine_name(engine)) + "_" + serp::format_date(when) + ".jsonl";
}

// ---------------------------------------------------------------- scrape

ScrapeReport scrape(const ScrapeConfig& config, serp::HttpTransport& transport,
                    serp::RequestThrottle& throttle, serp::Timestamp now) {
  config.serp.validate();
  io::TopicSet topics = load_topics(config.topics_path);
  if (config.archive_dir.empty()) throw ConfigError("archive directory is not set");
  fs::create_directories(config.archive_dir);

  ScrapeReport report;
  report.archive_path = config.archive_dir / archive_file_name(config.engine, now);

  std::set<std::pair<std::string, std::string>> existing;  // (topic, query)
  if (fs::exists(report.archive_path)) {
    for (const auto& r : serp::load_serp_archive_file(report.archive_path.string()))
      if (r.engine == config.engine) existing.emplace(r.topic_id, r.query);
  }

  std::ofstream out(report.archive_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + report.archive_path.string());

  for (const auto& topic : topics) {
    std::string query = io::render_query(topic, config.query, config.query_delimiter);
    if (existing.count({topic.id, query})) {
      ++report.skipped_existing;
      continue;
    }
    try {
      serp::SerpRecord rec = serp::fetch_serp(topic, config.query, config.engine, config.serp,
                                              transport, throttle, config.query_delimiter);
      rec.fetched_at = now;
      serp::write_serp_record(rec, out);
      out.flush();
      if (!out) throw IoError("write failed for " + report.archive_path.string());
      existing.emplace(topic.id, query);
      ++report.added;
    } catch (const serp::FetchError& e) {
      ScrapeFailure f{topic.id, e.what(), {}};
      if (!e.raw_response().empty()) {
        fs::path dir = config.archive_dir / "failed";
        fs::create_directories(dir);
        fs::path p = dir / (std::string(serp::engine_name(config.engine)) + "_" +
                            serp::format_date(now) + "_" + safe_file_part(topic.id) + ".html");
        std::ofstream raw(p, std::ios::binary | std::ios::trunc);
        raw << e.raw_response();
        if (raw) f.raw_response_path = p.string();
      }
      report.failures.push_back(std::move(f));
    } catch (const Error& e) {
      report.failures.push_back({topic.id, e.what(), {}});
    }
  }
  return report;
}

ScrapeReport scrape(const ScrapeConfig& config) {
  auto transport = serp::make_http_transport(config.http_timeout);
  serp::RequestThrottle throttle(config.serp.request_delay);
  auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return scrape(config, *transport, throttle, now);
}

// ---------------------------------------------------------------- pipeline

void PipelineConfig::validate() const {
  if (topics_path.empty()) throw ConfigError("topics path is not set");
  if (corpus_path.empty()) throw ConfigError("corpus path is not set");
  if (archive_paths.empty()) throw ConfigError("no SERP archive given");
  if (output_dir.empty()) throw ConfigError("output directory is not set");
  if (collection.empty() || std::any_of(collection.begin(), collection.end(), detail::is_space))
    throw ConfigError("collection name must be non-empty and contain no whitespace");
  if (snapshot_date) {
    // Round-trips through the timestamp parser to check the shape.
    serp::parse_timestamp(*snapshot_date + "T00:00:00Z");
  }
  train.validate();
  ranker::RankerConfig r = ranker;
  r.run_tag = derived_run_tag(*this);
  r.validate();
}

std::string derived_run_tag(const PipelineConfig& config) {
  if (!config.run_tag.empty()) return config.run_tag;
  return std::string(serp::run_prefix(config.mode)) + "_" + config.collection + "_" +
         serp::engine_initial(config.engine) + "_" + std::string(io::query_code(config.query));
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::clamp<std::size_t>(threads ? threads : std::thread::hardware_concurrency(), 1,
                                    std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  // First failure in index order, so the reported error is deterministic.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  for (const auto& p : {config.topics_path, config.corpus_path})
    if (!fs::exists(p)) throw IoError("missing input " + p.string());
  for (const auto& p : config.archive_paths)
    if (!fs::exists(p)) throw IoError("missing SERP archive " + p.string());

  PipelineReport report;
  report.run_tag = derived_run_tag(config);

  io::TopicSet topics;
  text::StopwordList stopwords;
  std::vector<serp::SerpRecord> selected;
  try {
    topics = load_topics(config.topics_path);
    stopwords = load_stopwords(config.stopwords_path);
    std::set<std::string> taken;
    for (const auto& path : config.archive_paths) {
      for (auto& rec : serp::load_serp_archive_file(path.string())) {
        if (rec.engine != config.engine) continue;
        const io::Topic* topic = topics.find(rec.topic_id);
        if (!topic) continue;
        if (rec.query != io::render_query(*topic, config.query, config.query_delimiter)) continue;
        if (config.snapshot_date && serp::format_date(rec.fetched_at) != *config.snapshot_date)
          continue;
        if (taken.insert(rec.topic_id).second) selected.push_back(std::move(rec));
      }
    }
    for (const auto& t : topics)
      if (!taken.count(t.id)) report.warnings.push_back("topic " + t.id + ": no matching SERP record");
  } catch (...) {
    rethrow_in("stage load");
  }
  // Topic-file order, independent of archive order.
  std::stable_sort(selected.begin(), selected.end(), [&](const auto& a, const auto& b) {
    return topics.find(a.topic_id) - topics.topics().data() <
           topics.find(b.topic_id) - topics.topics().data();
  });

  std::vector<features::TopicSample> samples;
  try {
    serp::TopicTexts texts = serp::build_topic_texts(selected, config.mode);
    report.dropped_empty_texts = texts.dropped_empty;
    if (texts.skipped_non_html)
      report.warnings.push_back(std::to_string(texts.skipped_non_html) + " non-HTML pages skipped");
    auto training = config.merge_per_topic ? serp::merge_per_topic(texts.texts) : texts.texts;
    for (auto& t : training) {
      auto terms = text::preprocess(t.text, stopwords);
      if (terms.empty()) {
        ++report.dropped_empty_texts;
        continue;
      }
      samples.push_back({t.topic_id, std::move(terms)});
    }
    report.training_texts = samples.size();
  } catch (...) {
    rethrow_in("stage texts");
  }

  features::TermDocModel model;
  features::SamplePool pool;
  try {
    std::vector<text::TermSequence> docs;
    docs.reserve(samples.size());
    for (const auto& s : samples) docs.push_back(s.terms);
    model = features::fit(docs, config.features);
    pool = features::build_pool(samples, model);
  } catch (...) {
    rethrow_in("stage features");
  }
  report.vocabulary_size = model.vocabulary_size();
  report.dropped_zero_vectors = pool.dropped_zero;
  report.topics = pool.topics.size();
  report.training_vectors_hash = features::hash_vectors(pool.vectors);

  fs::create_directories(config.output_dir);
  if (config.write_svmlight || config.write_models) {
    std::ostringstream m;
    features::write_model(model, m);
    write_file_atomically(config.output_dir / (report.run_tag + ".tfidf.jsonl"), m.str());
  }

  std::vector<classifier::RoutingModel> models(pool.topics.size());
  parallel_for(pool.topics.size(), config.ranker.threads, [&](std::size_t t) {
    const std::string& topic = pool.topics[t];
    try {
      features::LabeledSet set = features::labeled_set(pool, t);
      if (config.write_svmlight) {
        fs::path dir = config.output_dir / "svmlight";
        fs::create_directories(dir);
        std::ostringstream s;
        features::write_svmlight(set, s);
        write_file_atomically(dir / (safe_file_part(topic) + ".svm"), s.str());
      }
      models[t] = classifier::train(set, model.vocabulary_size(), config.train);
      if (config.write_models) {
        fs::path dir = config.output_dir / "models";
        fs::create_directories(dir);
        std::ostringstream s;
        classifier::write_routing_model(models[t], s);
        write_file_atomically(dir / (safe_file_part(topic) + ".model"), s.str());
      }
    } catch (...) {
      rethrow_in("stage train, topic " + topic);
    }
  });
  for (const auto& m : models)
    if (!m.converged) report.not_converged.push_back(m.topic_id);

  ranker::CorpusVectors corpus;
  corpus.dim = model.vocabulary_size();
  try {
    auto in = open_input(config.corpus_path, "corpus");
    io::CorpusReader reader(in);
    io::Document doc;
    std::vector<io::Document> batch;
    auto flush = [&] {
      std::vector<features::SparseVector> vecs(batch.size());
      parallel_for(batch.size(), config.ranker.threads, [&](std::size_t i) {
        vecs[i] = features::transform(model, text::preprocess(batch[i].body, stopwords));
      });
      for (std::size_t i = 0; i < batch.size(); ++i) {
        corpus.doc_ids.push_back(std::move(batch[i].doc_id));
        corpus.vectors.push_back(std::move(vecs[i]));
      }
      batch.clear();
    };
    while (reader.next(doc)) {
      batch.push_back(std::move(doc));
      if (batch.size() == 4096) flush();
    }
    flush();
  } catch (...) {
    rethrow_in("stage corpus");
  }
  report.corpus_documents = corpus.doc_ids.size();
  report.corpus_vectors_hash = features::hash_vectors(corpus.vectors);

  io::Run run;
  try {
    ranker::RankerConfig rc = config.ranker;
    rc.run_tag = report.run_tag;
    run = ranker::rank_collection(models, corpus, rc);
  } catch (...) {
    rethrow_in("stage rank");
  }

  report.run_path = config.output_dir / (report.run_tag + ".run");
  try {
    std::ostringstream s;
    io::write_run(run, s);
    write_file_atomically(report.run_path, s.str());
  } catch (...) {
    rethrow_in("stage write");
  }
  return report;
}

// ---------------------------------------------------------------- reports

std::string evaluate_files(const fs::path& run, const fs::path& qrels,
                           const metrics::MetricConfig& config) {
  io::Run r = load_run(run);
  io::Qrels q = load_qrels(qrels);
  std::ostringstream out;
  metrics::write_evaluation_csv(metrics::evaluate(r, q, config), out);
  return out.str();
}

std::string compare_files(const CompareInputs& inputs, const metrics::MetricConfig& config) {
  io::Run a = load_run(inputs.original);
  io::Run b = load_run(inputs.reproduced);
  io::Qrels q = load_qrels(inputs.qrels);
  if (inputs.original_baseline.empty() != inputs.reproduced_baseline.empty())
    throw ConfigError("ER/DRI need both baseline runs");
  std::optional<io::Run> ab, bb;
  metrics::BaselinePair base;
  if (!inputs.original_baseline.empty()) {
    ab = load_run(inputs.original_baseline);
    bb = load_run(inputs.reproduced_baseline);
    base = {&*ab, &*bb};
  }
  std::ostringstream out;
  metrics::write_comparison_csv(metrics::compare(a, b, q, config, base), out);
  return out.str();
}

DriftOutput drift_files(const std::vector<fs::path>& archives, double rbo_p) {
  std::vector<serp::SerpRecord> all;
  for (const auto& p : archives) {
    if (!fs::exists(p)) throw IoError("missing SERP archive " + p.string());
    try {
      auto recs = serp::load_serp_archive_file(p.string());
      std::move(recs.begin(), recs.end(), std::back_inserter(all));
    } catch (...) {
      rethrow_in(p.string());
    }
  }
  metrics::DriftTable table = metrics::drift_analysis(all, rbo_p);
  std::ostringstream out;
  metrics::write_drift_csv(table, out);
  return {out.str(), table.warnings};
}

}  // namespace webprf::pipeline
