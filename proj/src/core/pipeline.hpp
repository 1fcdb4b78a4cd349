#pragma once

// Subcommand logic shared by the C API and the command-line tool: scraping
// into dated archives, the training/ranking pipeline and the report
// commands.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/classifier.hpp"
#include "core/collection_io.hpp"
#include "core/features.hpp"
#include "core/metrics.hpp"
#include "core/ranker.hpp"
#include "core/serp.hpp"

namespace webprf::pipeline {

// ".jsonl"/".json" means JSON lines, anything else TREC SGML.
io::TopicFormat topic_format_for(const std::filesystem::path& path);
io::TopicSet load_topics(const std::filesystem::path& path);
io::Qrels load_qrels(const std::filesystem::path& path);
io::Run load_run(const std::filesystem::path& path);
text::StopwordList load_stopwords(const std::filesystem::path& path);  // empty = English

// "serp_<engine>_<YYYY-MM-DD>.jsonl"
std::string archive_file_name(serp::Engine engine, serp::Timestamp when);

struct ScrapeConfig {
  std::filesystem::path topics_path;
  std::filesystem::path archive_dir;
  serp::Engine engine = serp::Engine::kGoogle;
  io::QueryFormulation query = io::QueryFormulation::kTitleOnly;
  std::string query_delimiter = " ";
  serp::SerpConfig serp;
  std::chrono::seconds http_timeout{30};
};

struct ScrapeFailure {
  std::string topic_id;
  std::string message;
  std::string raw_response_path;  // empty when nothing was received
};

struct ScrapeReport {
  std::filesystem::path archive_path;
  std::size_t added = 0;
  std::size_t skipped_existing = 0;
  std::vector<ScrapeFailure> failures;
};

// Appends one record per topic to the archive for today's date. Topics that
// already have a record with the same query in that archive are skipped.
// Failed topics are listed; raw failure responses are kept next to the
// archive under failed/.
ScrapeReport scrape(const ScrapeConfig& config, serp::HttpTransport& transport,
                    serp::RequestThrottle& throttle, serp::Timestamp now);
ScrapeReport scrape(const ScrapeConfig& config);

struct PipelineConfig {
  std::filesystem::path topics_path;
  std::filesystem::path corpus_path;
  std::vector<std::filesystem::path> archive_paths;
  std::filesystem::path output_dir;
  std::filesystem::path stopwords_path;  // empty = bundled English list

  serp::Engine engine = serp::Engine::kGoogle;
  io::QueryFormulation query = io::QueryFormulation::kTitleOnly;
  serp::TextMode mode = serp::TextMode::kSnippetOnly;
  std::string query_delimiter = " ";
  std::string collection = "collection";
  std::optional<std::string> snapshot_date;  // "YYYY-MM-DD"; default: first match
  std::string run_tag;                       // empty = derived

  bool merge_per_topic = false;
  bool write_svmlight = false;
  bool write_models = false;

  features::FeatureConfig features;
  classifier::TrainConfig train;
  ranker::RankerConfig ranker;  // run_tag is taken from above

  void validate() const;
};

// "{uwmrgx|uwmrg}_{collection}_{g|d}_{t|td}"
std::string derived_run_tag(const PipelineConfig& config);

struct PipelineReport {
  std::filesystem::path run_path;
  std::string run_tag;
  std::size_t topics = 0;
  std::size_t training_texts = 0;
  std::size_t dropped_empty_texts = 0;
  std::size_t dropped_zero_vectors = 0;
  std::size_t vocabulary_size = 0;
  std::size_t corpus_documents = 0;
  std::uint64_t corpus_vectors_hash = 0;
  std::uint64_t training_vectors_hash = 0;
  std::vector<std::string> not_converged;
  std::vector<std::string> warnings;
};

// Errors carry the stage name and, where there is one, the topic id.
PipelineReport run_pipeline(const PipelineConfig& config);

std::string evaluate_files(const std::filesystem::path& run, const std::filesystem::path& qrels,
                           const metrics::MetricConfig& config);

struct CompareInputs {
  std::filesystem::path original;
  std::filesystem::path reproduced;
  std::filesystem::path qrels;
  std::filesystem::path original_baseline;    // optional
  std::filesystem::path reproduced_baseline;  // optional
};

std::string compare_files(const CompareInputs& inputs, const metrics::MetricConfig& config);

struct DriftOutput {
  std::string csv;
  std::vector<std::string> warnings;
};

DriftOutput drift_files(const std::vector<std::filesystem::path>& archives, double rbo_p);

}  // namespace webprf::pipeline
