#pragma once

// tf-idf term-document model fitted on web texts and reused for corpus
// documents; one-vs-rest training sets; SVMlight files.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/textprep.hpp"

namespace webprf::features {

struct FeatureConfig {
  bool sublinear_tf = true;  // 1 + ln(c) instead of c
  bool smooth_idf = true;    // ln((1+N)/(1+df)) + 1 instead of ln(N/df) + 1
};

class TermDocModel {
 public:
  TermDocModel() = default;

  std::size_t vocabulary_size() const noexcept { return terms_.size(); }
  std::size_t n_docs() const noexcept { return n_docs_; }
  const FeatureConfig& config() const noexcept { return config_; }

  // -1 when the term is out of vocabulary.
  std::int64_t index_of(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_[index]; }
  std::uint32_t doc_freq(std::size_t index) const { return doc_freq_[index]; }
  double idf(std::size_t index) const { return idf_[index]; }

  // Rebuilds a model from persisted (term, df) pairs in index order.
  static TermDocModel from_parts(std::vector<std::string> terms, std::vector<std::uint32_t> df,
                                 std::size_t n_docs, FeatureConfig config);

  bool operator==(const TermDocModel& other) const {
    return terms_ == other.terms_ && doc_freq_ == other.doc_freq_ && n_docs_ == other.n_docs_ &&
           config_.sublinear_tf == other.config_.sublinear_tf &&
           config_.smooth_idf == other.config_.smooth_idf;
  }

 private:
  friend TermDocModel fit(const std::vector<text::TermSequence>&, FeatureConfig);
  void compute_idf();

  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::uint32_t> doc_freq_;
  std::vector<double> idf_;
  std::size_t n_docs_ = 0;
  FeatureConfig config_;
};

// Vocabulary in first-occurrence order. Throws when every sequence is empty.
TermDocModel fit(const std::vector<text::TermSequence>& docs, FeatureConfig config = {});

struct SparseEntry {
  std::uint32_t index = 0;
  double weight = 0.0;
  bool operator==(const SparseEntry&) const = default;
};

// Indices strictly increasing, weights non-zero.
struct SparseVector {
  std::vector<SparseEntry> entries;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  double norm() const;
  double dot(std::span<const double> dense) const;
  double dot(const SparseVector& other) const;
  // Throws ValidationError unless the vector is well formed for dimension dim.
  void validate(std::size_t dim) const;

  bool operator==(const SparseVector&) const = default;
};

// Weights (1 + ln c) * idf for in-vocabulary terms, then L2-normalized.
// No overlap with the vocabulary gives the empty vector.
SparseVector transform(const TermDocModel& model, const text::TermSequence& terms);

struct LabeledSet {
  std::string topic_id;
  std::vector<SparseVector> positives;
  std::vector<SparseVector> negatives;
};

struct TopicSample {
  std::string topic_id;
  text::TermSequence terms;
};

struct AssembledTraining {
  std::vector<LabeledSet> sets;  // topics in first-appearance order
  std::size_t dropped_zero = 0;  // samples whose vector was empty
};

// One-vs-rest: a topic's own texts are positives, every other topic's texts
// negatives. Needs at least two distinct topics.
AssembledTraining assemble_training(const std::vector<TopicSample>& samples,
                                    const TermDocModel& model);

// Shared pool of transformed samples; per-topic label views are built from
// it without copying vectors.
struct SamplePool {
  std::vector<std::string> topics;         // distinct topics, first-appearance order
  std::vector<SparseVector> vectors;       // non-empty vectors only
  std::vector<std::size_t> topic_of;       // index into topics per vector
  std::size_t dropped_zero = 0;
};

SamplePool build_pool(const std::vector<TopicSample>& samples, const TermDocModel& model);
LabeledSet labeled_set(const SamplePool& pool, std::size_t topic);

struct LabeledVector {
  int label = 0;  // +1 / -1
  SparseVector vector;
  bool operator==(const LabeledVector&) const = default;
};

// "+1 1:0.5 4:0.25": label, then 1-based ascending index:value pairs.
void write_svmlight(const LabeledSet& set, std::ostream& out);
std::vector<LabeledVector> read_svmlight(std::istream& in);

// Header line {"format","n_docs","vocab_size","sublinear_tf","smooth_idf"}
// followed by one {"term","index","df"} line per vocabulary entry.
void write_model(const TermDocModel& model, std::ostream& out);
TermDocModel read_model(std::istream& in);

// FNV-1a over indices and weight bit patterns; equal hashes for equal
// vector sequences.
std::uint64_t hash_vectors(std::span<const SparseVector> vectors);

}  // namespace webprf::features
