#include "core/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "core/error.hpp"
#include "core/strings.hpp"
#include "json.hpp"

namespace webprf::features {

void TermDocModel::compute_idf() {
  idf_.resize(terms_.size());
  const double n = static_cast<double>(n_docs_);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const double df = static_cast<double>(doc_freq_[i]);
    idf_[i] = config_.smooth_idf ? std::log((1.0 + n) / (1.0 + df)) + 1.0 : std::log(n / df) + 1.0;
  }
}

std::int64_t TermDocModel::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

TermDocModel TermDocModel::from_parts(std::vector<std::string> terms,
                                      std::vector<std::uint32_t> df, std::size_t n_docs,
                                      FeatureConfig config) {
  if (terms.size() != df.size()) throw ValidationError("term and df lists differ in length");
  TermDocModel m;
  m.terms_ = std::move(terms);
  m.doc_freq_ = std::move(df);
  m.n_docs_ = n_docs;
  m.config_ = config;
  for (std::size_t i = 0; i < m.terms_.size(); ++i) {
    if (m.doc_freq_[i] < 1 || m.doc_freq_[i] > n_docs)
      throw ValidationError("term '" + m.terms_[i] + "': df out of range");
    if (!m.index_.emplace(m.terms_[i], static_cast<std::uint32_t>(i)).second)
      throw ValidationError("duplicate vocabulary term '" + m.terms_[i] + "'");
  }
  m.compute_idf();
  return m;
}

TermDocModel fit(const std::vector<text::TermSequence>& docs, FeatureConfig config) {
  TermDocModel m;
  m.config_ = config;
  m.n_docs_ = docs.size();
  std::unordered_set<std::uint32_t> in_doc;
  for (const auto& doc : docs) {
    in_doc.clear();
    for (const auto& term : doc) {
      auto [it, inserted] = m.index_.emplace(term, static_cast<std::uint32_t>(m.terms_.size()));
      if (inserted) {
        m.terms_.push_back(term);
        m.doc_freq_.push_back(0);
      }
      if (in_doc.insert(it->second).second) ++m.doc_freq_[it->second];
    }
  }
  if (m.terms_.empty()) throw ValidationError("cannot fit a term model: all texts are empty");
  m.compute_idf();
  return m;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight * e.weight;
  return std::sqrt(s);
}

double SparseVector::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight * dense[e.index];
  return s;
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      s += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return s;
}

void SparseVector::validate(std::size_t dim) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.index >= dim)
      throw ValidationError("feature index " + std::to_string(e.index) + " outside dimension " +
                            std::to_string(dim));
    if (i > 0 && entries[i - 1].index >= e.index)
      throw ValidationError("feature indices must be strictly increasing");
    if (!std::isfinite(e.weight)) throw ValidationError("non-finite feature value");
    if (e.weight == 0.0) throw ValidationError("explicit zero feature value");
  }
}

SparseVector transform(const TermDocModel& model, const text::TermSequence& terms) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& t : terms) {
    auto idx = model.index_of(t);
    if (idx >= 0) ++counts[static_cast<std::uint32_t>(idx)];
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [idx, c] : counts) {
    double tf = model.config().sublinear_tf ? 1.0 + std::log(static_cast<double>(c))
                                            : static_cast<double>(c);
    double w = tf * model.idf(idx);
    v.entries.push_back(SparseEntry{idx, w});
    sq += w * w;
  }
  if (sq > 0.0) {
    double inv = 1.0 / std::sqrt(sq);
    for (auto& e : v.entries) e.weight *= inv;
  }
  return v;
}

SamplePool build_pool(const std::vector<TopicSample>& samples, const TermDocModel& model) {
  SamplePool pool;
  std::map<std::string, std::size_t> topic_index;
  for (const auto& s : samples) {
    auto [it, inserted] = topic_index.emplace(s.topic_id, pool.topics.size());
    if (inserted) pool.topics.push_back(s.topic_id);
    SparseVector v = transform(model, s.terms);
    if (v.empty()) {
      ++pool.dropped_zero;
      continue;
    }
    pool.vectors.push_back(std::move(v));
    pool.topic_of.push_back(it->second);
  }
  if (pool.topics.size() < 2)
    throw ValidationError("one-vs-rest training needs at least two topics, got " +
                          std::to_string(pool.topics.size()));
  return pool;
}

LabeledSet labeled_set(const SamplePool& pool, std::size_t topic) {
  LabeledSet set;
  set.topic_id = pool.topics.at(topic);
  for (std::size_t i = 0; i < pool.vectors.size(); ++i) {
    if (pool.topic_of[i] == topic) {
      set.positives.push_back(pool.vectors[i]);
    } else {
      set.negatives.push_back(pool.vectors[i]);
    }
  }
  return set;
}

AssembledTraining assemble_training(const std::vector<TopicSample>& samples,
                                    const TermDocModel& model) {
  SamplePool pool = build_pool(samples, model);
  AssembledTraining out;
  out.dropped_zero = pool.dropped_zero;
  for (std::size_t t = 0; t < pool.topics.size(); ++t) out.sets.push_back(labeled_set(pool, t));
  return out;
}

// ---------------------------------------------------------------- SVMlight

namespace {

void write_line(int label, const SparseVector& v, std::ostream& out) {
  std::string line = label > 0 ? "+1" : "-1";
  for (const auto& e : v.entries) {
    line += ' ';
    line += std::to_string(e.index + 1);
    line += ':';
    line += detail::shortest_double(e.weight);
  }
  line += '\n';
  out << line;
}

}  // namespace

void write_svmlight(const LabeledSet& set, std::ostream& out) {
  for (const auto& v : set.positives) write_line(+1, v, out);
  for (const auto& v : set.negatives) write_line(-1, v, out);
  if (!out) throw IoError("failed writing SVMlight data");
}

std::vector<LabeledVector> read_svmlight(std::istream& in) {
  std::vector<LabeledVector> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    auto label = detail::parse_number<double>(fields[0]);
    if (!label || (*label != 1.0 && *label != -1.0))
      throw ParseError(lineno, "label must be +1 or -1, got '" + std::string(fields[0]) + "'");
    LabeledVector lv;
    lv.label = *label > 0 ? 1 : -1;
    std::uint64_t previous = 0;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string_view f = fields[i];
      if (f.rfind("qid:", 0) == 0) continue;
      std::size_t colon = f.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(lineno, "expected index:value, got '" + std::string(f) + "'");
      auto idx = detail::parse_number<std::uint64_t>(f.substr(0, colon));
      auto val = detail::parse_number<double>(f.substr(colon + 1));
      if (!idx || *idx == 0 || *idx > 0xFFFFFFFFull)
        throw ParseError(lineno, "feature index must be a positive integer");
      if (!val || !std::isfinite(*val)) throw ParseError(lineno, "bad feature value");
      if (*idx <= previous) throw ParseError(lineno, "feature indices must be strictly ascending");
      previous = *idx;
      if (*val != 0.0)
        lv.vector.entries.push_back(SparseEntry{static_cast<std::uint32_t>(*idx - 1), *val});
    }
    out.push_back(std::move(lv));
  }
  return out;
}

// ---------------------------------------------------------------- model I/O

void write_model(const TermDocModel& model, std::ostream& out) {
  nlohmann::ordered_json header;
  header["format"] = "webprf-tfidf-v1";
  header["n_docs"] = model.n_docs();
  header["vocab_size"] = model.vocabulary_size();
  header["sublinear_tf"] = model.config().sublinear_tf;
  header["smooth_idf"] = model.config().smooth_idf;
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < model.vocabulary_size(); ++i) {
    nlohmann::ordered_json line;
    line["term"] = model.term(i);
    line["index"] = i;
    line["df"] = model.doc_freq(i);
    out << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  if (!out) throw IoError("failed writing term model");
}

TermDocModel read_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto parse = [&](const std::string& text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad JSON: ") + e.what());
    }
  };
  if (!std::getline(in, line)) throw ParseError("empty term model");
  ++lineno;
  auto header = parse(line);
  if (header.value("format", "") != "webprf-tfidf-v1")
    throw ParseError(lineno, "unsupported term model format");
  FeatureConfig config;
  std::size_t n_docs = 0, vocab = 0;
  try {
    config.sublinear_tf = header.at("sublinear_tf").get<bool>();
    config.smooth_idf = header.at("smooth_idf").get<bool>();
    n_docs = header.at("n_docs").get<std::size_t>();
    vocab = header.at("vocab_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(lineno, std::string("bad header: ") + e.what());
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  terms.reserve(vocab);
  df.reserve(vocab);
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto obj = parse(line);
    try {
      if (obj.at("index").get<std::size_t>() != terms.size())
        throw ParseError(lineno, "vocabulary indices must be contiguous");
      terms.push_back(obj.at("term").get<std::string>());
      df.push_back(obj.at("df").get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad vocabulary entry: ") + e.what());
    }
  }
  if (terms.size() != vocab) throw ParseError("vocab_size does not match the entries");
  return TermDocModel::from_parts(std::move(terms), std::move(df), n_docs, config);
}

std::uint64_t hash_vectors(std::span<const SparseVector> vectors) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ull;
    }
  };
  for (const auto& v : vectors) {
    mix(v.entries.size());
    for (const auto& e : v.entries) {
      mix(e.index);
      mix(std::bit_cast<std::uint64_t>(e.weight));
    }
  }
  return h;
}

}  // namespace webprf::features
