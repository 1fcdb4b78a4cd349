#include "core/ranker.hpp"

#include <algorithm>
#include <atomic>
#include <queue>
#include <thread>
#include <unordered_set>

#include "core/error.hpp"
#include "core/strings.hpp"

namespace webprf::ranker {

void RankerConfig::validate() const {
  if (depth < 1) throw ConfigError("depth must be >= 1");
  if (depth > io::kMaxRunDepth)
    throw ConfigError("depth must be <= " + std::to_string(io::kMaxRunDepth));
  if (run_tag.empty() || std::any_of(run_tag.begin(), run_tag.end(), detail::is_space))
    throw ConfigError("run tag must be non-empty and contain no whitespace");
}

namespace {

struct Candidate {
  double score;
  std::size_t doc;
};

std::vector<io::RunEntry> rank_topic(const classifier::RoutingModel& model,
                                     const CorpusVectors& corpus, std::size_t depth) {
  // "better" = higher score, then smaller doc id.
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return corpus.doc_ids[a.doc] < corpus.doc_ids[b.doc];
  };
  // Max-heap on "worse", so top() is the weakest kept candidate.
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(better)> heap(better);
  for (std::size_t i = 0; i < corpus.vectors.size(); ++i) {
    Candidate c{classifier::predict_probability(model, corpus.vectors[i]), i};
    if (heap.size() < depth) {
      heap.push(c);
    } else if (better(c, heap.top())) {
      heap.pop();
      heap.push(c);
    }
  }
  std::vector<Candidate> kept;
  kept.reserve(heap.size());
  while (!heap.empty()) {
    kept.push_back(heap.top());
    heap.pop();
  }
  std::sort(kept.begin(), kept.end(), better);
  std::vector<io::RunEntry> entries;
  entries.reserve(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r)
    entries.push_back(io::RunEntry{corpus.doc_ids[kept[r].doc],
                                   static_cast<std::uint32_t>(r + 1), kept[r].score});
  return entries;
}

}  // namespace

io::Run rank_collection(const std::vector<classifier::RoutingModel>& models,
                        const CorpusVectors& corpus, const RankerConfig& config) {
  config.validate();
  if (corpus.doc_ids.size() != corpus.vectors.size())
    throw ValidationError("corpus ids and vectors differ in length");
  {
    std::unordered_set<std::string_view> ids;
    for (const auto& id : corpus.doc_ids)
      if (!ids.insert(id).second) throw ValidationError("duplicate corpus doc id " + id);
  }
  for (const auto& m : models) {
    if (m.weights.size() != corpus.dim)
      throw ValidationError("topic " + m.topic_id + ": model dimension " +
                            std::to_string(m.weights.size()) + " does not match the corpus space " +
                            std::to_string(corpus.dim));
  }
  for (const auto& v : corpus.vectors)
    for (const auto& e : v.entries)
      if (e.index >= corpus.dim) throw ValidationError("corpus vector index outside the space");

  std::vector<std::vector<io::RunEntry>> rankings(models.size());
  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, models.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < models.size(); t = next++)
      rankings[t] = rank_topic(models[t], corpus, config.depth);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  io::Run run;
  run.tag = config.run_tag;
  for (std::size_t t = 0; t < models.size(); ++t) {
    if (!run.topics.emplace(models[t].topic_id, std::move(rankings[t])).second)
      throw ValidationError("two routing models for topic " + models[t].topic_id);
  }
  return run;
}

}  // namespace webprf::ranker
