#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/classifier.hpp"
#include "core/collection_io.hpp"
#include "core/features.hpp"

namespace webprf::ranker {

struct RankerConfig {
  std::size_t depth = io::kMaxRunDepth;
  std::string run_tag = "webprf";
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Corpus documents transformed once with the shared web-text model.
struct CorpusVectors {
  std::size_t dim = 0;
  std::vector<std::string> doc_ids;
  std::vector<features::SparseVector> vectors;
};

// Per topic: documents by probability descending, ties by ascending doc id,
// truncated to depth. Selection keeps at most depth candidates per topic.
io::Run rank_collection(const std::vector<classifier::RoutingModel>& models,
                        const CorpusVectors& corpus, const RankerConfig& config);

}  // namespace webprf::ranker
