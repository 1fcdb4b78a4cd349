#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"
#include "core/strings.hpp"

namespace webprf::metrics {

void MetricConfig::validate() const {
  if (ndcg_depth < 1) throw ConfigError("ndcg depth must be >= 1");
  if (precision_k < 1) throw ConfigError("precision cutoff must be >= 1");
  if (!(rbo_p > 0.0 && rbo_p < 1.0)) throw ConfigError("rbo p must lie in (0, 1)");
  for (const auto* depths : {&ktu_depths, &rbo_depths, &rmse_depths}) {
    for (std::size_t i = 0; i < depths->size(); ++i) {
      if ((*depths)[i] < 1) throw ConfigError("cutoffs must be positive");
      if (i > 0 && (*depths)[i] <= (*depths)[i - 1]) throw ConfigError("cutoffs must ascend");
    }
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

double TopicScores::mean() const {
  if (scores.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [t, v] : scores) s += v;
  return s / static_cast<double>(scores.size());
}

std::string format_value(double v) { return detail::shortest_double(v); }

// ---------------------------------------------------------------- effectiveness

double ndcg_of(std::span<const int> ranked_grades, std::vector<int> all_grades,
               std::size_t depth) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(depth, ranked_grades.size()); ++i)
    dcg += ranked_grades[i] / std::log2(static_cast<double>(i) + 2.0);
  std::sort(all_grades.begin(), all_grades.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(depth, all_grades.size()); ++i)
    idcg += all_grades[i] / std::log2(static_cast<double>(i) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double average_precision_of(std::span<const int> ranked_grades, std::size_t total_relevant) {
  if (total_relevant == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked_grades.size(); ++i) {
    if (ranked_grades[i] >= 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

namespace {

std::vector<int> ranked_grades(const io::Qrels& qrels, const std::string& topic,
                               const std::vector<io::RunEntry>& entries) {
  std::vector<int> g;
  g.reserve(entries.size());
  for (const auto& e : entries) g.push_back(qrels.grade(topic, e.doc_id));
  return g;
}

}  // namespace

TopicScores ndcg(const io::Run& run, const io::Qrels& qrels, std::size_t depth) {
  if (depth < 1) throw ConfigError("nDCG depth must be >= 1");
  TopicScores out;
  for (const auto& [topic, entries] : run.topics) {
    if (!qrels.has_topic(topic)) {
      out.skipped.push_back(topic + ": no judgments");
      continue;
    }
    auto all = qrels.grades(topic);
    if (std::none_of(all.begin(), all.end(), [](int g) { return g > 0; })) {
      out.skipped.push_back(topic + ": ideal DCG is 0");
      continue;
    }
    out.scores[topic] = ndcg_of(ranked_grades(qrels, topic, entries), std::move(all), depth);
  }
  return out;
}

TopicScores average_precision(const io::Run& run, const io::Qrels& qrels) {
  TopicScores out;
  for (const auto& [topic, entries] : run.topics) {
    if (!qrels.has_topic(topic)) {
      out.skipped.push_back(topic + ": no judgments");
      continue;
    }
    out.scores[topic] =
        average_precision_of(ranked_grades(qrels, topic, entries), qrels.relevant_count(topic));
  }
  return out;
}

TopicScores precision_at_k(const io::Run& run, const io::Qrels& qrels, std::size_t k) {
  if (k < 1) throw ConfigError("precision cutoff must be >= 1");
  TopicScores out;
  for (const auto& [topic, entries] : run.topics) {
    if (!qrels.has_topic(topic)) {
      out.skipped.push_back(topic + ": no judgments");
      continue;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, entries.size()); ++i)
      hits += qrels.grade(topic, entries[i].doc_id) >= 1;
    out.scores[topic] = static_cast<double>(hits) / static_cast<double>(k);
  }
  return out;
}

// ---------------------------------------------------------------- ranking similarity

namespace {

void require_unique(std::span<const std::string> list, const char* which) {
  std::unordered_set<std::string_view> seen;
  for (const auto& id : list)
    if (!seen.insert(id).second)
      throw ValidationError(std::string(which) + " list contains duplicate id " + id);
}

}  // namespace

double rbo(std::span<const std::string> a, std::span<const std::string> b, double p,
           std::size_t depth) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("rbo p must lie in (0, 1)");
  require_unique(a, "first");
  require_unique(b, "second");
  if (a.empty() && b.empty()) return 1.0;
  std::size_t k = std::min({depth, a.size(), b.size()});
  if (k == 0) return 0.0;

  std::unordered_set<std::string_view> seen_a, seen_b;
  std::size_t overlap = 0;
  double sum = 0.0;
  double weight = 1.0;  // p^(d-1)
  double agreement = 0.0;
  for (std::size_t d = 1; d <= k; ++d) {
    const std::string& x = a[d - 1];
    const std::string& y = b[d - 1];
    if (x == y) {
      ++overlap;
    } else {
      overlap += seen_b.count(x);
      overlap += seen_a.count(y);
    }
    seen_a.insert(x);
    seen_b.insert(y);
    agreement = static_cast<double>(overlap) / static_cast<double>(d);
    sum += weight * agreement;
    weight *= p;
  }
  // weight == p^k here.
  double score = (1.0 - p) * sum + weight * agreement;
  return std::clamp(score, 0.0, 1.0);
}

namespace {

// Counts inversions of v while merge-sorting it.
std::uint64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = sort_count_swaps(v, tmp, lo, mid) + sort_count_swaps(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum over runs of equal values of t(t-1)/2, on a sorted sequence.
template <typename Equal>
std::uint64_t tied_pairs(std::size_t n, Equal equal) {
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      ties += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

}  // namespace

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("kendall tau needs equal-length vectors");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  // Knight's O(n log n) algorithm.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  std::uint64_t tie_x = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return x[order[i]] == x[order[j]];
  });
  std::uint64_t tie_xy = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]];
  });
  std::vector<double> ys(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::uint64_t swaps = sort_count_swaps(ys, tmp, 0, n);
  std::uint64_t tie_y = tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt((n0 - static_cast<double>(tie_x)) * (n0 - static_cast<double>(tie_y)));
  if (denom == 0.0) return std::nullopt;
  // concordant - discordant = n0 - tx - ty + txy - 2 swaps
  const double s = n0 - static_cast<double>(tie_x) - static_cast<double>(tie_y) +
                   static_cast<double>(tie_xy) - 2.0 * static_cast<double>(swaps);
  return std::clamp(s / denom, -1.0, 1.0);
}

std::optional<double> ktu(std::span<const std::string> a, std::span<const std::string> b,
                          std::size_t depth) {
  a = a.first(std::min(depth, a.size()));
  b = b.first(std::min(depth, b.size()));
  require_unique(a, "first");
  require_unique(b, "second");
  if (a.empty() && b.empty()) return std::nullopt;

  std::unordered_map<std::string_view, std::size_t> pos_a, pos_b;
  for (std::size_t i = 0; i < a.size(); ++i) pos_a.emplace(a[i], i + 1);
  for (std::size_t i = 0; i < b.size(); ++i) pos_b.emplace(b[i], i + 1);

  std::vector<std::string_view> universe(a.begin(), a.end());
  for (const auto& id : b)
    if (!pos_a.count(id)) universe.push_back(id);

  std::vector<double> ra, rb;
  ra.reserve(universe.size());
  rb.reserve(universe.size());
  std::size_t missing_a = 0, missing_b = 0;
  // Appended in order of appearance in the other list.
  for (const auto& id : universe) {
    auto ia = pos_a.find(id);
    ra.push_back(ia != pos_a.end() ? static_cast<double>(ia->second)
                                   : static_cast<double>(a.size() + ++missing_a));
  }
  std::vector<std::size_t> missing_in_b_order;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    auto ib = pos_b.find(universe[i]);
    rb.push_back(ib != pos_b.end() ? static_cast<double>(ib->second) : 0.0);
    if (ib == pos_b.end()) missing_in_b_order.push_back(i);
  }
  // Documents absent from b are those of a, which appear in a's order.
  for (std::size_t i : missing_in_b_order) rb[i] = static_cast<double>(b.size() + ++missing_b);
  return kendall_tau_b(ra, rb);
}

double rmse(const TopicScores& original, const TopicScores& reproduced) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [topic, v] : original.scores) {
    auto it = reproduced.scores.find(topic);
    if (it == reproduced.scores.end()) continue;
    double d = v - it->second;
    sum += d * d;
    ++n;
  }
  if (n == 0) throw ValidationError("RMSE: the score maps share no topics");
  return std::sqrt(sum / static_cast<double>(n));
}

// ---------------------------------------------------------------- effects

namespace {

// Mean of adv - base over the topics both contain.
std::optional<double> mean_delta(const TopicScores& base, const TopicScores& adv) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [topic, v] : adv.scores) {
    auto it = base.scores.find(topic);
    if (it == base.scores.end()) continue;
    sum += v - it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

std::optional<double> effect_ratio(const TopicScores& orig_base, const TopicScores& orig_adv,
                                   const TopicScores& rep_base, const TopicScores& rep_adv) {
  auto orig = mean_delta(orig_base, orig_adv);
  auto rep = mean_delta(rep_base, rep_adv);
  if (!orig || !rep) throw ValidationError("effect ratio: a base/advanced pair shares no topics");
  if (*orig == 0.0) return std::nullopt;
  return *rep / *orig;
}

std::optional<double> effect_ratio_from_means(double orig_base, double orig_adv, double rep_base,
                                              double rep_adv) {
  double orig = orig_adv - orig_base;
  if (orig == 0.0) return std::nullopt;
  return (rep_adv - rep_base) / orig;
}

double delta_relative_improvement(double orig_base, double orig_adv, double rep_base,
                                  double rep_adv) {
  if (orig_base == 0.0 || rep_base == 0.0)
    throw ValidationError("DRI: baseline means must be non-zero");
  return (orig_adv - orig_base) / orig_base - (rep_adv - rep_base) / rep_base;
}

// ---------------------------------------------------------------- reports

RunPairScores compare_rankings(const io::Run& original, const io::Run& reproduced,
                               const io::Qrels& qrels, const MetricConfig& config) {
  config.validate();
  RunPairScores out;
  std::vector<std::string> shared;
  for (const auto& [topic, entries] : original.topics)
    if (reproduced.topics.count(topic)) shared.push_back(topic);

  for (std::size_t depth : config.ktu_depths) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : shared) {
      if (auto v = ktu(original.doc_ids(t), reproduced.doc_ids(t), depth)) {
        sum += *v;
        ++n;
      }
    }
    if (n) out.ktu[depth] = sum / static_cast<double>(n);
  }
  for (std::size_t depth : config.rbo_depths) {
    double sum = 0.0;
    for (const auto& t : shared) sum += rbo(original.doc_ids(t), reproduced.doc_ids(t), config.rbo_p, depth);
    if (!shared.empty()) out.rbo[depth] = sum / static_cast<double>(shared.size());
  }
  for (std::size_t depth : config.rmse_depths) {
    auto a = ndcg(original, qrels, depth);
    auto b = ndcg(reproduced, qrels, depth);
    try {
      out.rmse[depth] = rmse(a, b);
    } catch (const ValidationError&) {
      // no shared judged topics: leave the cutoff out
    }
  }
  return out;
}

std::vector<EvaluationRow> evaluate(const io::Run& run, const io::Qrels& qrels,
                                    const MetricConfig& config) {
  config.validate();
  std::vector<EvaluationRow> rows;
  auto emit = [&](const std::string& measure, std::optional<std::size_t> cutoff,
                  const TopicScores& s) {
    for (const auto& [topic, v] : s.scores) rows.push_back({measure, cutoff, topic, v});
    rows.push_back({measure, cutoff, "MEAN", s.mean()});
  };
  emit("ndcg", config.ndcg_depth, ndcg(run, qrels, config.ndcg_depth));
  emit("map", std::nullopt, average_precision(run, qrels));
  emit("p", config.precision_k, precision_at_k(run, qrels, config.precision_k));
  return rows;
}

void write_evaluation_csv(const std::vector<EvaluationRow>& rows, std::ostream& out) {
  out << "measure,cutoff,topic,value\n";
  for (const auto& r : rows) {
    out << r.measure << ',' << (r.cutoff ? std::to_string(*r.cutoff) : std::string()) << ','
        << r.topic << ',' << format_value(r.value) << '\n';
  }
}

std::vector<ComparisonRow> compare(const io::Run& original, const io::Run& reproduced,
                                   const io::Qrels& qrels, const MetricConfig& config,
                                   const BaselinePair& baselines) {
  config.validate();
  std::vector<ComparisonRow> rows;
  const std::string pair = original.tag + "|" + reproduced.tag;
  RunPairScores s = compare_rankings(original, reproduced, qrels, config);
  auto cut = [](const char* m, std::size_t d) { return std::string(m) + "@" + std::to_string(d); };
  for (std::size_t d : config.ktu_depths) {
    auto it = s.ktu.find(d);
    rows.push_back({pair, cut("ktu", d), it == s.ktu.end() ? std::nullopt : std::optional(it->second), {}});
  }
  for (std::size_t d : config.rbo_depths) {
    auto it = s.rbo.find(d);
    rows.push_back({pair, cut("rbo", d), it == s.rbo.end() ? std::nullopt : std::optional(it->second), {}});
  }
  for (std::size_t d : config.rmse_depths) {
    auto it = s.rmse.find(d);
    rows.push_back({pair, cut("rmse", d), it == s.rmse.end() ? std::nullopt : std::optional(it->second), {}});
  }

  TopicScores a = ndcg(original, qrels, config.ndcg_depth);
  TopicScores b = ndcg(reproduced, qrels, config.ndcg_depth);
  const std::string nd = cut("ndcg", config.ndcg_depth);
  rows.push_back({pair, "mean_" + nd + "_original", a.mean(), {}});
  rows.push_back({pair, "mean_" + nd + "_reproduced", b.mean(), {}});
  auto guarded = [&](const char* name, auto fn) {
    try {
      TTest t = fn();
      rows.push_back({pair, std::string(name) + "_" + nd, t.t, t.p_value});
    } catch (const ValidationError&) {
      rows.push_back({pair, std::string(name) + "_" + nd, std::nullopt, std::nullopt});
    }
  };
  guarded("paired_ttest", [&] { return paired_ttest(a, b); });
  guarded("unpaired_ttest", [&] { return unpaired_ttest(a, b); });

  if (baselines.original && baselines.reproduced) {
    TopicScores ob = ndcg(*baselines.original, qrels, config.ndcg_depth);
    TopicScores rb = ndcg(*baselines.reproduced, qrels, config.ndcg_depth);
    std::optional<double> er;
    try {
      er = effect_ratio(ob, a, rb, b);
    } catch (const ValidationError&) {
    }
    rows.push_back({pair, "er_" + nd, er, {}});
    std::optional<double> dri;
    try {
      dri = delta_relative_improvement(ob.mean(), a.mean(), rb.mean(), b.mean());
    } catch (const ValidationError&) {
    }
    rows.push_back({pair, "dri_" + nd, dri, {}});
  }
  return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "run_pair,measure,value,p_value\n";
  for (const auto& r : rows) {
    out << r.run_pair << ',' << r.measure << ',' << (r.value ? format_value(*r.value) : "NA")
        << ',' << (r.p_value ? format_value(*r.p_value) : "") << '\n';
  }
}

}  // namespace webprf::metrics
