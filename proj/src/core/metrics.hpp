#pragma once

// Effectiveness measures (nDCG, AP, P@k), reproducibility measures (KTU,
// RBO, RMSE, ER, DRI), significance tests and the SERP drift analysis.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/collection_io.hpp"
#include "core/serp.hpp"

namespace webprf::metrics {

struct MetricConfig {
  std::size_t ndcg_depth = 1000;
  std::size_t precision_k = 10;
  double rbo_p = 0.8;
  std::vector<std::size_t> ktu_depths = {10, 100, 1000};
  std::vector<std::size_t> rbo_depths = {10, 100, 1000};
  std::vector<std::size_t> rmse_depths = {10, 100, 1000};
  double alpha = 0.05;

  void validate() const;
};

struct TopicScores {
  std::map<std::string, double, io::TopicIdLess> scores;
  std::vector<std::string> skipped;  // topics left out, with the reason

  double mean() const;  // 0 when empty
  std::size_t size() const noexcept { return scores.size(); }
};

// gain = raw grade, discount log2(i + 1); topics with IDCG = 0 or without
// judgments are skipped.
TopicScores ndcg(const io::Run& run, const io::Qrels& qrels, std::size_t depth);
// Binary relevance at grade >= 1. Topics without judgments are skipped.
TopicScores average_precision(const io::Run& run, const io::Qrels& qrels);
TopicScores precision_at_k(const io::Run& run, const io::Qrels& qrels, std::size_t k);

// Single-ranking forms used by the run-level functions; grades are listed
// in rank order.
double ndcg_of(std::span<const int> ranked_grades, std::vector<int> all_grades,
               std::size_t depth);
double average_precision_of(std::span<const int> ranked_grades, std::size_t total_relevant);

// Extrapolated rank-biased overlap,
//   (1 - p) sum_{d=1..k} p^(d-1) A_d + p^k A_k,  A_d = |A[:d] n B[:d]| / d,
// evaluated to k = min(depth, |A|, |B|). Two empty lists score 1, one empty
// list scores 0.
double rbo(std::span<const std::string> a, std::span<const std::string> b, double p,
           std::size_t depth);

// Kendall's tau-b; nullopt when undefined (fewer than two items or a
// constant vector).
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Kendall's tau over the union of the two top-depth lists. A document
// missing from a list is ranked after it, in its order of appearance in the
// other list. nullopt when both lists are empty.
std::optional<double> ktu(std::span<const std::string> a, std::span<const std::string> b,
                          std::size_t depth);

// Over the shared topics; throws ValidationError when there are none.
double rmse(const TopicScores& original, const TopicScores& reproduced);

// Mean per-topic improvement of the reproduced pair over that of the
// original pair. nullopt when the original mean delta is zero.
std::optional<double> effect_ratio(const TopicScores& orig_base, const TopicScores& orig_adv,
                                   const TopicScores& rep_base, const TopicScores& rep_adv);
std::optional<double> effect_ratio_from_means(double orig_base, double orig_adv,
                                              double rep_base, double rep_adv);

// (orig_adv - orig_base)/orig_base - (rep_adv - rep_base)/rep_base.
double delta_relative_improvement(double orig_base, double orig_adv, double rep_base,
                                  double rep_adv);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Two-sided Student t on per-topic differences of the shared topics.
// Zero variance maps to p = 1 for a zero mean difference, else p = 0.
TTest paired_ttest(const TopicScores& a, const TopicScores& b);
// Two-sided Student t with pooled variance over all topics of each side.
TTest unpaired_ttest(const TopicScores& a, const TopicScores& b);
// Two-sided p of a Student t statistic.
double student_t_two_sided_p(double t, double df);

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
};

// Sample Pearson r with a two-sided p from t = r sqrt((n-2)/(1-r^2)).
// Throws UndefinedError on zero variance, ValidationError for n < 3.
Correlation pearson(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------- reports

struct RunPairScores {
  // Mean over the topics both runs contain.
  std::map<std::size_t, double> ktu;
  std::map<std::size_t, double> rbo;
  std::map<std::size_t, double> rmse;  // nDCG@cutoff based
};

RunPairScores compare_rankings(const io::Run& original, const io::Run& reproduced,
                               const io::Qrels& qrels, const MetricConfig& config);

struct EvaluationRow {
  std::string measure;
  std::optional<std::size_t> cutoff;
  std::string topic;  // topic id or "MEAN"
  double value = 0.0;
};

std::vector<EvaluationRow> evaluate(const io::Run& run, const io::Qrels& qrels,
                                    const MetricConfig& config);
// measure,cutoff,topic,value
void write_evaluation_csv(const std::vector<EvaluationRow>& rows, std::ostream& out);

struct ComparisonRow {
  std::string run_pair;
  std::string measure;
  std::optional<double> value;
  std::optional<double> p_value;
};

struct BaselinePair {
  const io::Run* original = nullptr;
  const io::Run* reproduced = nullptr;
};

// KTU/RBO/RMSE per cutoff, paired and unpaired t-tests on nDCG, and ER/DRI
// when the baseline runs of both sides are given (the compared runs then
// act as the advanced runs).
std::vector<ComparisonRow> compare(const io::Run& original, const io::Run& reproduced,
                                   const io::Qrels& qrels, const MetricConfig& config,
                                   const BaselinePair& baselines = {});
// run_pair,measure,value,p_value
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

// ---------------------------------------------------------------- drift

struct DriftRow {
  std::string date;
  double mean_rbo = 0.0;
  double mean_intersection = 0.0;
  std::size_t topics = 0;
};

struct DriftTable {
  std::vector<DriftRow> rows;           // ascending dates, first row = baseline day
  std::optional<Correlation> correlation;  // RBO series vs intersection series
  std::vector<std::string> warnings;
};

// Groups snapshots by (engine, topic) and UTC date; compares every date with
// the earliest date's URL list. Topics lacking a baseline or a snapshot on
// some date are skipped for that date.
DriftTable drift_analysis(const std::vector<serp::SerpRecord>& snapshots, double rbo_p);
// date,mean_rbo,mean_intersection, plus a trailing "# pearson" comment line.
void write_drift_csv(const DriftTable& table, std::ostream& out);

std::string format_value(double v);

}  // namespace webprf::metrics
