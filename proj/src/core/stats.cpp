#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/metrics.hpp"

namespace webprf::metrics {

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("t distribution needs positive degrees of freedom");
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

namespace {

TTest from_moments(double mean_diff, double se, double df) {
  TTest out;
  out.df = df;
  // Rounding noise in score differences counts as zero variance.
  if (se <= 1e-12 * std::max(1.0, std::fabs(mean_diff))) {
    out.t = mean_diff == 0.0 ? 0.0 : std::copysign(INFINITY, mean_diff);
    out.p_value = mean_diff == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t = mean_diff / se;
  out.p_value = student_t_two_sided_p(out.t, df);
  return out;
}

}  // namespace

TTest paired_ttest(const TopicScores& a, const TopicScores& b) {
  std::vector<double> d;
  for (const auto& [topic, v] : a.scores) {
    auto it = b.scores.find(topic);
    if (it != b.scores.end()) d.push_back(v - it->second);
  }
  if (d.size() < 2) throw ValidationError("paired t-test needs at least two shared topics");
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  double var = ss / (n - 1.0);
  return from_moments(mean, std::sqrt(var / n), n - 1.0);
}

TTest unpaired_ttest(const TopicScores& a, const TopicScores& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  if (a.size() < 1 || b.size() < 1 || a.size() + b.size() < 3)
    throw ValidationError("unpaired t-test needs at least three topics in total");
  double ma = a.mean(), mb = b.mean();
  double ss = 0.0;
  for (const auto& [t, v] : a.scores) ss += (v - ma) * (v - ma);
  for (const auto& [t, v] : b.scores) ss += (v - mb) * (v - mb);
  double df = na + nb - 2.0;
  double pooled = ss / df;
  return from_moments(ma - mb, std::sqrt(pooled * (1.0 / na + 1.0 / nb)), df);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson needs equal-length series");
  if (x.size() < 3) throw ValidationError("pearson needs at least three points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedError("pearson r undefined: a series is constant");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::fabs(c.r) == 1.0) {
    c.p_value = 0.0;
  } else {
    double t = c.r * std::sqrt((n - 2.0) / (1.0 - c.r * c.r));
    c.p_value = student_t_two_sided_p(t, n - 2.0);
  }
  return c;
}

}  // namespace webprf::metrics
