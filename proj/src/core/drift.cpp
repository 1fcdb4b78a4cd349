#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "core/error.hpp"
#include "core/metrics.hpp"

namespace webprf::metrics {

namespace {

std::vector<std::string> url_list(const serp::SerpRecord& r) {
  std::vector<std::string> urls;
  std::set<std::string> seen;
  for (const auto& res : r.results) {
    std::string u = serp::normalize_url(res.url);
    if (seen.insert(u).second) urls.push_back(std::move(u));
  }
  return urls;
}

}  // namespace

DriftTable drift_analysis(const std::vector<serp::SerpRecord>& snapshots, double rbo_p) {
  if (!(rbo_p > 0.0 && rbo_p < 1.0)) throw ConfigError("rbo p must lie in (0, 1)");
  using Key = std::pair<serp::Engine, std::string>;
  // (engine, topic) -> date -> first snapshot of that day
  std::map<Key, std::map<std::string, const serp::SerpRecord*>> groups;
  std::set<std::string> dates;
  DriftTable table;
  for (const auto& rec : snapshots) {
    std::string date = serp::format_date(rec.fetched_at);
    dates.insert(date);
    auto& slot = groups[{rec.engine, rec.topic_id}][date];
    if (slot == nullptr) {
      slot = &rec;
    } else {
      table.warnings.push_back(std::string(serp::engine_name(rec.engine)) + " topic " +
                               rec.topic_id + ": several snapshots on " + date +
                               ", keeping the first");
    }
  }
  if (dates.size() < 2) throw ValidationError("drift analysis needs snapshots from at least two dates");
  const std::string& day0 = *dates.begin();

  for (const auto& date : dates) {
    DriftRow row;
    row.date = date;
    double rbo_sum = 0.0, inter_sum = 0.0;
    for (const auto& [key, by_date] : groups) {
      const std::string label = std::string(serp::engine_name(key.first)) + " topic " + key.second;
      auto base = by_date.find(day0);
      if (base == by_date.end()) {
        if (date == day0) table.warnings.push_back(label + ": no snapshot on the first date " + day0);
        continue;
      }
      auto cur = by_date.find(date);
      if (cur == by_date.end()) {
        table.warnings.push_back(label + ": no snapshot on " + date);
        continue;
      }
      auto a = url_list(*base->second);
      auto b = url_list(*cur->second);
      rbo_sum += rbo(a, b, rbo_p, std::max(a.size(), b.size()));
      inter_sum += serp::url_intersection(*base->second, *cur->second);
      ++row.topics;
    }
    if (row.topics == 0) {
      table.warnings.push_back("no comparable topics on " + date);
      continue;
    }
    row.mean_rbo = rbo_sum / static_cast<double>(row.topics);
    row.mean_intersection = inter_sum / static_cast<double>(row.topics);
    table.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    xs.push_back(r.mean_rbo);
    ys.push_back(r.mean_intersection);
  }
  try {
    table.correlation = pearson(xs, ys);
  } catch (const Error& e) {
    table.warnings.push_back(std::string("correlation not reported: ") + e.what());
  }
  return table;
}

void write_drift_csv(const DriftTable& table, std::ostream& out) {
  out << "date,mean_rbo,mean_intersection\n";
  for (const auto& r : table.rows)
    out << r.date << ',' << format_value(r.mean_rbo) << ',' << format_value(r.mean_intersection)
        << '\n';
  if (table.correlation)
    out << "# pearson r=" << format_value(table.correlation->r)
        << " p=" << format_value(table.correlation->p_value) << '\n';
  else
    out << "# pearson r=NA p=NA\n";
}

}  // namespace webprf::metrics
