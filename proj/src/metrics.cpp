#include "los/metrics.hpp"

#include "los/errors.hpp"
#include "los/text.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace los {

long long JobCounts::dropped_total() const {
  long long total = aborted;
  for (const auto& [reason, n] : drops) total += n;
  return total;
}

JobCounts& JobCounts::operator+=(const JobCounts& other) {
  triggers += other.triggers;
  executions += other.executions;
  aborted += other.aborted;
  for (const auto& [reason, n] : other.drops) drops[reason] += n;
  return *this;
}

JobCounts MetricsReport::totals() const {
  JobCounts total;
  for (const auto& [key, counts] : jobs) total += counts;
  return total;
}

double MetricsReport::drop_rate() const {
  JobCounts total = totals();
  if (total.triggers == 0) return 0.0;
  return static_cast<double>(total.dropped_total()) / static_cast<double>(total.triggers);
}

std::vector<double> MetricsReport::hop_distribution() const {
  long long executed = 0;
  for (long long n : hop_histogram) executed += n;
  if (executed == 0) return {};
  std::vector<double> out;
  out.reserve(hop_histogram.size());
  for (long long n : hop_histogram)
    out.push_back(static_cast<double>(n) / static_cast<double>(executed));
  return out;
}

std::string MetricsReport::to_text() const {
  JobCounts total = totals();
  std::string s;
  s += "scenario " + scenario + " seed=" + unum(seed) +
       " streams=" + inum(stream_count) + " max_hops=" + inum(max_hops) +
       " duration=" + fnum(duration_s, 1) + "\n";
  s += "triggers=" + inum(total.triggers) + " executions=" + inum(total.executions) +
       " dropped=" + inum(total.dropped_total()) + " drop_rate=" + fnum(drop_rate() * 100.0, 2) +
       "%\n";
  for (const auto& [reason, n] : total.drops) s += "  drop." + reason + "=" + inum(n) + "\n";
  if (total.aborted > 0) s += "  drop.aborted=" + inum(total.aborted) + "\n";
  auto dist = hop_distribution();
  for (std::size_t h = 0; h < dist.size(); ++h)
    s += "hops." + inum(static_cast<long long>(h)) + "=" + fnum(dist[h] * 100.0, 2) + "%\n";
  return s;
}

void merge(MetricsReport& into, const MetricsReport& other) {
  if (into.scenario != other.scenario || into.stream_count != other.stream_count ||
      into.max_hops != other.max_hops)
    throw ValidationError("cannot merge reports from different configurations");
  for (const auto& [key, counts] : other.jobs) into.jobs[key] += counts;
  if (into.hop_histogram.size() < other.hop_histogram.size())
    into.hop_histogram.resize(other.hop_histogram.size(), 0);
  for (std::size_t i = 0; i < other.hop_histogram.size(); ++i)
    into.hop_histogram[i] += other.hop_histogram[i];
  into.iterations.insert(into.iterations.end(), other.iterations.begin(), other.iterations.end());
  into.latency.insert(into.latency.end(), other.latency.begin(), other.latency.end());
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

} // namespace

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  return s;
}

double improvement_pp(const MetricsReport& insitu, const MetricsReport& other) {
  if (insitu.scenario != other.scenario || insitu.stream_count != other.stream_count)
    throw ValidationError("improvement comparison across different scenarios");
  return (insitu.drop_rate() - other.drop_rate()) * 100.0;
}

void write_report_csv(const MetricsReport& report, std::ostream& os) {
  os << "stream,model,iteration,node,hops,limit_mc,t_job_s,t_complete_s,relative_residual,"
        "met_period,finished_at_s\n";
  for (const auto& row : report.iterations) {
    os << row.key.stream_id << ',' << row.key.model_id << ',' << row.iteration << ',' << row.node
       << ',' << row.hops << ',' << row.limit_mc << ',' << fnum(row.t_job_s) << ','
       << fnum(row.t_complete_s) << ',' << fnum(row.relative_residual) << ','
       << (row.met_period ? 1 : 0) << ',' << fnum(row.finished_at_s) << '\n';
  }
}

void write_hops_csv(const MetricsReport& report, std::ostream& os) {
  os << "hops,count,fraction\n";
  auto dist = report.hop_distribution();
  for (std::size_t h = 0; h < report.hop_histogram.size(); ++h) {
    double frac = h < dist.size() ? dist[h] : 0.0;
    os << h << ',' << report.hop_histogram[h] << ',' << fnum(frac) << '\n';
  }
}

void write_drops_csv(const MetricsReport& report, std::ostream& os) {
  os << "stream,model,triggers,executions,aborted";
  // Collect every reason that appears so all rows share one header.
  std::vector<std::string> reasons;
  for (const auto& [key, counts] : report.jobs)
    for (const auto& [reason, n] : counts.drops)
      if (std::find(reasons.begin(), reasons.end(), reason) == reasons.end())
        reasons.push_back(reason);
  std::sort(reasons.begin(), reasons.end());
  for (const auto& r : reasons) os << ',' << r;
  os << '\n';
  for (const auto& [key, counts] : report.jobs) {
    os << key.stream_id << ',' << key.model_id << ',' << counts.triggers << ','
       << counts.executions << ',' << counts.aborted;
    for (const auto& r : reasons) {
      auto it = counts.drops.find(r);
      os << ',' << (it == counts.drops.end() ? 0 : it->second);
    }
    os << '\n';
  }
}

void write_latency_csv(const MetricsReport& report, std::ostream& os) {
  os << "time_s,a,b,latency_ms\n";
  for (const auto& s : report.latency)
    os << fnum(s.time_s) << ',' << s.a << ',' << s.b << ',' << fnum(s.latency_ms, 3) << '\n';
}

} // namespace los
