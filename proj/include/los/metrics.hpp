#pragma once

#include "los/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace los {

struct JobCounts {
  long long triggers = 0;
  long long executions = 0;
  long long aborted = 0; // executing node left mid-run
  std::map<std::string, long long> drops;

  long long dropped_total() const;
  JobCounts& operator+=(const JobCounts& other);
};

// One completed training iteration, the row granularity of report.csv.
struct IterationRow {
  JobKey key;
  int iteration = 0;
  NodeId node;
  int hops = 0; // forwards taken before execution
  int limit_mc = 0;
  double t_job_s = 0.0;
  double t_complete_s = 0.0;
  double relative_residual = 0.0;
  bool met_period = false;
  double finished_at_s = 0.0;
};

struct LatencySample {
  double time_s = 0.0;
  NodeId a;
  NodeId b;
  double latency_ms = 0.0;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  int stream_count = 0;
  int max_hops = 0;
  double duration_s = 0.0;
  std::map<JobKey, JobCounts> jobs;
  std::vector<long long> hop_histogram; // index = hop count, size max_hops + 1
  std::vector<IterationRow> iterations;
  std::vector<LatencySample> latency;

  JobCounts totals() const;
  // Dropped plus aborted triggers over all triggers, in [0, 1].
  double drop_rate() const;
  // Fraction of executed jobs per hop count; empty when nothing executed.
  std::vector<double> hop_distribution() const;
  std::string to_text() const;
};

// Folds `other` into `into`: counts add, histograms add slot-wise, rows and
// samples concatenate. Scenario metadata must match.
void merge(MetricsReport& into, const MetricsReport& other);

// Five-number summary plus mean; quartiles use linear interpolation.
struct Summary {
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};
Summary summarize(std::vector<double> values);

// Drop-rate improvement of `other` over `insitu` in percentage points.
// Throws when the two reports describe different scenarios or stream counts.
double improvement_pp(const MetricsReport& insitu, const MetricsReport& other);

void write_report_csv(const MetricsReport& report, std::ostream& os);
void write_hops_csv(const MetricsReport& report, std::ostream& os);
void write_drops_csv(const MetricsReport& report, std::ostream& os);
void write_latency_csv(const MetricsReport& report, std::ostream& os);

} // namespace los
