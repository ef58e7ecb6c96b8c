#pragma once

#include "los/topology.hpp"

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace los {

// A periodic training task is identified by the data stream it consumes
// and the model it maintains.
struct JobKey {
  std::string stream_id;
  std::string model_id;
  auto operator<=>(const JobKey&) const = default;
  std::string to_string() const { return stream_id + "/" + model_id; }
};

// One row of the monitoring snapshot a node gossips to its neighbors.
// Capacities ride along so receivers can turn absolute reservations into
// utilization fractions without a second lookup.
struct AvailabilityModel {
  NodeId node;
  double taken_at_s = 0.0;
  int cpu_capacity_mc = 0;
  int mem_capacity_mb = 0;
  int cpu_available_mc = 0;
  int mem_available_mb = 0;

  double cpu_utilization() const {
    if (cpu_capacity_mc <= 0) return 1.0;
    return 1.0 - static_cast<double>(cpu_available_mc) / cpu_capacity_mc;
  }
};

// Outcome of one completed training run, the unit the runtime model learns from.
struct TrainingRecord {
  int iteration = 0;
  NodeId node;
  int cpu_limit_mc = 0;       // R: the limit the run executed under
  double duration_s = 0.0;    // t_job
  double cpu_utilization = 0.0;
  double mem_peak_mb = 0.0;
  double net_bytes = 0.0;     // payload moved to reach the executing node
  bool met_period = false;
  double finished_at_s = 0.0;
};

// Parameters of the runtime curve t_job(R) = a * (R + b)^(-c) + d.
struct RuntimeFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double predict(double limit_mc) const;
};

struct FitResult {
  RuntimeFit fit;
  double rmse = 0.0;
};

// Per-job resource limit the optimizer adapts between iterations.
struct LimitState {
  int current_limit_mc = 0;
  int iteration = 0;
  std::optional<bool> last_met_period;
};

struct FitConfig {
  std::size_t history_cap = 64;
  std::size_t min_fit_records = 3;
  double k_sigma = 2.0; // worst-case estimate: mean + k * stddev
};

// Everything a node knows about one job: learned runtime curve, resource
// envelope estimates, and the adaptive limit. Gossiped between nodes so any
// node can predict before accepting a forward.
struct RuntimeModel {
  JobKey key;
  double t_period_s = 0.0;
  std::deque<TrainingRecord> history;
  std::optional<RuntimeFit> fit;
  double fit_rmse = 0.0;
  double mem_estimate_mb = 0.0;
  double net_estimate_bytes = 0.0;
  LimitState limits;

  // Appends a record (evicting the oldest past the cap), refits the curve
  // when enough distinct limits exist, and refreshes the envelope estimates.
  void observe(const TrainingRecord& rec, const FitConfig& cfg);

  bool newer_than(const RuntimeModel& other) const;
  std::string to_text() const;
};

// Fits t(R) = a*(R+b)^(-c) + d to (limit, duration) samples. For each
// candidate (b, c) the linear pair (a, d) has a closed-form least-squares
// solution; (b, c) is found by a coarse log-space grid followed by a
// multiplicative pattern search. Returns nothing when fewer than
// min_fit_records samples or fewer than two distinct limits exist.
std::optional<FitResult> fit_runtime_curve(const std::deque<TrainingRecord>& history,
                                           const FitConfig& cfg);

// Mean plus k standard deviations (n-1 denominator); the single-sample
// case returns the sample itself.
double estimate_worst_case(const std::vector<double>& samples, double k_sigma);

// Transfer time for a payload over consecutive links, seconds.
// Each hop contributes payload/bandwidth plus its latency.
double transfer_time_s(double payload_bytes, const std::vector<LinkMetrics>& path);

// t_complete = t_job(limit) + overheads + transfer. Throws when no fit is
// available or the limit is not positive.
struct Overheads {
  double t_cstart_s = 0.0;
  double t_cstop_s = 0.0;
};
double predict_t_complete(const RuntimeModel& model, double limit_mc, const Overheads& ovh,
                          double transfer_s);

// Residual between completion time and the stream period.
struct Residual {
  double absolute_s = 0.0;
  double relative = 0.0;
};
Residual residual(double t_complete_s, double t_period_s);

} // namespace los
