#pragma once

#include "los/models.hpp"
#include "los/scheduler.hpp"
#include "los/topology.hpp"

#include <string>
#include <vector>

namespace los {

// A periodic sensor stream pinned to one device, and the training job fed
// by it. One trigger fires every trigger_every samples; the period is
// sample_interval_s * trigger_every.
struct StreamSpec {
  std::string stream_id;
  std::string model_id;
  NodeId node;
  double sample_interval_s = 0.0;
  int trigger_every = 0;
  double payload_bytes = 0.0;     // training data shipped when forwarding
  int cpu_reservation_mc = 0;     // standing ingest cost on the home device
  int mem_reservation_mb = 0;
  double work_mc_s = 0.0;         // true cost of one training, millicore-seconds
  double noise_cv = 0.0;          // runtime noise, coefficient of variation
  double mem_peak_mb = 0.0;       // true training memory peak

  double t_period_s() const { return sample_interval_s * trigger_every; }
  JobKey job_key() const { return {stream_id, model_id}; }
};

struct SimDefaults {
  double gossip_interval_s = 1.5;
  double scrape_interval_s = 0.5;
  double latency_sample_interval_s = 30.0;
  int max_hops = 4;
  Overheads overheads{0.3, 0.2};
  FitConfig fit{};
  SchedulerConfig sched{};
  double duration_s = 600.0;
};

struct Scenario {
  std::string name;
  Topology topology;
  std::vector<StreamSpec> streams;
  SimDefaults defaults;

  // Throws ValidationError listing every violation found.
  void validate() const;
  // Copy restricted to the first n declared streams.
  Scenario with_streams(std::size_t n) const;
};

// Parses the JSON scenario format documented in docs/scenario.md.
Scenario load_scenario_file(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// Built-in scenarios, constructed in code so the binary is self-contained:
//   testbed  three-layer mesh (5 edge / 4 fog / 6 cloud), up to ten streams
//            packed two per edge device, gateway device first
//   edge26   flat mesh of 26 devices, one lightly loaded stream each,
//            for watching the limit optimizer converge
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

} // namespace los
