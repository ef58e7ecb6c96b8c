#pragma once

#include "los/metrics.hpp"
#include "los/scenario.hpp"

#include <cstdint>
#include <string>

namespace los {

struct RunConfig {
  std::uint64_t seed = 1;
  bool verbose_events = false; // include scrape/gossip/latency lines in the log
};

struct RunResult {
  MetricsReport report;
  std::string event_log;
};

// Plays the scenario through the discrete-event engine. Deterministic: the
// same scenario and seed produce a byte-identical report and event log.
RunResult run_scenario(const Scenario& scenario, const RunConfig& cfg);

} // namespace los
