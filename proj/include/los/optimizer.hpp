#pragma once

#include "los/models.hpp"

namespace los {

struct OptimizerConfig {
  double headroom = 0.85;      // first limit takes this share of free cpu
  int min_limit_mc = 10;
  double shrink_factor = 0.9;  // applied when the period was met
  double grow_factor = 1.1;    // applied when it was missed
};

// First-iteration limit: a fixed share of the node's free cpu, never below
// the floor the container runtime accepts.
int initial_limit(int cpu_available_mc, const OptimizerConfig& cfg);

// Between iterations the limit walks down while the period is met and back
// up when it is missed, clamped to [min_limit, capacity]. Updates the state
// in place and returns the new limit.
int adapt_limit(LimitState& state, bool met_period, int cpu_capacity_mc,
                const OptimizerConfig& cfg);

} // namespace los
