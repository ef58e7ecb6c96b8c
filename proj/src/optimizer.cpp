#include "los/optimizer.hpp"

#include "los/errors.hpp"

#include <algorithm>
#include <cmath>

namespace los {

int initial_limit(int cpu_available_mc, const OptimizerConfig& cfg) {
  if (cpu_available_mc <= 0) return cfg.min_limit_mc;
  int limit = static_cast<int>(std::floor(cfg.headroom * cpu_available_mc));
  return std::max(limit, cfg.min_limit_mc);
}

int adapt_limit(LimitState& state, bool met_period, int cpu_capacity_mc,
                const OptimizerConfig& cfg) {
  if (cpu_capacity_mc < cfg.min_limit_mc)
    throw ValidationError("capacity below the minimum limit");
  double factor = met_period ? cfg.shrink_factor : cfg.grow_factor;
  int next = static_cast<int>(std::llround(state.current_limit_mc * factor));
  next = std::clamp(next, cfg.min_limit_mc, cpu_capacity_mc);
  state.current_limit_mc = next;
  state.iteration += 1;
  state.last_met_period = met_period;
  return next;
}

} // namespace los
