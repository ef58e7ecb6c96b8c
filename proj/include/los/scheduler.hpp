#pragma once

#include "los/models.hpp"
#include "los/optimizer.hpp"
#include "los/rng.hpp"
#include "los/topology.hpp"

#include <map>
#include <optional>
#include <vector>

namespace los {

// A triggered training iteration travelling through the mesh until some
// node runs it or drops it.
struct TrainingJob {
  JobKey key;
  double triggered_at_s = 0.0;
  double t_period_s = 0.0;
  double payload_bytes = 0.0;
  double mem_demand_mb = 0.0;  // declared peak, used before any history exists
  NodeId origin;
  std::vector<NodeId> visited; // traversal order, origin first
  int hops_remaining = 0;

  bool has_visited(const NodeId& id) const;
};

enum class DecisionKind { ExecuteLocal, Forward, Drop };

enum class DropReason { HopLimit, Cycle, PreviousStillRunning, NoFeasibleNode };

const char* decision_name(DecisionKind kind);
const char* drop_reason_name(DropReason reason);

struct ScheduleDecision {
  DecisionKind kind = DecisionKind::Drop;
  int limit_mc = 0;                      // ExecuteLocal: granted cpu limit
  NodeId target;                         // Forward: chosen neighbor
  DropReason reason = DropReason::NoFeasibleNode;
};

// One forwarding candidate as seen through gossip: predicted residual if it
// ran the job, its last reported load, and the link latency for tie breaks.
struct Candidate {
  NodeId id;
  double predicted_residual = 0.0;
  double load = 0.0;
  double latency_ms = 0.0;
  bool feasible = false;
};

struct RankedCandidate {
  Candidate candidate;
  int residual_rank = 0;
  int load_rank = 0;
  double combined = 0.0;
};

struct CandidateRanking {
  std::vector<RankedCandidate> rows; // input order preserved
  std::size_t winner = 0;            // index into rows
};

// Competition ranking: each candidate's rank is the number of strictly
// smaller values, so ties share a rank and the ranking is invariant under
// any order-preserving rescale of the inputs. The winner minimizes
// w_residual * residual_rank + w_load * load_rank; ties go to the lower
// link latency, then the lexicographically smaller id. Throws on empty input.
CandidateRanking rank_candidates(const std::vector<Candidate>& candidates, double w_residual,
                                 double w_load);

struct SchedulerConfig {
  double coldstart_threshold = 0.85; // local utilization above this forwards blind
  double weight_residual = 1.0;
  double weight_load = 1.0;
  OptimizerConfig optimizer;
};

// What the deciding node knows about one joined neighbor.
struct NeighborInfo {
  std::optional<AvailabilityModel> avail; // last snapshot received, if any
  double latency_ms = 0.0;
  double bandwidth_bps = 0.0;
};

struct ScheduleInputs {
  NodeId node;
  const NodeSpec* spec = nullptr;
  const TrainingJob* job = nullptr;
  AvailabilityModel local;                          // fresh local snapshot
  const std::map<NodeId, NeighborInfo>* neighbors = nullptr; // joined only
  const RuntimeModel* model = nullptr;              // may be null before first run
  Overheads overheads;
  SchedulerConfig cfg;
  bool previous_still_running = false;
  double now_s = 0.0;
};

// Cold-start placement before any runtime curve exists: stay local while
// utilization permits, otherwise pick a uniformly random unvisited neighbor.
// Returns nothing when the job should stay local.
std::optional<NodeId> coldstart_select(double local_utilization, double threshold,
                                       const std::vector<NodeId>& unvisited, Rng& rng);

// The local-optimistic decision: run here when the prediction says the
// period holds, otherwise hand the job to the most promising neighbor based
// on possibly stale gossip, and drop only when every path is exhausted.
ScheduleDecision schedule(const ScheduleInputs& in, Rng& rng);

} // namespace los
