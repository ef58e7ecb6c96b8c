#include "los/scheduler.hpp"

#include "los/errors.hpp"

#include <algorithm>
#include <cmath>

namespace los {

bool TrainingJob::has_visited(const NodeId& id) const {
  return std::find(visited.begin(), visited.end(), id) != visited.end();
}

const char* decision_name(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::ExecuteLocal: return "execute";
    case DecisionKind::Forward: return "forward";
    case DecisionKind::Drop: return "drop";
  }
  return "?";
}

const char* drop_reason_name(DropReason reason) {
  switch (reason) {
    case DropReason::HopLimit: return "hop_limit";
    case DropReason::Cycle: return "cycle";
    case DropReason::PreviousStillRunning: return "previous_still_running";
    case DropReason::NoFeasibleNode: return "no_feasible_node";
  }
  return "?";
}

CandidateRanking rank_candidates(const std::vector<Candidate>& candidates, double w_residual,
                                 double w_load) {
  if (candidates.empty()) throw ValidationError("ranking requested with no candidates");
  CandidateRanking out;
  out.rows.reserve(candidates.size());
  for (const auto& c : candidates) {
    RankedCandidate row;
    row.candidate = c;
    for (const auto& other : candidates) {
      if (other.predicted_residual < c.predicted_residual) row.residual_rank++;
      if (other.load < c.load) row.load_rank++;
    }
    row.combined = w_residual * row.residual_rank + w_load * row.load_rank;
    out.rows.push_back(row);
  }
  out.winner = 0;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const RankedCandidate& a = out.rows[i];
    const RankedCandidate& b = out.rows[out.winner];
    if (a.combined < b.combined ||
        (a.combined == b.combined &&
         (a.candidate.latency_ms < b.candidate.latency_ms ||
          (a.candidate.latency_ms == b.candidate.latency_ms &&
           a.candidate.id < b.candidate.id))))
      out.winner = i;
  }
  return out;
}

std::optional<NodeId> coldstart_select(double local_utilization, double threshold,
                                       const std::vector<NodeId>& unvisited, Rng& rng) {
  if (local_utilization <= threshold || unvisited.empty()) return std::nullopt;
  return unvisited[rng.uniform_index(unvisited.size())];
}

namespace {

// Grant at a node: the optimizer's proposal capped by what is actually free.
// Before the first iteration the proposal is the headroom share of free cpu.
int proposed_limit(const RuntimeModel* model, int cpu_available_mc, const OptimizerConfig& cfg) {
  if (!model || model->limits.iteration == 0) return initial_limit(cpu_available_mc, cfg);
  return model->limits.current_limit_mc;
}

double mem_demand(const RuntimeModel* model, const TrainingJob& job) {
  if (model && !model->history.empty()) return model->mem_estimate_mb;
  return job.mem_demand_mb;
}

struct LocalCheck {
  bool admissible = false; // resources fit right now
  bool feasible = false;   // admissible and prediction at the grant meets the period
  int grant_mc = 0;
};

LocalCheck check_local(const ScheduleInputs& in) {
  LocalCheck out;
  const TrainingJob& job = *in.job;
  int avail = in.local.cpu_available_mc;
  int proposed = proposed_limit(in.model, avail, in.cfg.optimizer);
  out.grant_mc = std::min(proposed, avail);
  bool cpu_ok = out.grant_mc >= in.cfg.optimizer.min_limit_mc;
  bool mem_ok = mem_demand(in.model, job) <= in.local.mem_available_mb;
  out.admissible = cpu_ok && mem_ok;
  if (!out.admissible) return out;
  if (!in.model || !in.model->fit) return out; // no curve, feasibility unknown
  double elapsed = in.now_s - job.triggered_at_s;
  double t_complete = elapsed + predict_t_complete(*in.model, out.grant_mc, in.overheads, 0.0);
  out.feasible = t_complete <= job.t_period_s;
  return out;
}

std::vector<NodeId> unvisited_neighbors(const ScheduleInputs& in) {
  std::vector<NodeId> out;
  for (const auto& [id, info] : *in.neighbors)
    if (!in.job->has_visited(id)) out.push_back(id);
  return out;
}

ScheduleDecision drop(DropReason reason) {
  ScheduleDecision d;
  d.kind = DecisionKind::Drop;
  d.reason = reason;
  return d;
}

ScheduleDecision execute_local(int grant_mc) {
  ScheduleDecision d;
  d.kind = DecisionKind::ExecuteLocal;
  d.limit_mc = grant_mc;
  return d;
}

ScheduleDecision forward_to(NodeId target) {
  ScheduleDecision d;
  d.kind = DecisionKind::Forward;
  d.target = std::move(target);
  return d;
}

// Before any runtime curve exists the decision runs blind: keep the job on
// a lightly loaded local node, otherwise push it to a random neighbor.
ScheduleDecision schedule_coldstart(const ScheduleInputs& in, const std::vector<NodeId>& unvisited,
                                    Rng& rng) {
  LocalCheck local = check_local(in);
  bool can_forward = in.job->hops_remaining > 0 && !unvisited.empty();
  auto pick = coldstart_select(in.local.cpu_utilization(), in.cfg.coldstart_threshold,
                               can_forward ? unvisited : std::vector<NodeId>{}, rng);
  if (!pick) {
    if (local.admissible) return execute_local(local.grant_mc);
    if (can_forward) return forward_to(unvisited[rng.uniform_index(unvisited.size())]);
    return drop(in.job->hops_remaining == 0 ? DropReason::HopLimit : DropReason::NoFeasibleNode);
  }
  return forward_to(*pick);
}

} // namespace

ScheduleDecision schedule(const ScheduleInputs& in, Rng& rng) {
  if (!in.spec || !in.job || !in.neighbors)
    throw ValidationError("schedule called with incomplete inputs");
  const TrainingJob& job = *in.job;

  // A job whose predecessor is still occupying the node is beyond saving:
  // its period already slipped once.
  if (in.previous_still_running) return drop(DropReason::PreviousStillRunning);

  std::vector<NodeId> unvisited = unvisited_neighbors(in);

  if (!in.model || !in.model->fit) return schedule_coldstart(in, unvisited, rng);

  LocalCheck local = check_local(in);
  if (local.feasible) return execute_local(local.grant_mc);

  if (job.hops_remaining == 0) return drop(DropReason::HopLimit);
  if (in.neighbors->empty()) return drop(DropReason::NoFeasibleNode);
  if (unvisited.empty()) return drop(DropReason::Cycle);

  // Rank the unvisited neighbors we have snapshots for. The snapshots may
  // be stale; that is the optimistic part of the protocol.
  std::vector<Candidate> candidates;
  double elapsed = in.now_s - job.triggered_at_s;
  for (const auto& id : unvisited) {
    const NeighborInfo& info = in.neighbors->at(id);
    if (!info.avail) continue;
    const AvailabilityModel& snap = *info.avail;
    int proposed = proposed_limit(in.model, snap.cpu_available_mc, in.cfg.optimizer);
    int grant = std::min(proposed, snap.cpu_available_mc);
    bool cpu_ok = grant >= in.cfg.optimizer.min_limit_mc;
    bool mem_ok = mem_demand(in.model, job) <= snap.mem_available_mb;
    // Clamp to the floor so full-looking nodes still get a (terrible)
    // prediction and rank instead of vanishing.
    int predict_at = std::max(grant, in.cfg.optimizer.min_limit_mc);
    double transfer =
        transfer_time_s(job.payload_bytes, {{info.latency_ms, info.bandwidth_bps}});
    double t_complete =
        elapsed + predict_t_complete(*in.model, predict_at, in.overheads, transfer);
    Candidate c;
    c.id = id;
    c.predicted_residual = residual(t_complete, job.t_period_s).relative;
    c.load = snap.cpu_utilization();
    c.latency_ms = info.latency_ms;
    c.feasible = cpu_ok && mem_ok && t_complete <= job.t_period_s;
    candidates.push_back(std::move(c));
  }
  if (candidates.empty()) return drop(DropReason::NoFeasibleNode);

  std::vector<Candidate> feasible;
  for (const auto& c : candidates)
    if (c.feasible) feasible.push_back(c);
  const std::vector<Candidate>& pool = feasible.empty() ? candidates : feasible;
  CandidateRanking ranking = rank_candidates(pool, in.cfg.weight_residual, in.cfg.weight_load);
  return forward_to(ranking.rows[ranking.winner].candidate.id);
}

} // namespace los
