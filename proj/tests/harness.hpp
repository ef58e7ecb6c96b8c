#pragma once

// A detached scheduler playground: random mesh worlds and a token walker
// that follows Forward decisions the same way the engine does, used both by
// the unit tests and the acceptance checks.

#include "los/rng.hpp"
#include "los/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace harness {

struct WorldNode {
  los::NodeSpec spec;
  los::AvailabilityModel snap;
  std::vector<los::NodeId> peers;
};

struct World {
  std::map<los::NodeId, WorldNode> nodes;
  los::RuntimeModel model;
  los::Overheads overheads;
  los::SchedulerConfig cfg;
  double snapshot_visibility = 1.0; // chance a neighbor snapshot is known
};

inline los::NodeId world_id(int i) { return "n" + std::to_string(i); }

// Ring plus random chords, random availability, and a runtime model whose
// curve sometimes makes every node look infeasible. Exercises all decision
// branches including the exploratory forwards.
inline World random_world(los::Rng& rng) {
  World w;
  int n = 3 + static_cast<int>(rng.uniform_index(8));
  for (int i = 0; i < n; ++i) {
    WorldNode node;
    node.spec.id = world_id(i);
    node.spec.layer = los::Layer::Edge;
    node.spec.cpu_capacity_mc = 1000;
    node.spec.mem_capacity_mb = 1024;
    node.snap.node = node.spec.id;
    node.snap.cpu_capacity_mc = 1000;
    node.snap.mem_capacity_mb = 1024;
    node.snap.cpu_available_mc = static_cast<int>(rng.uniform_index(1101)); // may exceed floor or not
    node.snap.mem_available_mb = static_cast<int>(rng.uniform_index(1025));
    if (node.snap.cpu_available_mc > 1000) node.snap.cpu_available_mc = 1000;
    w.nodes[node.spec.id] = node;
  }
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    w.nodes[world_id(i)].peers.push_back(world_id(j));
    w.nodes[world_id(j)].peers.push_back(world_id(i));
  }
  int chords = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
  for (int k = 0; k < chords; ++k) {
    int i = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
    int j = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
    if (i == j) continue;
    auto& pi = w.nodes[world_id(i)].peers;
    if (std::find(pi.begin(), pi.end(), world_id(j)) != pi.end()) continue;
    pi.push_back(world_id(j));
    w.nodes[world_id(j)].peers.push_back(world_id(i));
  }

  w.model.key = {"s", "m"};
  w.model.t_period_s = 10.0;
  w.model.limits.current_limit_mc = 50 + static_cast<int>(rng.uniform_index(900));
  w.model.limits.iteration = 1 + static_cast<int>(rng.uniform_index(30));
  los::RuntimeFit fit;
  // Log-uniform steepness straddling the period so chains end in executions
  // about as often as in drops.
  fit.a = std::pow(10.0, rng.uniform(2.0, 4.7));
  fit.b = rng.uniform(0.0, 200.0);
  fit.c = rng.uniform(0.5, 1.5);
  fit.d = rng.uniform(0.0, 9.0); // sometimes past the period once overheads land on top
  w.model.fit = fit;
  w.model.mem_estimate_mb = rng.uniform(50.0, 900.0);
  // A training record so the scheduler treats the estimates as learned.
  los::TrainingRecord rec;
  rec.iteration = 1;
  rec.cpu_limit_mc = w.model.limits.current_limit_mc;
  rec.duration_s = fit.predict(rec.cpu_limit_mc);
  w.model.history.push_back(rec);
  w.cfg.optimizer.min_limit_mc = 100;
  w.snapshot_visibility = rng.uniform(0.3, 1.0);
  return w;
}

inline los::TrainingJob make_job(const World& w, const los::NodeId& origin, int max_hops,
                                 los::Rng& rng) {
  los::TrainingJob job;
  job.key = w.model.key;
  job.triggered_at_s = 0.0;
  job.t_period_s = w.model.t_period_s;
  job.payload_bytes = rng.uniform(1e4, 2e6);
  job.mem_demand_mb = w.model.mem_estimate_mb;
  job.origin = origin;
  job.visited = {origin};
  job.hops_remaining = max_hops;
  return job;
}

struct ChainResult {
  los::ScheduleDecision last;
  int forwards = 0;
  bool revisited = false;
  bool bad_edge = false; // forwarded to a non-neighbor
};

// Follows the token exactly like the engine: re-decide at every node the
// job reaches until something other than Forward comes back.
inline ChainResult walk_chain(World& w, los::TrainingJob job, los::Rng& rng) {
  ChainResult out;
  los::NodeId cur = job.origin;
  std::set<los::NodeId> seen(job.visited.begin(), job.visited.end());
  for (;;) {
    const WorldNode& here = w.nodes.at(cur);
    std::map<los::NodeId, los::NeighborInfo> neigh;
    for (const auto& p : here.peers) {
      los::NeighborInfo info;
      info.latency_ms = 1.0 + 20.0 * rng.uniform01();
      info.bandwidth_bps = 1e6;
      if (rng.uniform01() < w.snapshot_visibility) info.avail = w.nodes.at(p).snap;
      neigh[p] = info;
    }
    los::ScheduleInputs in;
    in.node = cur;
    in.spec = &here.spec;
    in.job = &job;
    in.local = here.snap;
    in.neighbors = &neigh;
    in.model = &w.model;
    in.overheads = w.overheads;
    in.cfg = w.cfg;
    in.now_s = job.triggered_at_s + 0.05 * out.forwards;
    los::ScheduleDecision d = los::schedule(in, rng);
    if (d.kind != los::DecisionKind::Forward) {
      out.last = d;
      return out;
    }
    out.forwards += 1;
    if (seen.count(d.target)) out.revisited = true;
    if (std::find(here.peers.begin(), here.peers.end(), d.target) == here.peers.end())
      out.bad_edge = true;
    seen.insert(d.target);
    job.visited.push_back(d.target);
    job.hops_remaining -= 1;
    cur = d.target;
    if (out.forwards > 64) { // safety stop; the checks will flag it
      out.last = d;
      return out;
    }
  }
}

} // namespace harness
