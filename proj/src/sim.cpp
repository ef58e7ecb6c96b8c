#include "los/sim.hpp"

#include "los/errors.hpp"
#include "los/rng.hpp"
#include "los/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <vector>

namespace los {

namespace {

// Tie order for events sharing a timestamp. Leaves are applied before
// anything else sees the node, finishes free capacity before scrapes read
// it, and deliveries land before arrival decisions use them.
enum EvKind : int {
  EvChurn = 0,
  EvJobFinish = 1,
  EvScrape = 2,
  EvGossipSend = 3,
  EvGossipDelivery = 4,
  EvModelDelivery = 5,
  EvJobArrive = 6,
  EvTrigger = 7,
  EvLatencySample = 8,
};

struct Event {
  double time = 0.0;
  int kind = 0;
  std::uint64_t seq = 0;
  NodeId node;           // where the event happens
  NodeId peer;           // sender for deliveries
  std::size_t payload = 0;
  std::uint64_t run_id = 0;     // JobFinish
  std::size_t stream_index = 0; // Trigger
  bool churn_join = false;      // Churn
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct RunningJob {
  TrainingJob job;
  std::size_t stream_index = 0;
  int limit_mc = 0;
  int mem_mb = 0;
  double started_at = 0.0;
  double t_job = 0.0;
  double epsilon = 0.0;
};

struct NodeState {
  NodeSpec spec;
  bool joined = true;
  int cpu_reserved_mc = 0; // standing reservations of home streams
  int mem_reserved_mb = 0;
  int cpu_busy_mc = 0;     // held by running trainings
  int mem_busy_mb = 0;
  AvailabilityModel snapshot; // own last scrape
  std::map<NodeId, AvailabilityModel> neighbor_snaps;
  std::map<JobKey, RuntimeModel> models;
  std::map<std::uint64_t, RunningJob> running;

  int cpu_available() const { return spec.cpu_capacity_mc - cpu_reserved_mc - cpu_busy_mc; }
  int mem_available() const { return spec.mem_capacity_mb - mem_reserved_mb - mem_busy_mb; }
};

// Engine-side bookkeeping for one job: whether an iteration is underway and
// how many have completed.
struct JobTracker {
  bool active = false;
  long long executions = 0;
};

class Engine {
public:
  Engine(const Scenario& sc, const RunConfig& cfg)
      : sc_(sc), cfg_(cfg), rng_(cfg.seed) {}

  RunResult run();

private:
  void push(Event ev) {
    ev.seq = seq_counter_++;
    queue_.push(std::move(ev));
  }

  void logf(const std::string& line, bool chatty = false) {
    if (chatty && !cfg_.verbose_events) return;
    log_ += "t=" + fnum(now_) + " " + line + "\n";
  }

  void init();
  void handle(const Event& ev);
  void handle_churn(const Event& ev);
  void handle_scrape(const NodeId& id);
  void handle_gossip_send(const NodeId& id);
  void handle_gossip_delivery(const Event& ev);
  void handle_model_delivery(const Event& ev);
  void handle_trigger(const Event& ev);
  void handle_arrival(const NodeId& id, std::size_t token);
  void handle_finish(const Event& ev);
  void handle_latency_sample();

  void scrape_now(NodeState& st);
  ScheduleDecision decide(const NodeId& id, const TrainingJob& job);
  bool try_start(const NodeId& id, std::size_t token, int grant_mc);
  void record_drop(const TrainingJob& job, DropReason reason, const NodeId& where);
  void broadcast_model(const NodeId& from, const JobKey& key);
  void audit();
  void final_checks() const;

  const StreamSpec& stream_of(const JobKey& key) const {
    auto it = stream_by_key_.find(key);
    if (it == stream_by_key_.end()) throw EngineError("no stream for job " + key.to_string());
    return sc_.streams[it->second];
  }

  const Scenario& sc_;
  RunConfig cfg_;
  Rng rng_;
  double now_ = 0.0;
  std::uint64_t seq_counter_ = 0;
  std::uint64_t run_counter_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::map<NodeId, NodeState> nodes_;
  std::map<JobKey, JobTracker> trackers_;
  std::map<JobKey, std::size_t> stream_by_key_;
  std::vector<TrainingJob> token_pool_;
  std::vector<AvailabilityModel> snap_pool_;
  std::vector<std::shared_ptr<const RuntimeModel>> model_pool_;
  MetricsReport report_;
  std::string log_;
};

void Engine::init() {
  report_.scenario = sc_.name;
  report_.seed = cfg_.seed;
  report_.stream_count = static_cast<int>(sc_.streams.size());
  report_.max_hops = sc_.defaults.max_hops;
  report_.duration_s = sc_.defaults.duration_s;
  report_.hop_histogram.assign(static_cast<std::size_t>(sc_.defaults.max_hops) + 1, 0);

  for (const auto& [id, spec] : sc_.topology.nodes()) {
    NodeState st;
    st.spec = spec;
    st.joined = sc_.topology.joined(id, 0.0);
    nodes_.emplace(id, std::move(st));
  }
  for (std::size_t i = 0; i < sc_.streams.size(); ++i) {
    const StreamSpec& s = sc_.streams[i];
    stream_by_key_[s.job_key()] = i;
    trackers_[s.job_key()] = {};
    report_.jobs[s.job_key()] = {};
    NodeState& home = nodes_.at(s.node);
    home.cpu_reserved_mc += s.cpu_reservation_mc;
    home.mem_reserved_mb += s.mem_reservation_mb;
    push({s.t_period_s(), EvTrigger, 0, s.node, {}, 0, 0, i, false});
  }

  for (const auto& ev : sc_.topology.churn()) {
    if (ev.time_s > sc_.defaults.duration_s) continue;
    push({ev.time_s, EvChurn, 0, ev.node, {}, 0, 0, 0, ev.join});
  }
  for (const auto& [id, st] : nodes_) {
    push({0.0, EvScrape, 0, id, {}, 0, 0, 0, false});
    push({0.0, EvGossipSend, 0, id, {}, 0, 0, 0, false});
  }
  push({0.0, EvLatencySample, 0, {}, {}, 0, 0, 0, false});
}

void Engine::scrape_now(NodeState& st) {
  st.snapshot.node = st.spec.id;
  st.snapshot.taken_at_s = now_;
  st.snapshot.cpu_capacity_mc = st.spec.cpu_capacity_mc;
  st.snapshot.mem_capacity_mb = st.spec.mem_capacity_mb;
  st.snapshot.cpu_available_mc = st.cpu_available();
  st.snapshot.mem_available_mb = st.mem_available();
}

void Engine::handle_scrape(const NodeId& id) {
  NodeState& st = nodes_.at(id);
  if (st.joined) {
    scrape_now(st);
    logf("node=" + id + " scrape cpu_avail=" + inum(st.snapshot.cpu_available_mc) +
             " mem_avail=" + inum(st.snapshot.mem_available_mb),
         true);
  }
  double next = now_ + sc_.defaults.scrape_interval_s;
  if (next <= sc_.defaults.duration_s)
    push({next, EvScrape, 0, id, {}, 0, 0, 0, false});
}

void Engine::handle_gossip_send(const NodeId& id) {
  NodeState& st = nodes_.at(id);
  if (st.joined) {
    // Drop snapshots of peers that have left; they return via fresh gossip.
    for (auto it = st.neighbor_snaps.begin(); it != st.neighbor_snaps.end();) {
      if (!nodes_.at(it->first).joined)
        it = st.neighbor_snaps.erase(it);
      else
        ++it;
    }
    std::size_t payload = snap_pool_.size();
    snap_pool_.push_back(st.snapshot);
    for (const auto& peer : sc_.topology.neighbors(id, now_)) {
      LinkMetrics lm = sc_.topology.link_metrics(id, peer, now_);
      push({now_ + lm.latency_ms / 1000.0, EvGossipDelivery, 0, peer, id, payload, 0, 0, false});
    }
    logf("node=" + id + " gossip_send", true);
  }
  double next = now_ + sc_.defaults.gossip_interval_s;
  if (next <= sc_.defaults.duration_s)
    push({next, EvGossipSend, 0, id, {}, 0, 0, 0, false});
}

void Engine::handle_gossip_delivery(const Event& ev) {
  NodeState& st = nodes_.at(ev.node);
  if (!st.joined) return;
  const AvailabilityModel& snap = snap_pool_.at(ev.payload);
  auto it = st.neighbor_snaps.find(ev.peer);
  if (it == st.neighbor_snaps.end() || snap.taken_at_s >= it->second.taken_at_s) {
    st.neighbor_snaps[ev.peer] = snap;
    logf("node=" + ev.node + " gossip_recv from=" + ev.peer + " taken_at=" + fnum(snap.taken_at_s),
         true);
  }
}

void Engine::handle_model_delivery(const Event& ev) {
  NodeState& st = nodes_.at(ev.node);
  if (!st.joined) return;
  const RuntimeModel& incoming = *model_pool_.at(ev.payload);
  auto it = st.models.find(incoming.key);
  if (it == st.models.end() || incoming.newer_than(it->second)) {
    st.models[incoming.key] = incoming;
    logf("node=" + ev.node + " model_recv job=" + incoming.key.to_string() +
             " iter=" + inum(incoming.limits.iteration),
         true);
  }
}

ScheduleDecision Engine::decide(const NodeId& id, const TrainingJob& job) {
  NodeState& st = nodes_.at(id);
  std::map<NodeId, NeighborInfo> neighbors;
  for (const auto& peer : sc_.topology.neighbors(id, now_)) {
    LinkMetrics lm = sc_.topology.link_metrics(id, peer, now_);
    NeighborInfo info;
    info.latency_ms = lm.latency_ms;
    info.bandwidth_bps = lm.bandwidth_bps;
    auto sit = st.neighbor_snaps.find(peer);
    if (sit != st.neighbor_snaps.end()) info.avail = sit->second;
    neighbors[peer] = info;
  }
  ScheduleInputs in;
  in.node = id;
  in.spec = &st.spec;
  in.job = &job;
  in.local = st.snapshot;
  in.neighbors = &neighbors;
  auto mit = st.models.find(job.key);
  in.model = mit == st.models.end() ? nullptr : &mit->second;
  in.overheads = sc_.defaults.overheads;
  in.cfg = sc_.defaults.sched;
  in.previous_still_running = false; // checked at trigger time, at the origin
  in.now_s = now_;
  return schedule(in, rng_);
}

void Engine::record_drop(const TrainingJob& job, DropReason reason, const NodeId& where) {
  report_.jobs.at(job.key).drops[drop_reason_name(reason)] += 1;
  if (reason != DropReason::PreviousStillRunning) trackers_.at(job.key).active = false;
  logf("node=" + where + " drop job=" + job.key.to_string() +
       " reason=" + std::string(drop_reason_name(reason)) +
       " hops_used=" + inum(static_cast<long long>(job.visited.size()) - 1));

  // A dropped iteration definitely missed its period, so it feeds the limit
  // optimizer the same way a late run does. Otherwise a limit whose
  // prediction turned infeasible would never move again. The back-pressure
  // drop is excluded: the previous run of the same job is still in flight
  // and will adjust the limit itself when it completes.
  if (reason == DropReason::PreviousStillRunning) return;
  const StreamSpec& stream = stream_of(job.key);
  NodeState& origin = nodes_.at(stream.node);
  auto mit = origin.models.find(job.key);
  if (origin.joined && mit != origin.models.end() && mit->second.limits.iteration > 0) {
    adapt_limit(mit->second.limits, false, origin.spec.cpu_capacity_mc,
                sc_.defaults.sched.optimizer);
    broadcast_model(stream.node, job.key);
  }
}

bool Engine::try_start(const NodeId& id, std::size_t token, int grant_mc) {
  NodeState& st = nodes_.at(id);
  TrainingJob& job = token_pool_.at(token);
  const StreamSpec& stream = stream_of(job.key);
  double mem_need = stream.mem_peak_mb;
  if (grant_mc < sc_.defaults.sched.optimizer.min_limit_mc || grant_mc > st.cpu_available() ||
      mem_need > st.mem_available())
    return false;

  double eps = rng_.gaussian(0.0, stream.noise_cv);
  if (eps < -0.9) eps = -0.9;
  double t_job = stream.work_mc_s / grant_mc * (1.0 + eps);

  RunningJob run;
  run.job = job;
  run.stream_index = stream_by_key_.at(job.key);
  run.limit_mc = grant_mc;
  run.mem_mb = static_cast<int>(std::ceil(mem_need));
  run.started_at = now_;
  run.t_job = t_job;
  run.epsilon = eps;

  st.cpu_busy_mc += grant_mc;
  st.mem_busy_mb += run.mem_mb;
  std::uint64_t run_id = ++run_counter_;
  double occupancy = sc_.defaults.overheads.t_cstart_s + t_job + sc_.defaults.overheads.t_cstop_s;
  st.running.emplace(run_id, std::move(run));
  push({now_ + occupancy, EvJobFinish, 0, id, {}, 0, run_id, 0, false});
  logf("node=" + id + " start job=" + job.key.to_string() + " limit=" + inum(grant_mc) +
       " t_job=" + fnum(t_job, 3));
  return true;
}

void Engine::handle_arrival(const NodeId& id, std::size_t token) {
  TrainingJob& job = token_pool_.at(token);
  NodeState& st = nodes_.at(id);
  if (!st.joined) {
    // The carrier found a dead endpoint; with nobody to re-route, the
    // iteration is lost.
    record_drop(job, DropReason::NoFeasibleNode, id);
    return;
  }

  bool rechecked = false;
  while (true) {
    ScheduleDecision d = decide(id, job);
    if (d.kind == DecisionKind::Drop) {
      record_drop(job, d.reason, id);
      return;
    }
    if (d.kind == DecisionKind::Forward) {
      LinkMetrics lm = sc_.topology.link_metrics(id, d.target, now_);
      double transfer = transfer_time_s(job.payload_bytes, {lm});
      job.hops_remaining -= 1;
      job.visited.push_back(d.target);
      logf("node=" + id + " forward job=" + job.key.to_string() + " to=" + d.target +
           " transfer=" + fnum(transfer, 3) + " hops_left=" + inum(job.hops_remaining));
      push({now_ + transfer, EvJobArrive, 0, d.target, id, token, 0, 0, false});
      return;
    }
    if (try_start(id, token, d.limit_mc)) return;
    // The snapshot behind the decision was stale. Refresh it and decide
    // again; the second pass sees exactly what admission checked, so it
    // cannot bounce back here with the same grant.
    if (rechecked) {
      record_drop(job, DropReason::NoFeasibleNode, id);
      return;
    }
    scrape_now(st);
    rechecked = true;
    logf("node=" + id + " admission_retry job=" + job.key.to_string(), true);
  }
}

void Engine::handle_trigger(const Event& ev) {
  const StreamSpec& stream = sc_.streams[ev.stream_index];
  double next = now_ + stream.t_period_s();
  if (next <= sc_.defaults.duration_s)
    push({next, EvTrigger, 0, stream.node, {}, 0, 0, ev.stream_index, false});

  NodeState& home = nodes_.at(stream.node);
  if (!home.joined) return; // offline device produces no samples

  report_.jobs.at(stream.job_key()).triggers += 1;
  JobTracker& tracker = trackers_.at(stream.job_key());
  logf("node=" + stream.node + " trigger job=" + stream.job_key().to_string());
  if (tracker.active) {
    TrainingJob ghost;
    ghost.key = stream.job_key();
    ghost.triggered_at_s = now_;
    ghost.t_period_s = stream.t_period_s();
    ghost.origin = stream.node;
    ghost.visited = {stream.node};
    record_drop(ghost, DropReason::PreviousStillRunning, stream.node);
    return;
  }

  tracker.active = true;
  TrainingJob job;
  job.key = stream.job_key();
  job.triggered_at_s = now_;
  job.t_period_s = stream.t_period_s();
  job.payload_bytes = stream.payload_bytes;
  job.mem_demand_mb = stream.mem_peak_mb;
  job.origin = stream.node;
  job.visited = {stream.node};
  job.hops_remaining = sc_.defaults.max_hops;
  std::size_t token = token_pool_.size();
  token_pool_.push_back(std::move(job));
  handle_arrival(stream.node, token);
}

void Engine::handle_finish(const Event& ev) {
  NodeState& st = nodes_.at(ev.node);
  auto rit = st.running.find(ev.run_id);
  if (rit == st.running.end()) return; // aborted by churn
  RunningJob run = std::move(rit->second);
  st.running.erase(rit);
  st.cpu_busy_mc -= run.limit_mc;
  st.mem_busy_mb -= run.mem_mb;

  const StreamSpec& stream = sc_.streams[run.stream_index];
  double t_complete = now_ - run.job.triggered_at_s;
  bool met = t_complete <= run.job.t_period_s;
  Residual res = residual(t_complete, run.job.t_period_s);

  RuntimeModel& model = st.models[run.job.key];
  if (model.t_period_s == 0.0) {
    model.key = run.job.key;
    model.t_period_s = run.job.t_period_s;
  }
  model.limits.current_limit_mc = run.limit_mc;

  TrainingRecord rec;
  rec.iteration = static_cast<int>(++trackers_.at(run.job.key).executions);
  rec.node = ev.node;
  rec.cpu_limit_mc = run.limit_mc;
  rec.duration_s = run.t_job;
  rec.cpu_utilization = std::min(1.0, 1.0 / (1.0 + run.epsilon));
  rec.mem_peak_mb = stream.mem_peak_mb;
  rec.net_bytes = run.job.payload_bytes * static_cast<double>(run.job.visited.size() - 1);
  rec.met_period = met;
  rec.finished_at_s = now_;
  model.observe(rec, sc_.defaults.fit);
  adapt_limit(model.limits, met, st.spec.cpu_capacity_mc, sc_.defaults.sched.optimizer);

  int hops = static_cast<int>(run.job.visited.size()) - 1;
  report_.jobs.at(run.job.key).executions += 1;
  report_.hop_histogram.at(static_cast<std::size_t>(hops)) += 1;
  IterationRow row;
  row.key = run.job.key;
  row.iteration = rec.iteration;
  row.node = ev.node;
  row.hops = hops;
  row.limit_mc = run.limit_mc;
  row.t_job_s = run.t_job;
  row.t_complete_s = t_complete;
  row.relative_residual = res.relative;
  row.met_period = met;
  row.finished_at_s = now_;
  report_.iterations.push_back(row);

  trackers_.at(run.job.key).active = false;
  logf("node=" + ev.node + " finish job=" + run.job.key.to_string() + " iter=" +
       inum(rec.iteration) + " limit=" + inum(run.limit_mc) + " t_complete=" + fnum(t_complete, 3) +
       " residual=" + fnum(res.relative, 4) + " met=" + (met ? std::string("1") : std::string("0")) +
       " next_limit=" + inum(model.limits.current_limit_mc));
  broadcast_model(ev.node, run.job.key);
}

void Engine::broadcast_model(const NodeId& from, const JobKey& key) {
  NodeState& st = nodes_.at(from);
  auto mit = st.models.find(key);
  if (mit == st.models.end()) throw EngineError("broadcast without a model for " + key.to_string());
  std::size_t payload = model_pool_.size();
  model_pool_.push_back(std::make_shared<const RuntimeModel>(mit->second));

  // Latency-weighted shortest paths over the currently joined mesh; every
  // reachable node gets the update after the path delay.
  std::map<NodeId, double> dist;
  dist[from] = 0.0;
  using QE = std::pair<double, NodeId>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  pq.push({0.0, from});
  while (!pq.empty()) {
    auto [d, id] = pq.top();
    pq.pop();
    if (d > dist.at(id)) continue;
    for (const auto& peer : sc_.topology.neighbors(id, now_)) {
      LinkMetrics lm = sc_.topology.link_metrics(id, peer, now_);
      double nd = d + lm.latency_ms / 1000.0;
      auto it = dist.find(peer);
      if (it == dist.end() || nd < it->second) {
        dist[peer] = nd;
        pq.push({nd, peer});
      }
    }
  }
  for (const auto& [id, d] : dist) {
    if (id == from) continue;
    push({now_ + d, EvModelDelivery, 0, id, from, payload, 0, 0, false});
  }
}

void Engine::handle_churn(const Event& ev) {
  NodeState& st = nodes_.at(ev.node);
  if (ev.churn_join) {
    st.joined = true;
    st.cpu_busy_mc = 0;
    st.mem_busy_mb = 0;
    st.running.clear();
    st.neighbor_snaps.clear();
    scrape_now(st);
    logf("node=" + ev.node + " churn action=join");
    return;
  }
  st.joined = false;
  long long aborted = 0;
  for (auto& [run_id, run] : st.running) {
    report_.jobs.at(run.job.key).aborted += 1;
    trackers_.at(run.job.key).active = false;
    ++aborted;
    logf("node=" + ev.node + " abort job=" + run.job.key.to_string() +
         " ran=" + fnum(now_ - run.started_at, 3));
  }
  st.running.clear();
  st.cpu_busy_mc = 0;
  st.mem_busy_mb = 0;
  logf("node=" + ev.node + " churn action=leave aborted=" + inum(aborted));
}

void Engine::handle_latency_sample() {
  for (const auto& [k, link] : sc_.topology.links()) {
    LatencySample s;
    s.time_s = now_;
    s.a = link.a;
    s.b = link.b;
    s.latency_ms = link.latency_ms.value_at(now_);
    report_.latency.push_back(s);
  }
  logf("latency_sample links=" + inum(static_cast<long long>(sc_.topology.links().size())), true);
  double next = now_ + sc_.defaults.latency_sample_interval_s;
  if (next <= sc_.defaults.duration_s)
    push({next, EvLatencySample, 0, {}, {}, 0, 0, 0, false});
}

void Engine::audit() {
  for (const auto& [id, st] : nodes_) {
    if (st.cpu_busy_mc < 0 || st.mem_busy_mb < 0)
      throw EngineError("negative busy capacity on " + id);
    if (st.cpu_reserved_mc + st.cpu_busy_mc > st.spec.cpu_capacity_mc)
      throw EngineError("cpu over-committed on " + id);
    if (st.mem_reserved_mb + st.mem_busy_mb > st.spec.mem_capacity_mb)
      throw EngineError("memory over-committed on " + id);
    int cpu = 0, mem = 0;
    for (const auto& [run_id, run] : st.running) {
      cpu += run.limit_mc;
      mem += run.mem_mb;
    }
    if (cpu != st.cpu_busy_mc || mem != st.mem_busy_mb)
      throw EngineError("running jobs out of sync with busy counters on " + id);
  }
}

void Engine::final_checks() const {
  for (const auto& [key, counts] : report_.jobs) {
    if (counts.triggers != counts.executions + counts.dropped_total())
      throw EngineError("trigger accounting broken for " + key.to_string());
  }
  long long hop_sum = 0;
  for (long long h : report_.hop_histogram) hop_sum += h;
  JobCounts totals = report_.totals();
  if (hop_sum != totals.executions) throw EngineError("hop histogram out of sync with executions");
  for (const auto& [id, st] : nodes_) {
    if (!st.running.empty()) throw EngineError("job still running after drain on " + id);
    if (st.cpu_busy_mc != 0 || st.mem_busy_mb != 0)
      throw EngineError("capacity not released after drain on " + id);
  }
}

void Engine::handle(const Event& ev) {
  now_ = ev.time;
  switch (ev.kind) {
    case EvChurn: handle_churn(ev); break;
    case EvJobFinish: handle_finish(ev); break;
    case EvScrape: handle_scrape(ev.node); break;
    case EvGossipSend: handle_gossip_send(ev.node); break;
    case EvGossipDelivery: handle_gossip_delivery(ev); break;
    case EvModelDelivery: handle_model_delivery(ev); break;
    case EvJobArrive: handle_arrival(ev.node, ev.payload); break;
    case EvTrigger: handle_trigger(ev); break;
    case EvLatencySample: handle_latency_sample(); break;
    default: throw EngineError("unknown event kind");
  }
  audit();
}

RunResult Engine::run() {
  init();
  double last = 0.0;
  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    if (ev.time < last) throw EngineError("event time went backwards");
    last = ev.time;
    handle(ev);
  }
  final_checks();
  return {std::move(report_), std::move(log_)};
}

} // namespace

RunResult run_scenario(const Scenario& scenario, const RunConfig& cfg) {
  scenario.validate();
  return Engine(scenario, cfg).run();
}

} // namespace los
