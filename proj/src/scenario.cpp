#include "los/scenario.hpp"

#include "los/errors.hpp"
#include "los/text.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace los {

using nlohmann::json;

void Scenario::validate() const {
  std::vector<std::string> bad = topology.validate();
  if (name.empty()) bad.push_back("scenario has no name");
  if (defaults.duration_s <= 0.0) bad.push_back("duration must be positive");
  if (defaults.gossip_interval_s <= 0.0) bad.push_back("gossip interval must be positive");
  if (defaults.scrape_interval_s <= 0.0) bad.push_back("scrape interval must be positive");
  if (defaults.latency_sample_interval_s <= 0.0)
    bad.push_back("latency sample interval must be positive");
  if (defaults.max_hops < 0) bad.push_back("max hops must be non-negative");
  if (streams.empty()) bad.push_back("scenario declares no streams");

  std::set<JobKey> keys;
  std::map<NodeId, long long> cpu_reserved, mem_reserved;
  for (const auto& s : streams) {
    std::string tag = "stream " + s.stream_id + ": ";
    if (!topology.has_node(s.node)) {
      bad.push_back(tag + "unknown node " + s.node);
      continue;
    }
    if (!keys.insert(s.job_key()).second)
      bad.push_back(tag + "duplicate job key " + s.job_key().to_string());
    if (s.sample_interval_s <= 0.0) bad.push_back(tag + "sample interval must be positive");
    if (s.trigger_every < 1) bad.push_back(tag + "trigger_every must be at least 1");
    if (s.work_mc_s <= 0.0) bad.push_back(tag + "work must be positive");
    if (s.payload_bytes < 0.0) bad.push_back(tag + "payload must be non-negative");
    if (s.noise_cv < 0.0 || s.noise_cv >= 0.5) bad.push_back(tag + "noise_cv outside [0, 0.5)");
    if (s.mem_peak_mb < 0.0) bad.push_back(tag + "mem_peak must be non-negative");
    if (s.cpu_reservation_mc < 0 || s.mem_reservation_mb < 0)
      bad.push_back(tag + "reservations must be non-negative");
    cpu_reserved[s.node] += s.cpu_reservation_mc;
    mem_reserved[s.node] += s.mem_reservation_mb;
  }
  for (const auto& [id, mc] : cpu_reserved)
    if (mc > topology.node(id).cpu_capacity_mc)
      bad.push_back("node " + id + ": stream cpu reservations exceed capacity");
  for (const auto& [id, mb] : mem_reserved)
    if (mb > topology.node(id).mem_capacity_mb)
      bad.push_back("node " + id + ": stream memory reservations exceed capacity");

  if (!bad.empty()) {
    std::string msg = "scenario '" + name + "' invalid:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ValidationError(msg);
  }
}

Scenario Scenario::with_streams(std::size_t n) const {
  if (n == 0 || n > streams.size())
    throw ValidationError("scenario '" + name + "' declares " +
                          inum(static_cast<long long>(streams.size())) + " streams, cannot take " +
                          inum(static_cast<long long>(n)));
  Scenario out = *this;
  out.streams.resize(n);
  return out;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Trace parse_trace(const json& j, double duration_s, const std::string& where) {
  if (j.is_number()) return Trace::constant(j.get<double>());
  if (!j.is_object()) throw ValidationError(where + ": trace must be a number or an object");
  std::string type = j.value("type", "");
  if (type == "sinusoid") {
    return Trace::sinusoid(j.at("base").get<double>(), j.at("amplitude").get<double>(),
                           j.at("period_s").get<double>(), j.value("phase_rad", 0.0), duration_s);
  }
  if (type == "piecewise") {
    std::vector<TracePoint> pts;
    for (const auto& p : j.at("points"))
      pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return Trace(std::move(pts));
  }
  throw ValidationError(where + ": unknown trace type '" + type + "'");
}

Layer parse_layer(const std::string& s, const std::string& where) {
  if (s == "edge") return Layer::Edge;
  if (s == "fog") return Layer::Fog;
  if (s == "cloud") return Layer::Cloud;
  throw ValidationError(where + ": unknown layer '" + s + "'");
}

std::string layer_pair_key(Layer a, Layer b) {
  if (layer_rank(a) > layer_rank(b)) std::swap(a, b);
  return std::string(layer_name(a)) + "-" + layer_name(b);
}

void parse_defaults(const json& j, SimDefaults& d) {
  d.gossip_interval_s = j.value("gossip_interval_s", d.gossip_interval_s);
  d.scrape_interval_s = j.value("scrape_interval_s", d.scrape_interval_s);
  d.latency_sample_interval_s = j.value("latency_sample_interval_s", d.latency_sample_interval_s);
  d.max_hops = j.value("max_hops", d.max_hops);
  d.overheads.t_cstart_s = j.value("t_cstart_s", d.overheads.t_cstart_s);
  d.overheads.t_cstop_s = j.value("t_cstop_s", d.overheads.t_cstop_s);
  d.fit.history_cap = j.value("history_cap", d.fit.history_cap);
  d.fit.min_fit_records = j.value("min_fit_records", d.fit.min_fit_records);
  d.fit.k_sigma = j.value("k_sigma", d.fit.k_sigma);
  d.sched.coldstart_threshold = j.value("coldstart_threshold", d.sched.coldstart_threshold);
  d.sched.weight_residual = j.value("weight_residual", d.sched.weight_residual);
  d.sched.weight_load = j.value("weight_load", d.sched.weight_load);
  d.sched.optimizer.headroom = j.value("headroom", d.sched.optimizer.headroom);
  d.sched.optimizer.min_limit_mc = j.value("min_limit_mc", d.sched.optimizer.min_limit_mc);
  d.sched.optimizer.shrink_factor = j.value("shrink_factor", d.sched.optimizer.shrink_factor);
  d.sched.optimizer.grow_factor = j.value("grow_factor", d.sched.optimizer.grow_factor);
}

} // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid json: ") + e.what());
  }

  Scenario sc;
  try {
    sc.name = j.at("name").get<std::string>();
    sc.defaults.duration_s = j.at("duration_s").get<double>();
    if (j.contains("defaults")) parse_defaults(j.at("defaults"), sc.defaults);

    for (const auto& n : j.at("nodes")) {
      NodeSpec spec;
      spec.id = n.at("id").get<std::string>();
      spec.layer = parse_layer(n.at("layer").get<std::string>(), "node " + spec.id);
      spec.cpu_capacity_mc = n.at("cpu_mc").get<int>();
      spec.mem_capacity_mb = n.at("mem_mb").get<int>();
      spec.gateway = n.value("gateway", false);
      sc.topology.add_node(spec);
    }

    const json& links = j.at("links");
    std::string mode = links.at("mode").get<std::string>();
    if (mode == "layered") {
      const json& classes = links.at("classes");
      build_layered_links(sc.topology, [&](const NodeSpec& a, const NodeSpec& b) {
        std::string key = layer_pair_key(a.layer, b.layer);
        if (!classes.contains(key))
          throw ValidationError("links.classes missing entry for " + key);
        const json& cls = classes.at(key);
        LinkTraces t;
        t.latency_ms = parse_trace(cls.at("latency_ms"), sc.defaults.duration_s, key);
        t.bandwidth_bps = parse_trace(cls.at("bandwidth_bps"), sc.defaults.duration_s, key);
        return t;
      });
    } else if (mode == "explicit") {
      for (const auto& l : links.at("list")) {
        LinkState link;
        link.a = l.at("a").get<std::string>();
        link.b = l.at("b").get<std::string>();
        std::string where = "link " + link.a + "-" + link.b;
        link.latency_ms = parse_trace(l.at("latency_ms"), sc.defaults.duration_s, where);
        link.bandwidth_bps = parse_trace(l.at("bandwidth_bps"), sc.defaults.duration_s, where);
        sc.topology.add_link(std::move(link));
      }
    } else {
      throw ValidationError("links.mode must be 'layered' or 'explicit'");
    }

    for (const auto& c : j.value("churn", json::array())) {
      ChurnEvent ev;
      ev.time_s = c.at("time_s").get<double>();
      ev.node = c.at("node").get<std::string>();
      std::string action = c.at("action").get<std::string>();
      if (action == "join")
        ev.join = true;
      else if (action == "leave")
        ev.join = false;
      else
        throw ValidationError("churn action must be 'join' or 'leave'");
      sc.topology.add_churn(ev);
    }
    for (const auto& id : j.value("initially_absent", json::array()))
      sc.topology.set_initially_joined(id.get<std::string>(), false);

    for (const auto& s : j.at("streams")) {
      StreamSpec spec;
      spec.stream_id = s.at("stream_id").get<std::string>();
      spec.model_id = s.at("model_id").get<std::string>();
      spec.node = s.at("node").get<std::string>();
      spec.sample_interval_s = s.at("sample_interval_s").get<double>();
      spec.trigger_every = s.at("trigger_every").get<int>();
      spec.payload_bytes = s.at("payload_bytes").get<double>();
      spec.cpu_reservation_mc = s.value("cpu_reservation_mc", 0);
      spec.mem_reservation_mb = s.value("mem_reservation_mb", 0);
      spec.work_mc_s = s.at("work_mc_s").get<double>();
      spec.noise_cv = s.value("noise_cv", 0.0);
      spec.mem_peak_mb = s.value("mem_peak_mb", 0.0);
      sc.streams.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario field error: ") + e.what());
  }

  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

namespace {

// Small deterministic per-link phase shift so parallel links do not move in
// lockstep; derived from the node ids, not from the run seed.
double phase_jitter(const NodeSpec& a, const NodeSpec& b) {
  return static_cast<double>(fnv1a(a.id + "|" + b.id) % 1000) / 1000.0 * 0.6;
}

Scenario make_testbed() {
  Scenario sc;
  sc.name = "testbed";
  sc.defaults.duration_s = 1440.0;
  // Container runtimes rarely grant shares below 100m, so the optimizer floor
  // sits there and the limit glides down onto it instead of hunting.
  sc.defaults.sched.optimizer.min_limit_mc = 100;

  for (int i = 1; i <= 5; ++i) {
    NodeSpec n;
    n.id = "edge-" + std::to_string(i);
    n.layer = Layer::Edge;
    n.cpu_capacity_mc = 1000;
    n.mem_capacity_mb = 1024;
    n.gateway = i == 1;
    sc.topology.add_node(n);
  }
  for (int i = 1; i <= 4; ++i) {
    NodeSpec n;
    n.id = "fog-" + std::to_string(i);
    n.layer = Layer::Fog;
    n.cpu_capacity_mc = 1000;
    n.mem_capacity_mb = 2048;
    n.gateway = i == 1;
    sc.topology.add_node(n);
  }
  for (int i = 1; i <= 6; ++i) {
    NodeSpec n;
    n.id = "cloud-" + std::to_string(i);
    n.layer = Layer::Cloud;
    n.cpu_capacity_mc = 2000;
    n.mem_capacity_mb = 4096;
    sc.topology.add_node(n);
  }

  double dur = sc.defaults.duration_s;
  build_layered_links(sc.topology, [&](const NodeSpec& a, const NodeSpec& b) {
    double jit = phase_jitter(a, b);
    std::string key = layer_pair_key(a.layer, b.layer);
    LinkTraces t;
    if (key == "edge-edge") {
      t.latency_ms = Trace::sinusoid(8.0, 6.0, 300.0, jit, dur);
      t.bandwidth_bps = Trace::constant(2e6);
    } else if (key == "edge-fog") {
      // The uplink drifts from ~10ms toward ~50ms over the run.
      t.latency_ms = Trace::sinusoid(30.0, 20.0, 4.0 * dur, -M_PI / 2.0 + jit * 0.2, dur);
      t.bandwidth_bps = Trace::constant(1.5e6);
    } else if (key == "fog-fog") {
      t.latency_ms = Trace::sinusoid(5.0, 2.0, 600.0, jit, dur);
      t.bandwidth_bps = Trace::constant(1e7);
    } else if (key == "fog-cloud") {
      // Metered uplink out of the fog site; shipping a training payload up
      // here costs seconds, so the cloud only pays off for slack periods.
      t.latency_ms = Trace::sinusoid(40.0, 10.0, 1200.0, jit, dur);
      t.bandwidth_bps = Trace::constant(2e5);
    } else { // cloud-cloud
      t.latency_ms = Trace::sinusoid(2.0, 1.0, 600.0, jit, dur);
      t.bandwidth_bps = Trace::constant(5e7);
    }
    return t;
  });

  // Two streams per edge device, the gateway device first, so prefixes of
  // this list give the 2/4/6/8/10 stream configurations.
  for (int i = 0; i < 10; ++i) {
    StreamSpec s;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", i + 1);
    s.stream_id = std::string("s") + buf;
    s.model_id = std::string("m") + buf;
    // Spread across devices, gateway first so every prefix of the stream list
    // still touches it; repeats land on the non-gateway devices.
    static const int host[10] = {1, 2, 3, 4, 5, 2, 3, 4, 5, 2};
    s.node = "edge-" + std::to_string(host[i]);
    s.sample_interval_s = 0.020 + 0.0025 * (i % 5);
    s.trigger_every = 1000;
    s.payload_bytes = 1e6;
    // The resident prediction service: its cpu share plus its working set.
    // One stream's footprint already leaves less free memory than a training
    // peak needs, so the hosting device can never train its own model. The
    // gateway's service is lighter, which also keeps it the least loaded hop.
    s.cpu_reservation_mc = host[i] == 1 ? 200 : 300;
    s.mem_reservation_mb = 256;
    // 80 mc-seconds of work per second of period: at the 100mc floor a run
    // takes 80% of its period, so one node sustains one training at a time.
    s.work_mc_s = 80.0 * s.t_period_s();
    s.noise_cv = 0.04;
    s.mem_peak_mb = 800.0;
    sc.streams.push_back(std::move(s));
  }
  return sc;
}

Scenario make_edge26() {
  Scenario sc;
  sc.name = "edge26";
  sc.defaults.duration_s = 2400.0;
  sc.defaults.sched.optimizer.min_limit_mc = 100;

  for (int i = 1; i <= 26; ++i) {
    NodeSpec n;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", i);
    n.id = std::string("dev-") + buf;
    n.layer = Layer::Edge;
    n.cpu_capacity_mc = 1000;
    n.mem_capacity_mb = 1024;
    sc.topology.add_node(n);
  }

  double dur = sc.defaults.duration_s;
  build_layered_links(sc.topology, [&](const NodeSpec& a, const NodeSpec& b) {
    LinkTraces t;
    t.latency_ms = Trace::sinusoid(5.0, 2.0, 300.0, phase_jitter(a, b), dur);
    t.bandwidth_bps = Trace::constant(1e7);
    return t;
  });

  for (int i = 0; i < 26; ++i) {
    StreamSpec s;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", i + 1);
    s.stream_id = std::string("s") + buf;
    s.model_id = std::string("m") + buf;
    s.node = std::string("dev-") + buf;
    s.sample_interval_s = 0.020 + 0.0025 * (i % 5);
    s.trigger_every = 1000;
    s.payload_bytes = 1e5;
    s.cpu_reservation_mc = 100;
    s.mem_reservation_mb = 64;
    s.work_mc_s = 90.0 * s.t_period_s();
    s.noise_cv = 0.03;
    s.mem_peak_mb = 200.0;
    sc.streams.push_back(std::move(s));
  }
  return sc;
}

} // namespace

std::vector<std::string> builtin_scenario_names() { return {"testbed", "edge26"}; }

Scenario builtin_scenario(const std::string& name) {
  if (name == "testbed") return make_testbed();
  if (name == "edge26") return make_edge26();
  throw ValidationError("unknown builtin scenario '" + name + "'");
}

} // namespace los
