#pragma once

#include "los/trace.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace los {

using NodeId = std::string;

enum class Layer { Edge, Fog, Cloud };

const char* layer_name(Layer layer);
int layer_rank(Layer layer);

struct NodeSpec {
  NodeId id;
  Layer layer = Layer::Edge;
  int cpu_capacity_mc = 0;   // millicores, 1 vCPU = 1000
  int mem_capacity_mb = 0;
  bool gateway = false;      // bridges this layer to the one above
};

struct LinkMetrics {
  double latency_ms = 0.0;
  double bandwidth_bps = 0.0;
};

// Undirected link. Endpoints are stored in lexicographic order so that
// (a,b) and (b,a) resolve to the same entry.
struct LinkState {
  NodeId a;
  NodeId b;
  Trace latency_ms;
  Trace bandwidth_bps;
};

struct ChurnEvent {
  double time_s = 0.0;
  NodeId node;
  bool join = false; // false means leave
};

// Static mesh plus a churn schedule. Nodes within a layer form a clique;
// across layers only gateways connect, and only to the directly adjacent
// layer. Joined state at time t is the initial membership with all churn
// events at or before t applied in order.
class Topology {
public:
  void add_node(NodeSpec spec);
  void add_link(LinkState link);
  void add_churn(ChurnEvent ev);
  void set_initially_joined(const NodeId& id, bool joined);

  bool has_node(const NodeId& id) const;
  const NodeSpec& node(const NodeId& id) const;
  const std::map<NodeId, NodeSpec>& nodes() const { return nodes_; }
  const std::map<std::pair<NodeId, NodeId>, LinkState>& links() const { return links_; }
  const std::vector<ChurnEvent>& churn() const { return churn_; }

  bool adjacent(const NodeId& a, const NodeId& b) const;
  // Neighbors of `id` that are joined at time t, sorted by id.
  std::vector<NodeId> neighbors(const NodeId& id, double time_s) const;
  // All neighbors regardless of joined state, sorted by id.
  const std::vector<NodeId>& all_neighbors(const NodeId& id) const;

  LinkMetrics link_metrics(const NodeId& a, const NodeId& b, double time_s) const;

  bool joined(const NodeId& id, double time_s) const;
  std::set<NodeId> joined_set(double time_s) const;

  // Structural checks: layer cliques complete, cross-layer links only
  // between adjacent layers through a gateway, every metric trace positive.
  // Returns human-readable violations, empty when the topology is sound.
  std::vector<std::string> validate() const;

private:
  static std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b);

  std::map<NodeId, NodeSpec> nodes_;
  std::map<std::pair<NodeId, NodeId>, LinkState> links_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;
  std::map<NodeId, bool> initially_joined_;
  std::vector<ChurnEvent> churn_;
};

// Wires up the standard mesh: cliques within each layer, the designated
// edge gateway connected to every fog node, the fog gateway to every cloud
// node. Metric traces for the generated links come from the callback.
struct LinkTraces {
  Trace latency_ms;
  Trace bandwidth_bps;
};
void build_layered_links(Topology& topo,
                         const std::function<LinkTraces(const NodeSpec&, const NodeSpec&)>& make);

} // namespace los
