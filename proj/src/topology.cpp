#include "los/topology.hpp"

#include "los/errors.hpp"

#include <algorithm>

namespace los {

const char* layer_name(Layer layer) {
  switch (layer) {
    case Layer::Edge: return "edge";
    case Layer::Fog: return "fog";
    case Layer::Cloud: return "cloud";
  }
  return "?";
}

int layer_rank(Layer layer) {
  switch (layer) {
    case Layer::Edge: return 0;
    case Layer::Fog: return 1;
    case Layer::Cloud: return 2;
  }
  return -1;
}

std::pair<NodeId, NodeId> Topology::key(const NodeId& a, const NodeId& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void Topology::add_node(NodeSpec spec) {
  if (spec.id.empty()) throw ValidationError("node id must not be empty");
  if (nodes_.count(spec.id)) throw ValidationError("duplicate node id: " + spec.id);
  adjacency_[spec.id]; // ensure entry exists even for isolated nodes
  initially_joined_[spec.id] = true;
  nodes_.emplace(spec.id, std::move(spec));
}

void Topology::add_link(LinkState link) {
  if (!nodes_.count(link.a) || !nodes_.count(link.b))
    throw ValidationError("link references unknown node: " + link.a + " - " + link.b);
  if (link.a == link.b) throw ValidationError("self link on node " + link.a);
  auto k = key(link.a, link.b);
  if (links_.count(k)) throw ValidationError("duplicate link: " + k.first + " - " + k.second);
  adjacency_[link.a].push_back(link.b);
  adjacency_[link.b].push_back(link.a);
  std::sort(adjacency_[link.a].begin(), adjacency_[link.a].end());
  std::sort(adjacency_[link.b].begin(), adjacency_[link.b].end());
  link.a = k.first;
  link.b = k.second;
  links_.emplace(k, std::move(link));
}

void Topology::add_churn(ChurnEvent ev) {
  if (!nodes_.count(ev.node)) throw ValidationError("churn references unknown node: " + ev.node);
  churn_.push_back(std::move(ev));
  std::stable_sort(churn_.begin(), churn_.end(),
                   [](const ChurnEvent& x, const ChurnEvent& y) { return x.time_s < y.time_s; });
}

void Topology::set_initially_joined(const NodeId& id, bool joined) {
  if (!nodes_.count(id)) throw ValidationError("unknown node: " + id);
  initially_joined_[id] = joined;
}

bool Topology::has_node(const NodeId& id) const { return nodes_.count(id) > 0; }

const NodeSpec& Topology::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ValidationError("unknown node: " + id);
  return it->second;
}

bool Topology::adjacent(const NodeId& a, const NodeId& b) const {
  return links_.count(key(a, b)) > 0;
}

const std::vector<NodeId>& Topology::all_neighbors(const NodeId& id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw ValidationError("unknown node: " + id);
  return it->second;
}

std::vector<NodeId> Topology::neighbors(const NodeId& id, double time_s) const {
  std::vector<NodeId> out;
  for (const auto& n : all_neighbors(id))
    if (joined(n, time_s)) out.push_back(n);
  return out;
}

LinkMetrics Topology::link_metrics(const NodeId& a, const NodeId& b, double time_s) const {
  auto it = links_.find(key(a, b));
  if (it == links_.end())
    throw ValidationError("no link between " + a + " and " + b);
  return {it->second.latency_ms.value_at(time_s), it->second.bandwidth_bps.value_at(time_s)};
}

bool Topology::joined(const NodeId& id, double time_s) const {
  auto it = initially_joined_.find(id);
  if (it == initially_joined_.end()) throw ValidationError("unknown node: " + id);
  bool state = it->second;
  for (const auto& ev : churn_) {
    if (ev.time_s > time_s) break;
    if (ev.node == id) state = ev.join;
  }
  return state;
}

std::set<NodeId> Topology::joined_set(double time_s) const {
  std::set<NodeId> out;
  for (const auto& [id, spec] : nodes_)
    if (joined(id, time_s)) out.insert(id);
  return out;
}

std::vector<std::string> Topology::validate() const {
  std::vector<std::string> bad;
  if (nodes_.empty()) {
    bad.push_back("topology has no nodes");
    return bad;
  }

  // Intra-layer meshes must be complete.
  std::map<Layer, std::vector<NodeId>> by_layer;
  for (const auto& [id, spec] : nodes_) by_layer[spec.layer].push_back(id);
  for (const auto& [layer, ids] : by_layer) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        if (!adjacent(ids[i], ids[j]))
          bad.push_back(std::string("missing ") + layer_name(layer) + " mesh link: " + ids[i] +
                        " - " + ids[j]);
  }

  // Cross-layer links only between adjacent layers, through the lower
  // layer's gateway.
  for (const auto& [k, link] : links_) {
    const NodeSpec& na = nodes_.at(link.a);
    const NodeSpec& nb = nodes_.at(link.b);
    int ra = layer_rank(na.layer);
    int rb = layer_rank(nb.layer);
    if (ra == rb) continue;
    if (std::abs(ra - rb) != 1) {
      bad.push_back("link skips a layer: " + link.a + " - " + link.b);
      continue;
    }
    const NodeSpec& lower = ra < rb ? na : nb;
    if (!lower.gateway)
      bad.push_back("cross-layer link not through a gateway: " + link.a + " - " + link.b);
  }

  // A layer with a layer above it needs a gateway to reach it.
  for (const auto& [layer, ids] : by_layer) {
    if (layer == Layer::Cloud) continue;
    Layer above = layer == Layer::Edge ? Layer::Fog : Layer::Cloud;
    if (!by_layer.count(above)) continue;
    bool found = false;
    for (const auto& id : ids)
      if (nodes_.at(id).gateway) found = true;
    if (!found)
      bad.push_back(std::string(layer_name(layer)) + " layer has no gateway");
  }

  // Gateways must actually reach every node of the layer above.
  for (const auto& [id, spec] : nodes_) {
    if (!spec.gateway || spec.layer == Layer::Cloud) continue;
    Layer above = spec.layer == Layer::Edge ? Layer::Fog : Layer::Cloud;
    auto it = by_layer.find(above);
    if (it == by_layer.end()) continue;
    for (const auto& up : it->second)
      if (!adjacent(id, up))
        bad.push_back("gateway " + id + " not linked to " + up);
  }

  for (const auto& [id, spec] : nodes_) {
    if (spec.cpu_capacity_mc <= 0) bad.push_back("node " + id + " has no cpu capacity");
    if (spec.mem_capacity_mb <= 0) bad.push_back("node " + id + " has no memory capacity");
  }

  for (const auto& [k, link] : links_) {
    if (!link.latency_ms.valid_positive())
      bad.push_back("non-positive latency on link " + link.a + " - " + link.b);
    if (!link.bandwidth_bps.valid_positive())
      bad.push_back("non-positive bandwidth on link " + link.a + " - " + link.b);
  }

  return bad;
}

void build_layered_links(Topology& topo,
                         const std::function<LinkTraces(const NodeSpec&, const NodeSpec&)>& make) {
  std::vector<const NodeSpec*> all;
  for (const auto& [id, spec] : topo.nodes()) all.push_back(&spec);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const NodeSpec& a = *all[i];
      const NodeSpec& b = *all[j];
      bool same_layer = a.layer == b.layer;
      bool gateway_up = std::abs(layer_rank(a.layer) - layer_rank(b.layer)) == 1 &&
                        (layer_rank(a.layer) < layer_rank(b.layer) ? a.gateway : b.gateway);
      if (!same_layer && !gateway_up) continue;
      LinkTraces t = make(a, b);
      topo.add_link({a.id, b.id, std::move(t.latency_ms), std::move(t.bandwidth_bps)});
    }
  }
}

} // namespace los
