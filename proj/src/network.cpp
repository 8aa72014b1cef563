#include "flownet/network.hpp"

#include <cmath>
#include <deque>
#include <string>

#include <fmt/format.h>

#include "flownet/error.hpp"

namespace flownet {

FlowNetwork FlowNetwork::build(std::vector<NodeId> nodes, std::vector<LinkSpec> links) {
  FlowNetwork net;
  net.nodes_ = std::move(nodes);
  const std::size_t n = net.nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!net.index_.emplace(net.nodes_[i].value, i).second) {
      throw Error(Errc::duplicate_node, fmt::format("node {} declared twice", net.nodes_[i].value));
    }
  }

  net.outgoing_.resize(n);
  net.incoming_.resize(n);
  net.links_.reserve(links.size());
  for (std::size_t k = 0; k < links.size(); ++k) {
    const LinkSpec& spec = links[k];
    const auto tail = net.index_.find(spec.tail.value);
    const auto head = net.index_.find(spec.head.value);
    if (tail == net.index_.end() || head == net.index_.end()) {
      throw Error(Errc::dangling_endpoint,
                  fmt::format("link {} ({} -> {}) has an undeclared endpoint", k, spec.tail.value,
                              spec.head.value));
    }
    if (tail->second == head->second) {
      throw Error(Errc::self_loop, fmt::format("link {} is a self-loop at node {}", k, spec.tail.value));
    }
    if (!(spec.lane_count > 0.0) || !std::isfinite(spec.lane_count) || !(spec.max_speed > 0.0) ||
        !std::isfinite(spec.max_speed)) {
      throw Error(Errc::non_positive_parameter,
                  fmt::format("link {} needs positive finite lane count and max speed", k));
    }
    const LinkId id{k};
    net.links_.push_back(Link{id, spec.tail, spec.head, tail->second, head->second, spec.lane_count,
                              spec.max_speed});
    net.outgoing_[tail->second].push_back(id);
    net.incoming_[head->second].push_back(id);
  }

  net.kinds_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const bool no_out = net.outgoing_[v].empty();
    const bool no_in = net.incoming_[v].empty();
    if (no_out && no_in) {
      throw Error(Errc::isolated_node, fmt::format("node {} has no links", net.nodes_[v].value));
    }
    if (no_out) {
      net.kinds_[v] = NodeKind::destination;
      net.destinations_.push_back(v);
    } else if (no_in) {
      net.kinds_[v] = NodeKind::origin;
      net.origins_.push_back(v);
    } else {
      net.kinds_[v] = NodeKind::intermediate;
      net.intermediates_.push_back(v);
    }
  }
  if (net.destinations_.empty()) {
    throw Error(Errc::no_destination, "network has no destination node");
  }

  // Reverse reachability from the destinations.
  std::vector<bool> reaches(n, false);
  std::deque<std::size_t> queue;
  for (const std::size_t d : net.destinations_) {
    reaches[d] = true;
    queue.push_back(d);
  }
  while (!queue.empty()) {
    const std::size_t w = queue.front();
    queue.pop_front();
    for (const LinkId e : net.incoming_[w]) {
      const std::size_t v = net.links_[e.value].tail_index;
      if (!reaches[v]) {
        reaches[v] = true;
        queue.push_back(v);
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!reaches[v]) {
      throw Error(Errc::unreachable_destination,
                  fmt::format("node {} has no path to a destination", net.nodes_[v].value));
    }
  }
  return net;
}

std::size_t FlowNetwork::index_of(NodeId node) const {
  const auto it = index_.find(node.value);
  if (it == index_.end()) {
    throw Error(Errc::unknown_node, fmt::format("unknown node {}", node.value));
  }
  return it->second;
}

namespace {

std::vector<bool> membership(const FlowNetwork& network, const NodeSet& cut) {
  std::vector<bool> in(network.node_count(), false);
  for (const NodeId node : cut) {
    const std::size_t v = network.index_of(node);
    if (network.kind(v) == NodeKind::destination) {
      throw Error(Errc::destination_in_cut,
                  fmt::format("destination {} cannot belong to a cut set", node.value));
    }
    in[v] = true;
  }
  return in;
}

}  // namespace

std::vector<LinkId> outgoing_cut(const FlowNetwork& network, const NodeSet& cut) {
  const std::vector<bool> in = membership(network, cut);
  std::vector<LinkId> result;
  for (const Link& link : network.links()) {
    if (in[link.tail_index] && !in[link.head_index]) result.push_back(link.id);
  }
  return result;
}

std::vector<LinkId> incoming_cut(const FlowNetwork& network, const NodeSet& cut) {
  const std::vector<bool> in = membership(network, cut);
  std::vector<LinkId> result;
  for (const Link& link : network.links()) {
    if (!in[link.tail_index] && in[link.head_index]) result.push_back(link.id);
  }
  return result;
}

NodeSet non_destination_nodes(const FlowNetwork& network) {
  NodeSet result;
  for (std::size_t v = 0; v < network.node_count(); ++v) {
    if (network.kind(v) != NodeKind::destination) result.insert(network.node_at(v));
  }
  return result;
}

}  // namespace flownet
