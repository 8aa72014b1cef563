#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

namespace flownet {

struct NodeId {
  std::int64_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

/// Position of a link in FlowNetwork::links(). Parallel links get distinct ids.
struct LinkId {
  std::size_t value = 0;
  auto operator<=>(const LinkId&) const = default;
};

enum class NodeKind { origin, intermediate, destination };

/// User-facing link description consumed by FlowNetwork::build.
struct LinkSpec {
  NodeId tail;
  NodeId head;
  double lane_count = 1.0;
  double max_speed = 1.0;
};

struct Link {
  LinkId id;
  NodeId tail;
  NodeId head;
  std::size_t tail_index = 0;
  std::size_t head_index = 0;
  double lane_count = 1.0;
  double max_speed = 1.0;
};

/// A set of non-destination nodes, as used for cuts.
using NodeSet = std::set<NodeId>;

/// Immutable directed multigraph where every node reaches a destination.
/// Node kinds are derived from the adjacency: destinations have no outgoing
/// links and origins have no incoming links.
class FlowNetwork {
 public:
  /// Throws Error with codes no_destination, unreachable_destination,
  /// dangling_endpoint, non_positive_parameter, self_loop, isolated_node or
  /// duplicate_node.
  static FlowNetwork build(std::vector<NodeId> nodes, std::vector<LinkSpec> links);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  std::span<const NodeId> nodes() const { return nodes_; }
  std::span<const Link> links() const { return links_; }
  const Link& link(LinkId id) const { return links_.at(id.value); }

  bool contains(NodeId node) const { return index_.contains(node.value); }
  /// Dense index of a node (its position in nodes()); throws unknown_node.
  std::size_t index_of(NodeId node) const;
  NodeId node_at(std::size_t index) const { return nodes_.at(index); }

  NodeKind kind(std::size_t node_index) const { return kinds_.at(node_index); }
  NodeKind kind(NodeId node) const { return kinds_[index_of(node)]; }

  std::span<const LinkId> outgoing(std::size_t node_index) const { return outgoing_.at(node_index); }
  std::span<const LinkId> incoming(std::size_t node_index) const { return incoming_.at(node_index); }

  std::span<const std::size_t> origins() const { return origins_; }
  std::span<const std::size_t> intermediates() const { return intermediates_; }
  std::span<const std::size_t> destinations() const { return destinations_; }

 private:
  FlowNetwork() = default;

  std::vector<NodeId> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::int64_t, std::size_t> index_;
  std::vector<NodeKind> kinds_;
  std::vector<std::vector<LinkId>> outgoing_;
  std::vector<std::vector<LinkId>> incoming_;
  std::vector<std::size_t> origins_;
  std::vector<std::size_t> intermediates_;
  std::vector<std::size_t> destinations_;
};

/// Links with tail in `cut` and head outside it. Throws destination_in_cut if
/// `cut` contains a destination and unknown_node for foreign nodes.
std::vector<LinkId> outgoing_cut(const FlowNetwork& network, const NodeSet& cut);

/// Links with head in `cut` and tail outside it.
std::vector<LinkId> incoming_cut(const FlowNetwork& network, const NodeSet& cut);

/// All nodes that are not destinations.
NodeSet non_destination_nodes(const FlowNetwork& network);

}  // namespace flownet
