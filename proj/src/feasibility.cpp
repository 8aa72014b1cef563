#include "flownet/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "flownet/error.hpp"

namespace flownet {

namespace {

constexpr double kSaturation = 1e-12;

void check_inputs(const FlowNetwork& network, std::span<const double> capacity, std::span<const double> inflow) {
  if (capacity.size() != network.link_count() || inflow.size() != network.node_count()) {
    throw Error(Errc::out_of_range, "capacity/inflow dimensions do not match the network");
  }
  for (const double c : capacity) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(Errc::negative_input, "capacities must be nonnegative");
  }
  for (std::size_t v = 0; v < inflow.size(); ++v) {
    if (!(inflow[v] >= 0.0) || !std::isfinite(inflow[v])) {
      throw Error(Errc::negative_input, "inflows must be nonnegative");
    }
    if (inflow[v] > 0.0 && network.kind(v) != NodeKind::origin) {
      throw Error(Errc::negative_input,
                  fmt::format("inflow declared at non-origin node {}", network.node_at(v).value));
    }
  }
}

double tolerance_for(double total_inflow, std::span<const double> capacity) {
  const double scale = std::max({1.0, total_inflow, std::accumulate(capacity.begin(), capacity.end(), 0.0)});
  return 1e-9 * scale;
}

// Smaller slack first, then fewer nodes, then lexicographic.
bool better_cut(double slack, const NodeSet& cut, double best_slack, const NodeSet& best, double tol) {
  if (slack < best_slack - tol) return true;
  if (slack > best_slack + tol) return false;
  if (cut.size() != best.size()) return cut.size() < best.size();
  return cut < best;
}

}  // namespace

MaxFlow::MaxFlow(std::size_t node_count) : adjacency_(node_count) {}

void MaxFlow::add_arc(std::size_t from, std::size_t to, double capacity) {
  for (Arc& arc : adjacency_[from]) {
    if (arc.to == to && adjacency_[to][arc.reverse].to == from) {
      arc.residual += capacity;
      return;
    }
  }
  adjacency_[from].push_back({to, adjacency_[to].size(), capacity});
  adjacency_[to].push_back({from, adjacency_[from].size() - 1, 0.0});
}

double MaxFlow::solve(std::size_t source, std::size_t sink) {
  source_ = source;
  const std::size_t n = adjacency_.size();
  std::size_t arc_count = 0;
  for (const auto& arcs : adjacency_) arc_count += arcs.size();
  const std::size_t max_augmentations = 10 * (n * arc_count + 1) + 1000;

  double total = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> parent(n);  // (node, arc index)
  std::vector<bool> seen(n);
  for (std::size_t iteration = 0;; ++iteration) {
    if (iteration > max_augmentations) {
      throw Error(Errc::numerical_failure, "max-flow augmentation limit exceeded");
    }
    std::fill(seen.begin(), seen.end(), false);
    std::deque<std::size_t> queue{source};
    seen[source] = true;
    while (!queue.empty() && !seen[sink]) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t i = 0; i < adjacency_[u].size(); ++i) {
        const Arc& arc = adjacency_[u][i];
        if (!seen[arc.to] && arc.residual > kSaturation) {
          seen[arc.to] = true;
          parent[arc.to] = {u, i};
          queue.push_back(arc.to);
        }
      }
    }
    if (!seen[sink]) break;

    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = parent[v].first) {
      bottleneck = std::min(bottleneck, adjacency_[parent[v].first][parent[v].second].residual);
    }
    for (std::size_t v = sink; v != source; v = parent[v].first) {
      Arc& arc = adjacency_[parent[v].first][parent[v].second];
      arc.residual -= bottleneck;
      adjacency_[arc.to][arc.reverse].residual += bottleneck;
    }
    total += bottleneck;
  }
  return total;
}

std::vector<bool> MaxFlow::source_side() const {
  std::vector<bool> seen(adjacency_.size(), false);
  std::deque<std::size_t> queue{source_};
  seen[source_] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const Arc& arc : adjacency_[u]) {
      if (!seen[arc.to] && arc.residual > kSaturation) {
        seen[arc.to] = true;
        queue.push_back(arc.to);
      }
    }
  }
  return seen;
}

double cut_slack(const FlowNetwork& network, std::span<const double> capacity, std::span<const double> inflow,
                 const NodeSet& cut) {
  double slack = 0.0;
  for (const LinkId e : outgoing_cut(network, cut)) slack += capacity[e.value];
  for (const NodeId v : cut) slack -= inflow[network.index_of(v)];
  return slack;
}

FeasibilityResult is_feasible(const FlowNetwork& network, std::span<const double> capacity,
                              std::span<const double> inflow) {
  check_inputs(network, capacity, inflow);
  const std::size_t n = network.node_count();
  const std::size_t source = n;
  const std::size_t sink = n + 1;

  FeasibilityResult result;
  result.total_inflow = std::accumulate(inflow.begin(), inflow.end(), 0.0);
  const double unbounded =
      1.0 + result.total_inflow + std::accumulate(capacity.begin(), capacity.end(), 0.0);
  const double tol = tolerance_for(result.total_inflow, capacity);

  auto build = [&]() {
    MaxFlow graph(n + 2);
    for (const std::size_t o : network.origins()) {
      if (inflow[o] > 0.0) graph.add_arc(source, o, inflow[o]);
    }
    // Parallel links merge into one arc here.
    for (const Link& link : network.links()) graph.add_arc(link.tail_index, link.head_index, capacity[link.id.value]);
    for (const std::size_t d : network.destinations()) graph.add_arc(d, sink, unbounded);
    return graph;
  };

  {
    MaxFlow graph = build();
    result.max_flow_value = graph.solve(source, sink);
  }

  // Forcing node x onto the source side gives the tightest cut containing x;
  // the minimum over x covers every nonempty cut set.
  bool have_best = false;
  double best_slack = 0.0;
  NodeSet best;
  for (std::size_t x = 0; x < n; ++x) {
    if (network.kind(x) == NodeKind::destination) continue;
    MaxFlow graph = build();
    graph.add_arc(source, x, unbounded);
    const double value = graph.solve(source, sink);
    const std::vector<bool> side = graph.source_side();
    NodeSet cut;
    for (std::size_t v = 0; v < n; ++v) {
      if (side[v]) cut.insert(network.node_at(v));
    }
    // The residual cut is exact; recompute its slack from the definition.
    const double slack = cut_slack(network, capacity, inflow, cut);
    if (std::abs(slack - (value - result.total_inflow)) > tol) {
      throw Error(Errc::numerical_failure, "max-flow value disagrees with its residual cut");
    }
    if (!have_best || better_cut(slack, cut, best_slack, best, tol)) {
      have_best = true;
      best_slack = slack;
      best = std::move(cut);
    }
  }
  result.min_slack = best_slack;
  result.witness_cut = std::move(best);
  result.feasible = result.max_flow_value >= result.total_inflow - tol;
  return result;
}

FeasibilityResult brute_force_feasible(const FlowNetwork& network, std::span<const double> capacity,
                                       std::span<const double> inflow) {
  check_inputs(network, capacity, inflow);
  std::vector<NodeId> candidates;
  for (std::size_t v = 0; v < network.node_count(); ++v) {
    if (network.kind(v) != NodeKind::destination) candidates.push_back(network.node_at(v));
  }
  if (candidates.size() > 20) {
    throw Error(Errc::too_large, fmt::format("{} non-destination nodes exceed the enumeration limit of 20",
                                             candidates.size()));
  }

  FeasibilityResult result;
  result.total_inflow = std::accumulate(inflow.begin(), inflow.end(), 0.0);
  const double tol = tolerance_for(result.total_inflow, capacity);
  bool have_best = false;
  double all_sets_min = 0.0;  // includes the empty set
  const std::uint64_t subsets = std::uint64_t{1} << candidates.size();
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    NodeSet cut;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) cut.insert(candidates[i]);
    }
    const double slack = cut_slack(network, capacity, inflow, cut);
    all_sets_min = std::min(all_sets_min, slack);
    if (!have_best || better_cut(slack, cut, result.min_slack, result.witness_cut, tol)) {
      have_best = true;
      result.min_slack = slack;
      result.witness_cut = std::move(cut);
    }
  }
  // Max-flow min-cut: the flow value is the total inflow plus the smallest
  // slack over all sets, the empty one included.
  result.max_flow_value = result.total_inflow + all_sets_min;
  result.feasible = result.min_slack >= -tol;
  return result;
}

}  // namespace flownet
