#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flownet/network.hpp"

namespace flownet {

/// Result of checking an external inflow against per-link capacities.
///
/// `min_slack` is the smallest value of
///     sum of capacities leaving U  -  sum of inflows entering at U
/// over all nonempty sets U of non-destination nodes, and `witness_cut` is
/// a smallest set attaining it (ties broken lexicographically). The empty
/// set, whose slack is always zero, is excluded so the slack measures the
/// tightest real bottleneck. `max_flow_value` is the super-source to
/// super-sink max flow; the inflow is feasible iff it equals the total
/// inflow, iff `min_slack` >= 0.
struct FeasibilityResult {
  bool feasible = false;
  double min_slack = 0.0;
  NodeSet witness_cut;
  double max_flow_value = 0.0;
  double total_inflow = 0.0;
};

/// Exact check via breadth-first augmenting-path max flow. `capacity` has
/// one entry per link, `inflow` one per node index (nonzero only at
/// origins). Throws negative_input or numerical_failure.
FeasibilityResult is_feasible(const FlowNetwork& network, std::span<const double> capacity,
                              std::span<const double> inflow);

/// Direct enumeration of every subset of non-destination nodes. Throws
/// too_large beyond 20 such nodes.
FeasibilityResult brute_force_feasible(const FlowNetwork& network, std::span<const double> capacity,
                                       std::span<const double> inflow);

/// Slack of a single cut set.
double cut_slack(const FlowNetwork& network, std::span<const double> capacity, std::span<const double> inflow,
                 const NodeSet& cut);

/// Dense real-valued max-flow solver (Edmonds-Karp). Exposed for reuse and
/// testing; arcs between the same pair accumulate capacity.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t node_count);

  void add_arc(std::size_t from, std::size_t to, double capacity);
  double solve(std::size_t source, std::size_t sink);
  /// Nodes reachable from the source in the final residual graph.
  std::vector<bool> source_side() const;

 private:
  struct Arc {
    std::size_t to;
    std::size_t reverse;
    double residual;
  };
  std::vector<std::vector<Arc>> adjacency_;
  std::size_t source_ = 0;
};

}  // namespace flownet
