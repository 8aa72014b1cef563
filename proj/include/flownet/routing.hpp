#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flownet/fundamental.hpp"
#include "flownet/network.hpp"

namespace flownet {

/// Local routing rule R^v: splits a node's inflow over its outgoing links
/// using only those links' densities. `densities`, `links` and `routed` are
/// aligned with the node's outgoing link list.
class RoutingPolicy {
 public:
  virtual ~RoutingPolicy() = default;

  virtual std::string_view name() const = 0;

  /// Writes the per-link routed flow. Returns false, with `routed` zeroed,
  /// when every outgoing link is jammed.
  virtual bool route(std::span<const double> densities, std::span<const LinkPhysics* const> links,
                     double inflow, std::span<double> routed) const = 0;
};

/// Routes inflow in proportion to each link's maximum sustainable inflow.
class ProportionalRouting final : public RoutingPolicy {
 public:
  std::string_view name() const override { return "proportional"; }
  bool route(std::span<const double> densities, std::span<const LinkPhysics* const> links, double inflow,
             std::span<double> routed) const override;
};

/// Splits inflow evenly over non-jammed links, ignoring congestion. Conserves
/// flow but is not congestion aware; kept as a demonstration counterexample.
class EqualSplitRouting final : public RoutingPolicy {
 public:
  std::string_view name() const override { return "broken_equal_split"; }
  bool route(std::span<const double> densities, std::span<const LinkPhysics* const> links, double inflow,
             std::span<double> routed) const override;
};

/// Names accepted: "proportional", "broken_equal_split".
std::shared_ptr<const RoutingPolicy> make_routing_policy(std::string_view name);

/// Proportional split as a value; throws all_links_jammed.
std::vector<double> proportional_route(std::span<const double> densities,
                                       std::span<const LinkPhysics* const> links, double inflow);

enum class ConservationRule { conservation, jam_exclusion, nonnegativity };

struct ConservationViolation {
  std::size_t node = 0;
  ConservationRule rule = ConservationRule::conservation;
  std::vector<double> densities;
  double inflow = 0.0;
  std::optional<LinkId> link;
  /// Routed total minus inflow for `conservation`, the offending routed
  /// amount otherwise.
  double residual = 0.0;
};

struct ConservationReport {
  std::size_t samples = 0;
  std::vector<ConservationViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Samples (density profile, inflow) pairs at one node, including the
/// all-free, single-jammed, all-but-one-jammed and all-jammed corners, and
/// checks flow conservation and jam exclusion.
ConservationReport check_conservation(const RoutingPolicy& policy, const FlowNetwork& network,
                                      std::span<const LinkPhysics> physics, std::size_t node_index,
                                      std::size_t samples, std::uint64_t seed = 1);

struct AwarenessViolation {
  std::size_t node = 0;
  LinkId link;
  std::vector<double> densities;
  double inflow = 0.0;
  double routed = 0.0;
  double bound = 0.0;
};

struct AwarenessReport {
  std::vector<double> checked_profile;
  std::size_t samples = 0;
  std::vector<AwarenessViolation> violations;
  bool aware() const { return violations.empty(); }
};

/// Empirical congestion-awareness check at `rho_star`: for sampled nodes,
/// profiles and inflows not exceeding the node's total sustainable inflow,
/// every link at or above its rho_star entry must receive no more than its
/// maximum sustainable inflow. `samples_per_node` random samples are drawn on
/// top of deterministic corner profiles.
AwarenessReport check_congestion_aware(const RoutingPolicy& policy, const FlowNetwork& network,
                                       std::span<const LinkPhysics> physics,
                                       std::span<const double> rho_star, std::size_t samples_per_node,
                                       std::uint64_t seed = 1);

}  // namespace flownet
