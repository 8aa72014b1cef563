#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "flownet/fundamental.hpp"
#include "flownet/network.hpp"
#include "flownet/routing.hpp"

namespace flownet {

/// Everything needed to run the density dynamics. Shared pieces are
/// immutable; each run keeps its own state.
struct Scenario {
  std::shared_ptr<const FlowNetwork> network;
  std::vector<LinkPhysics> physics;
  /// External inflow per node index; nonzero only at origins.
  std::vector<double> inflow;
  std::shared_ptr<const RoutingPolicy> routing;
  std::vector<SpeedLimitPolicy> speed_limits;
  std::vector<double> initial_density;
  double dt = 0.01;
  double horizon = 200.0;
  /// Record a trace sample every `stride` steps (the final step is always kept).
  std::size_t stride = 10;
};

/// Throws invalid_scenario describing the first broken invariant.
void validate(const Scenario& scenario);

/// Density profile plus the permanently failed links. A link is failed
/// exactly when its density equals its jam density.
struct NetworkState {
  std::vector<double> density;
  std::vector<bool> failed;
  double time = 0.0;
};

NetworkState initial_state(const Scenario& scenario);

/// Flows evaluated at one state, all computed from the same densities.
struct FlowSnapshot {
  std::vector<double> speed;
  /// Flow actually discharged by each link (zero when its head is blocked).
  std::vector<double> outflow;
  /// Flow routed into each link by its tail node.
  std::vector<double> routed;
  /// Total inflow mu_v per node index.
  std::vector<double> node_inflow;
  /// Non-destination nodes whose outgoing links have all failed.
  std::vector<bool> blocked;
};

FlowSnapshot evaluate(const NetworkState& state, const Scenario& scenario);

/// One explicit Euler step of length dt with failure clamping. Throws
/// non_finite_state when the update diverges.
NetworkState step(const NetworkState& state, const Scenario& scenario, double dt);

struct FailureEvent {
  LinkId link;
  double time = 0.0;
  bool operator==(const FailureEvent&) const = default;
};

struct TraceSample {
  double time = 0.0;
  std::vector<double> density;
  std::vector<double> speed;
  std::vector<double> flow;
  std::vector<double> node_inflow;
  std::vector<bool> failed;
  /// Sum of mu_v over destinations.
  double destination_inflow = 0.0;
  /// Sum of lambda_v over origins that still have an operational link.
  double admitted_inflow = 0.0;
  /// Integral of destination_inflow since t = 0, accumulated per step.
  double cumulative_destination_inflow = 0.0;
  bool operator==(const TraceSample&) const = default;
};

struct SimulationTrace {
  std::shared_ptr<const FlowNetwork> network;
  std::vector<double> external_inflow;
  double dt = 0.0;
  std::vector<TraceSample> samples;
  std::vector<FailureEvent> failures;
};

/// Runs the scenario over [0, horizon]. Deterministic for a given scenario.
SimulationTrace simulate(const Scenario& scenario);

/// Average destination inflow over the trailing `window` of the trace,
/// by trapezoidal quadrature on the samples. Throws empty_trace.
double throughput(const SimulationTrace& trace, double window);

struct TransferVerdict {
  enum class Kind { transferring, non_transferring, undetermined };
  Kind kind = Kind::undetermined;
  std::optional<NodeId> blocked_origin;
  double throughput = 0.0;
  double demand = 0.0;
};

std::string_view to_string(TransferVerdict::Kind kind);

/// Non-transferring when some loaded origin has lost every outgoing link;
/// transferring when no such origin exists and the trailing-window
/// throughput is within epsilon_rel of the total demand; undetermined
/// otherwise.
TransferVerdict classify(const SimulationTrace& trace, double window, double epsilon_rel = 0.02);

struct MassResidualSample {
  double time = 0.0;
  /// Forward-difference rate of total density minus (admitted inflow -
  /// destination inflow), both taken at the left sample.
  double residual = 0.0;
  /// External inflow discarded at origins whose links have all failed.
  double discarded_inflow = 0.0;
  /// Total density change since t = 0 minus the left-point integral of
  /// (admitted inflow - destination inflow).
  double cumulative_defect = 0.0;
  /// A failure event falls in (time, next sample]; the right-hand side jumps
  /// inside the interval and the left-point residual is not O(dt) there.
  bool spans_failure = false;
};

std::vector<MassResidualSample> mass_residual(const SimulationTrace& trace);

}  // namespace flownet
