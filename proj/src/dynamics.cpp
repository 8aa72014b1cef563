#include "flownet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "flownet/error.hpp"

namespace flownet {

namespace {

// A link whose updated density comes within this of jam density fails.
constexpr double kFailureMargin = 1e-12;

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(Errc::invalid_scenario, message);
}

/// Per-run scratch space and cached per-link speed limits.
class Integrator {
 public:
  explicit Integrator(const Scenario& scenario)
      : scenario_(scenario), network_(*scenario.network), fixed_speed_(network_.link_count()) {
    for (std::size_t e = 0; e < network_.link_count(); ++e) {
      const SpeedLimitPolicy& policy = scenario_.speed_limits[e];
      if (!std::holds_alternative<FeedbackCap>(policy)) {
        fixed_speed_[e] = speed_limit(policy, scenario_.physics[e], 0.0);
      }
    }
    node_links_.resize(network_.node_count());
    for (std::size_t v = 0; v < network_.node_count(); ++v) {
      for (const LinkId e : network_.outgoing(v)) node_links_[v].push_back(&scenario_.physics[e.value]);
    }
  }

  void evaluate(const NetworkState& state, FlowSnapshot& snap) {
    const std::size_t n = network_.node_count();
    const std::size_t m = network_.link_count();
    snap.speed.assign(m, 0.0);
    snap.outflow.assign(m, 0.0);
    snap.routed.assign(m, 0.0);
    snap.node_inflow.assign(n, 0.0);
    snap.blocked.assign(n, false);

    for (std::size_t v = 0; v < n; ++v) {
      if (network_.kind(v) == NodeKind::destination) continue;
      const auto out = network_.outgoing(v);
      snap.blocked[v] = std::all_of(out.begin(), out.end(), [&](LinkId e) { return state.failed[e.value]; });
    }

    for (const Link& link : network_.links()) {
      const std::size_t e = link.id.value;
      const LinkPhysics& physics = scenario_.physics[e];
      const double rho = state.density[e];
      snap.speed[e] = fixed_speed_[e] ? *fixed_speed_[e]
                                      : speed_limit(scenario_.speed_limits[e], physics, rho);
      if (state.failed[e] || snap.blocked[link.head_index]) continue;
      snap.outflow[e] = physics.flow(rho, snap.speed[e]);
    }

    for (std::size_t v = 0; v < n; ++v) {
      if (network_.kind(v) == NodeKind::origin) {
        snap.node_inflow[v] = snap.blocked[v] ? 0.0 : scenario_.inflow[v];
      } else {
        double mu = 0.0;
        for (const LinkId e : network_.incoming(v)) mu += snap.outflow[e.value];
        snap.node_inflow[v] = mu;
      }
    }

    for (std::size_t v = 0; v < n; ++v) {
      if (network_.kind(v) == NodeKind::destination || snap.blocked[v]) continue;
      const auto out = network_.outgoing(v);
      local_density_.resize(out.size());
      local_routed_.resize(out.size());
      for (std::size_t j = 0; j < out.size(); ++j) local_density_[j] = state.density[out[j].value];
      // A false return means every link is within round-off of jam; the
      // inflow is dropped for this step and the links fail on the next one.
      scenario_.routing->route(local_density_, node_links_[v], snap.node_inflow[v], local_routed_);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const std::size_t e = out[j].value;
        snap.routed[e] = state.failed[e] ? 0.0 : local_routed_[j];
      }
    }
  }

  void advance(NetworkState& state, const FlowSnapshot& snap, double dt) const {
    for (std::size_t e = 0; e < network_.link_count(); ++e) {
      if (state.failed[e]) continue;
      const double jam = scenario_.physics[e].jam_density();
      double rho = state.density[e] + dt * (snap.routed[e] - snap.outflow[e]);
      if (!std::isfinite(rho)) {
        throw Error(Errc::non_finite_state,
                    fmt::format("density of link {} diverged at t = {}", e, state.time));
      }
      if (rho >= jam - kFailureMargin) {
        rho = jam;
        state.failed[e] = true;
      } else if (rho < 0.0) {
        rho = 0.0;
      }
      state.density[e] = rho;
    }
    state.time += dt;
  }

 private:
  const Scenario& scenario_;
  const FlowNetwork& network_;
  std::vector<std::optional<double>> fixed_speed_;
  std::vector<std::vector<const LinkPhysics*>> node_links_;
  std::vector<double> local_density_;
  std::vector<double> local_routed_;
};

}  // namespace

void validate(const Scenario& scenario) {
  require(scenario.network != nullptr, "scenario has no network");
  require(scenario.routing != nullptr, "scenario has no routing policy");
  const FlowNetwork& net = *scenario.network;
  const std::size_t m = net.link_count();
  require(scenario.physics.size() == m, "physics must have one entry per link");
  require(scenario.speed_limits.size() == m, "speed limits must have one entry per link");
  require(scenario.initial_density.size() == m, "initial density must have one entry per link");
  require(scenario.inflow.size() == net.node_count(), "inflow must have one entry per node");
  require(scenario.dt > 0.0 && std::isfinite(scenario.dt), "dt must be positive");
  require(scenario.horizon > 0.0 && std::isfinite(scenario.horizon), "horizon must be positive");
  require(scenario.stride >= 1, "sampling stride must be at least 1");
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    const double lambda = scenario.inflow[v];
    require(lambda >= 0.0 && std::isfinite(lambda),
            fmt::format("inflow at node {} must be nonnegative", net.node_at(v).value));
    require(lambda == 0.0 || net.kind(v) == NodeKind::origin,
            fmt::format("external inflow declared at non-origin node {}", net.node_at(v).value));
  }
  for (std::size_t e = 0; e < m; ++e) {
    const double rho = scenario.initial_density[e];
    require(rho >= 0.0 && rho <= scenario.physics[e].jam_density(),
            fmt::format("initial density of link {} outside [0, {}]", e, scenario.physics[e].jam_density()));
    try {
      induced_capacity(scenario.speed_limits[e], scenario.physics[e]);
    } catch (const Error& err) {
      throw Error(Errc::invalid_scenario, fmt::format("speed limit of link {}: {}", e, err.what()));
    }
  }
}

NetworkState initial_state(const Scenario& scenario) {
  const std::size_t m = scenario.network->link_count();
  NetworkState state;
  state.density = scenario.initial_density;
  state.failed.assign(m, false);
  for (std::size_t e = 0; e < m; ++e) {
    const double jam = scenario.physics[e].jam_density();
    if (state.density[e] >= jam - kFailureMargin) {
      state.density[e] = jam;
      state.failed[e] = true;
    }
  }
  return state;
}

FlowSnapshot evaluate(const NetworkState& state, const Scenario& scenario) {
  Integrator integrator(scenario);
  FlowSnapshot snap;
  integrator.evaluate(state, snap);
  return snap;
}

NetworkState step(const NetworkState& state, const Scenario& scenario, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::invalid_scenario, "dt must be positive");
  Integrator integrator(scenario);
  FlowSnapshot snap;
  integrator.evaluate(state, snap);
  NetworkState next = state;
  integrator.advance(next, snap, dt);
  return next;
}

SimulationTrace simulate(const Scenario& scenario) {
  validate(scenario);
  const FlowNetwork& net = *scenario.network;
  const std::size_t m = net.link_count();
  const auto steps = static_cast<std::size_t>(std::llround(scenario.horizon / scenario.dt));
  if (steps == 0) throw Error(Errc::invalid_scenario, "horizon shorter than one step");

  SimulationTrace trace;
  trace.network = scenario.network;
  trace.external_inflow = scenario.inflow;
  trace.dt = scenario.dt;
  trace.samples.reserve(steps / scenario.stride + 2);

  Integrator integrator(scenario);
  NetworkState state = initial_state(scenario);
  for (std::size_t e = 0; e < m; ++e) {
    if (state.failed[e]) trace.failures.push_back({LinkId{e}, 0.0});
  }

  FlowSnapshot snap;
  double cumulative = 0.0;
  for (std::size_t k = 0;; ++k) {
    state.time = static_cast<double>(k) * scenario.dt;
    try {
      integrator.evaluate(state, snap);
    } catch (const Error& err) {
      throw Error(err.code(), fmt::format("t = {}: {}", state.time, err.what()));
    }
    double destination_inflow = 0.0;
    for (const std::size_t d : net.destinations()) destination_inflow += snap.node_inflow[d];

    if (k % scenario.stride == 0 || k == steps) {
      TraceSample sample;
      sample.time = state.time;
      sample.density = state.density;
      sample.speed = snap.speed;
      sample.flow = snap.outflow;
      sample.node_inflow = snap.node_inflow;
      sample.failed = state.failed;
      sample.destination_inflow = destination_inflow;
      for (const std::size_t o : net.origins()) {
        if (!snap.blocked[o]) sample.admitted_inflow += scenario.inflow[o];
      }
      sample.cumulative_destination_inflow = cumulative;
      trace.samples.push_back(std::move(sample));
    }
    if (k == steps) break;

    const std::vector<bool> failed_before = state.failed;
    integrator.advance(state, snap, scenario.dt);
    cumulative += scenario.dt * destination_inflow;
    for (std::size_t e = 0; e < m; ++e) {
      if (state.failed[e] && !failed_before[e]) {
        trace.failures.push_back({LinkId{e}, static_cast<double>(k + 1) * scenario.dt});
      }
    }
  }
  return trace;
}

double throughput(const SimulationTrace& trace, double window) {
  const auto& s = trace.samples;
  if (s.size() < 2) throw Error(Errc::empty_trace, "throughput needs at least two samples");
  const double end = s.back().time;
  const double span = end - s.front().time;
  if (!(window > 0.0) || window > span * (1.0 + 1e-12)) {
    throw Error(Errc::out_of_range, fmt::format("window {} outside (0, {}]", window, span));
  }
  const double start = std::max(s.front().time, end - window);

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double t0 = s[i].time;
    const double t1 = s[i + 1].time;
    if (t1 <= start) continue;
    const double y0 = s[i].destination_inflow;
    const double y1 = s[i + 1].destination_inflow;
    if (t0 < start) {
      const double y_start = y0 + (y1 - y0) * (start - t0) / (t1 - t0);
      integral += 0.5 * (y_start + y1) * (t1 - start);
    } else {
      integral += 0.5 * (y0 + y1) * (t1 - t0);
    }
  }
  return integral / (end - start);
}

std::string_view to_string(TransferVerdict::Kind kind) {
  switch (kind) {
    case TransferVerdict::Kind::transferring: return "transferring";
    case TransferVerdict::Kind::non_transferring: return "non_transferring";
    case TransferVerdict::Kind::undetermined: return "undetermined";
  }
  return "undetermined";
}

TransferVerdict classify(const SimulationTrace& trace, double window, double epsilon_rel) {
  if (trace.samples.empty()) throw Error(Errc::empty_trace, "cannot classify an empty trace");
  const FlowNetwork& net = *trace.network;
  const std::vector<bool>& failed = trace.samples.back().failed;

  TransferVerdict verdict;
  verdict.demand = std::accumulate(trace.external_inflow.begin(), trace.external_inflow.end(), 0.0);
  verdict.throughput = throughput(trace, window);

  for (const std::size_t o : net.origins()) {
    if (!(trace.external_inflow[o] > 0.0)) continue;
    const auto out = net.outgoing(o);
    if (std::all_of(out.begin(), out.end(), [&](LinkId e) { return failed[e.value]; })) {
      verdict.kind = TransferVerdict::Kind::non_transferring;
      verdict.blocked_origin = net.node_at(o);
      return verdict;
    }
  }
  const double gap = std::abs(verdict.throughput - verdict.demand);
  verdict.kind = gap <= epsilon_rel * verdict.demand + 1e-9 ? TransferVerdict::Kind::transferring
                                                            : TransferVerdict::Kind::undetermined;
  return verdict;
}

std::vector<MassResidualSample> mass_residual(const SimulationTrace& trace) {
  const auto& s = trace.samples;
  const double demand = std::accumulate(trace.external_inflow.begin(), trace.external_inflow.end(), 0.0);
  auto total_density = [](const TraceSample& sample) {
    return std::accumulate(sample.density.begin(), sample.density.end(), 0.0);
  };

  std::vector<MassResidualSample> result;
  if (s.size() < 2) return result;
  result.reserve(s.size() - 1);
  const double initial_mass = total_density(s.front());
  double mass = initial_mass;
  double integrated = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double next_mass = total_density(s[i + 1]);
    const double dt = s[i + 1].time - s[i].time;
    const double net_inflow = s[i].admitted_inflow - s[i].destination_inflow;
    integrated += net_inflow * dt;
    MassResidualSample r;
    r.time = s[i].time;
    r.residual = (next_mass - mass) / dt - net_inflow;
    r.discarded_inflow = demand - s[i].admitted_inflow;
    r.cumulative_defect = (next_mass - initial_mass) - integrated;
    r.spans_failure = std::any_of(trace.failures.begin(), trace.failures.end(), [&](const FailureEvent& f) {
      return f.time > s[i].time && f.time <= s[i + 1].time;
    });
    result.push_back(r);
    mass = next_mass;
  }
  return result;
}

}  // namespace flownet
