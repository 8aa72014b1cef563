#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "flownet/dynamics.hpp"
#include "flownet/error.hpp"
#include "flownet/scenario_io.hpp"
#include "support/instances.hpp"

using namespace flownet;
using flownet::testing::motivating_spec;

namespace {

Scenario single_link(double inflow, double rho0, double horizon = 50.0) {
  Scenario s;
  s.network = std::make_shared<FlowNetwork>(FlowNetwork::build({{1}, {2}}, {{{1}, {2}}}));
  s.physics = link_physics(*s.network, std::make_shared<GreenshieldsDiagram>());
  s.inflow = {inflow, 0.0};
  s.routing = std::make_shared<ProportionalRouting>();
  s.speed_limits = {MaxSpeed{}};
  s.initial_density = {rho0};
  s.horizon = horizon;
  s.stride = 1;
  return s;
}

/// 1 -> 2 -> 3 chain with an extra origin-free branch, used for blocking.
Scenario chain(double inflow, std::vector<double> rho0) {
  Scenario s;
  s.network = std::make_shared<FlowNetwork>(FlowNetwork::build({{1}, {2}, {3}}, {{{1}, {2}}, {{2}, {3}}}));
  s.physics = link_physics(*s.network, std::make_shared<GreenshieldsDiagram>());
  s.inflow = {inflow, 0.0, 0.0};
  s.routing = std::make_shared<ProportionalRouting>();
  s.speed_limits = {MaxSpeed{}, MaxSpeed{}};
  s.initial_density = std::move(rho0);
  return s;
}

}  // namespace

TEST_CASE("pure drainage") {
  const SimulationTrace trace = simulate(single_link(0.0, 1.0, 20.0));
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    CHECK(trace.samples[i].density[0] < trace.samples[i - 1].density[0]);
    CHECK(trace.samples[i].density[0] >= 0.0);
  }
  CHECK(trace.samples.back().density[0] < 0.1);
}

TEST_CASE("single link settles on the free-flow root") {
  const SimulationTrace trace = simulate(single_link(0.5, 0.0, 60.0));
  CHECK(trace.samples.back().density[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-6));
  CHECK(trace.failures.empty());
}

TEST_CASE("single link overloaded past capacity jams") {
  const SimulationTrace trace = simulate(single_link(1.2, 0.0, 60.0));
  REQUIRE(trace.failures.size() == 1);
  CHECK(trace.samples.back().density[0] == 4.0);
  CHECK(trace.samples.back().failed[0]);
}

TEST_CASE("link into a blocked node never drains") {
  // Link (2,3) starts jammed, so node 2 is blocked and (1,2) cannot discharge.
  Scenario s = chain(0.0, {1.0, 4.0});
  s.horizon = 5.0;
  s.stride = 1;
  const SimulationTrace trace = simulate(s);
  REQUIRE(trace.failures.size() == 1);
  CHECK(trace.failures[0].time == 0.0);
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    CHECK(trace.samples[i].density[0] >= trace.samples[i - 1].density[0]);
    CHECK(trace.samples[i].flow[0] == 0.0);
  }
}

TEST_CASE("step clamps at jam and marks failure") {
  Scenario s = chain(1.0, {3.999, 0.0});
  s.dt = 0.5;
  NetworkState state = initial_state(s);
  // The routed inflow into a nearly jammed link is almost nothing, so push it
  // over by hand.
  state.density[0] = 4.0 - 1e-13;
  const NetworkState next = step(state, s, s.dt);
  CHECK(next.density[0] == 4.0);
  CHECK(next.failed[0]);
}

TEST_CASE("validation") {
  Scenario s = single_link(0.5, 0.0);
  SUBCASE("negative dt") {
    s.dt = -1.0;
    CHECK_THROWS_AS(validate(s), Error);
  }
  SUBCASE("density above jam") {
    s.initial_density = {5.0};
    CHECK_THROWS_AS(validate(s), Error);
  }
  SUBCASE("inflow at destination") {
    s.inflow = {0.5, 0.5};
    CHECK_THROWS_AS(validate(s), Error);
  }
  SUBCASE("mismatched sizes") {
    s.speed_limits.clear();
    CHECK_THROWS_AS(validate(s), Error);
  }
}

TEST_CASE("divergent step size is reported") {
  Scenario s = single_link(0.0, 3.0);
  s.dt = 1e300;
  CHECK_THROWS_AS(simulate(s), Error);
}

TEST_CASE("throughput and classification") {
  SUBCASE("zero inflow gives zero throughput") {
    const SimulationTrace trace = simulate(single_link(0.0, 0.0, 10.0));
    CHECK(throughput(trace, 5.0) == 0.0);
  }
  SUBCASE("empty trace") {
    SimulationTrace empty;
    CHECK_THROWS_AS(throughput(empty, 1.0), Error);
  }
  SUBCASE("steady single link is transferring") {
    const SimulationTrace trace = simulate(single_link(0.5, 0.0, 60.0));
    CHECK(throughput(trace, 30.0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(classify(trace, 30.0).kind == TransferVerdict::Kind::transferring);
  }
  SUBCASE("overload is non-transferring at the origin") {
    const SimulationTrace trace = simulate(single_link(1.2, 0.0, 60.0));
    const TransferVerdict verdict = classify(trace, 30.0);
    CHECK(verdict.kind == TransferVerdict::Kind::non_transferring);
    REQUIRE(verdict.blocked_origin.has_value());
    CHECK(*verdict.blocked_origin == NodeId{1});
  }
  SUBCASE("truncated cascade is undetermined") {
    ScenarioSpec spec = motivating_spec(true);
    spec.horizon = 5.0;
    spec.window = 2.5;
    const SimulationTrace trace = simulate(build_scenario(spec).scenario);
    CHECK(trace.failures.empty());
    CHECK(classify(trace, 2.5).kind == TransferVerdict::Kind::undetermined);
  }
}

TEST_CASE("motivating scenarios") {
  SUBCASE("intact network stays uncongested") {
    const BuiltScenario built = build_scenario(motivating_spec(false));
    const SimulationTrace trace = simulate(built.scenario);
    CHECK(trace.failures.empty());
    for (const TraceSample& sample : trace.samples) {
      for (std::size_t e = 0; e < sample.density.size(); ++e) {
        CHECK(sample.density[e] <= built.scenario.physics[e].critical_density() * (1 + 1e-6));
      }
    }
    CHECK(throughput(trace, 100.0) == doctest::Approx(6.0).epsilon(0.02));
    CHECK(classify(trace, 100.0).kind == TransferVerdict::Kind::transferring);
  }
  SUBCASE("reduced network cascades") {
    const SimulationTrace trace = simulate(build_scenario(motivating_spec(true)).scenario);
    CHECK(trace.failures.size() == 5 - 1);
    CHECK(throughput(trace, 100.0) < 6.0);
    const TransferVerdict verdict = classify(trace, 100.0);
    CHECK(verdict.kind == TransferVerdict::Kind::non_transferring);
    CHECK(verdict.blocked_origin == NodeId{1});
  }
}

TEST_CASE("trace invariants") {
  const SimulationTrace trace = simulate(build_scenario(motivating_spec(true)).scenario);
  CHECK(std::is_sorted(trace.failures.begin(), trace.failures.end(),
                       [](const FailureEvent& a, const FailureEvent& b) { return a.time < b.time; }));
  const auto& physics = build_scenario(motivating_spec(true)).scenario.physics;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const TraceSample& s = trace.samples[i];
    for (std::size_t e = 0; e < s.density.size(); ++e) {
      CHECK(s.density[e] >= 0.0);
      CHECK(s.density[e] <= physics[e].jam_density());
      CHECK(s.failed[e] == (s.density[e] == physics[e].jam_density()));
      if (i > 0 && trace.samples[i - 1].failed[e]) CHECK(s.failed[e]);
    }
    if (i > 0) CHECK(s.cumulative_destination_inflow >= trace.samples[i - 1].cumulative_destination_inflow);
  }
}

TEST_CASE("determinism") {
  const Scenario s = build_scenario(motivating_spec(true)).scenario;
  const SimulationTrace a = simulate(s);
  const SimulationTrace b = simulate(s);
  CHECK(a.samples == b.samples);
  CHECK(a.failures == b.failures);
}

TEST_CASE("mass residual") {
  SUBCASE("equilibrium gives zero residual") {
    Scenario s = single_link(0.5, 2.0 - std::sqrt(2.0), 5.0);
    for (const MassResidualSample& r : mass_residual(simulate(s))) CHECK(std::abs(r.residual) < 1e-9);
  }
  SUBCASE("smooth intervals are first order in dt") {
    ScenarioSpec spec = motivating_spec(true);
    auto worst = [&](double dt) {
      spec.dt = dt;
      double out = 0.0;
      for (const MassResidualSample& r : mass_residual(simulate(build_scenario(spec).scenario))) {
        if (!r.spans_failure) out = std::max(out, std::abs(r.residual));
      }
      return out;
    };
    const double coarse = worst(0.01);
    CHECK(coarse < 0.2);
    CHECK(coarse / worst(0.005) == doctest::Approx(2.0).epsilon(0.2));
  }
  SUBCASE("post-cascade inflow is discarded at the origin") {
    const SimulationTrace trace = simulate(build_scenario(motivating_spec(true)).scenario);
    const auto series = mass_residual(trace);
    REQUIRE_FALSE(series.empty());
    CHECK(series.back().discarded_inflow == doctest::Approx(6.0));
    CHECK(std::abs(series.back().residual) < 1e-9);
  }
}

TEST_CASE("step-size convergence of failure times") {
  ScenarioSpec spec = motivating_spec(true);
  spec.horizon = 40.0;
  spec.dt = 0.01;
  const auto coarse = simulate(build_scenario(spec).scenario).failures;
  spec.dt = 0.005;
  const auto fine = simulate(build_scenario(spec).scenario).failures;
  REQUIRE(coarse.size() == fine.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    CHECK(coarse[i].link == fine[i].link);
    CHECK(std::abs(coarse[i].time - fine[i].time) <= 2 * 0.01);
  }
}
