#include <doctest.h>

#include <random>

#include "flownet/error.hpp"
#include "flownet/feasibility.hpp"
#include "flownet/scenario_io.hpp"
#include "support/instances.hpp"

using namespace flownet;
using namespace flownet::testing;

namespace {

struct Instance {
  FlowNetwork network;
  std::vector<double> capacity;
  std::vector<double> inflow;
};

Instance motivating(bool reduced, double demand = 6.0) {
  ScenarioSpec spec = motivating_spec(reduced);
  spec.inflows[1] = demand;
  const Scenario s = build_scenario(spec).scenario;
  return {*s.network, capacities(s), s.inflow};
}

}  // namespace

TEST_CASE("motivating network feasibility") {
  SUBCASE("intact") {
    const Instance in = motivating(false);
    const FeasibilityResult r = is_feasible(in.network, in.capacity, in.inflow);
    CHECK(r.feasible);
    CHECK(r.min_slack == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.witness_cut == NodeSet{NodeId{1}, NodeId{2}});
    CHECK(r.max_flow_value == doctest::Approx(6.0));
    CHECK(r.total_inflow == 6.0);
  }
  SUBCASE("reduced") {
    const Instance in = motivating(true);
    const FeasibilityResult r = is_feasible(in.network, in.capacity, in.inflow);
    CHECK(r.feasible);
    CHECK(std::abs(r.min_slack) < 1e-9);
  }
  SUBCASE("reduced with more demand") {
    const Instance in = motivating(true, 7.0);
    const FeasibilityResult r = is_feasible(in.network, in.capacity, in.inflow);
    CHECK_FALSE(r.feasible);
    CHECK(r.min_slack == doctest::Approx(-1.0));
    CHECK(r.max_flow_value == doctest::Approx(6.0));
    const FeasibilityResult brute = brute_force_feasible(in.network, in.capacity, in.inflow);
    CHECK_FALSE(brute.feasible);
    CHECK(brute.min_slack == doctest::Approx(r.min_slack));
    CHECK(brute.witness_cut == r.witness_cut);
  }
}

TEST_CASE("brute force agrees on the motivating cases") {
  for (const bool reduced : {false, true}) {
    const Instance in = motivating(reduced);
    const FeasibilityResult a = is_feasible(in.network, in.capacity, in.inflow);
    const FeasibilityResult b = brute_force_feasible(in.network, in.capacity, in.inflow);
    CHECK(a.feasible == b.feasible);
    CHECK(a.min_slack == doctest::Approx(b.min_slack));
    CHECK(a.witness_cut == b.witness_cut);
  }
}

TEST_CASE("zero inflow") {
  Instance in = motivating(false, 0.0);
  const FeasibilityResult r = brute_force_feasible(in.network, in.capacity, in.inflow);
  CHECK(r.feasible);
  CHECK(r.min_slack >= 0.0);
  CHECK(r.min_slack == doctest::Approx(is_feasible(in.network, in.capacity, in.inflow).min_slack));
}

TEST_CASE("zero-capacity bridge") {
  // Origin 1 reaches destination 3 only through (1,2) with zero capacity.
  const FlowNetwork net = FlowNetwork::build({{1}, {2}, {3}}, {{{1}, {2}}, {{2}, {3}}});
  const std::vector<double> capacity{0.0, 5.0};
  const std::vector<double> inflow{1.0, 0.0, 0.0};
  const FeasibilityResult r = is_feasible(net, capacity, inflow);
  CHECK_FALSE(r.feasible);
  CHECK(r.witness_cut.contains(NodeId{1}));
  const FeasibilityResult b = brute_force_feasible(net, capacity, inflow);
  CHECK_FALSE(b.feasible);
  CHECK(b.witness_cut == r.witness_cut);
}

TEST_CASE("input validation") {
  const Instance in = motivating(false);
  std::vector<double> bad = in.capacity;
  bad[0] = -1.0;
  CHECK_THROWS_AS(is_feasible(in.network, bad, in.inflow), Error);
  std::vector<double> inflow = in.inflow;
  inflow[1] = 1.0;
  CHECK_THROWS_AS(is_feasible(in.network, in.capacity, inflow), Error);
  CHECK_THROWS_AS(is_feasible(in.network, std::vector<double>{1.0}, in.inflow), Error);
}

TEST_CASE("brute force refuses large networks") {
  std::vector<NodeId> nodes;
  std::vector<LinkSpec> links;
  for (int v = 1; v <= 22; ++v) {
    nodes.push_back({v});
    if (v < 22) links.push_back({{v}, {v + 1}});
  }
  const FlowNetwork net = FlowNetwork::build(nodes, links);
  const std::vector<double> capacity(links.size(), 1.0);
  std::vector<double> inflow(nodes.size(), 0.0);
  CHECK_THROWS_AS(brute_force_feasible(net, capacity, inflow), Error);
  CHECK(is_feasible(net, capacity, inflow).feasible);
}

TEST_CASE("max-flow on a textbook graph") {
  MaxFlow g(6);
  g.add_arc(0, 1, 16);
  g.add_arc(0, 2, 13);
  g.add_arc(1, 2, 10);
  g.add_arc(2, 1, 4);
  g.add_arc(1, 3, 12);
  g.add_arc(3, 2, 9);
  g.add_arc(2, 4, 14);
  g.add_arc(4, 3, 7);
  g.add_arc(3, 5, 20);
  g.add_arc(4, 5, 4);
  CHECK(g.solve(0, 5) == doctest::Approx(23.0));
  const std::vector<bool> side = g.source_side();
  CHECK(side[0]);
  CHECK_FALSE(side[5]);
}

TEST_CASE("cut slack") {
  const Instance in = motivating(false);
  CHECK(cut_slack(in.network, in.capacity, in.inflow, {NodeId{1}, NodeId{2}}) == doctest::Approx(1.0));
  CHECK(cut_slack(in.network, in.capacity, in.inflow, {NodeId{1}}) == doctest::Approx(2.0));
  CHECK(cut_slack(in.network, in.capacity, in.inflow, {}) == 0.0);
}

TEST_CASE("random networks agree with enumeration") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> factor(0.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioSpec spec = random_spec(rng, 10);
    const Scenario s = build_scenario(spec).scenario;
    // Mix tight, feasible and infeasible loads.
    scale_inflows(spec, trial % 5 == 0 ? feasible_scale(s) : factor(rng) * feasible_scale(s));
    const Scenario scaled = build_scenario(spec).scenario;
    const std::vector<double> capacity = capacities(scaled);
    const FeasibilityResult a = is_feasible(*scaled.network, capacity, scaled.inflow);
    const FeasibilityResult b = brute_force_feasible(*scaled.network, capacity, scaled.inflow);
    CAPTURE(trial);
    CHECK(a.min_slack == doctest::Approx(b.min_slack).epsilon(1e-9));
    CHECK(a.witness_cut == b.witness_cut);
    if (std::abs(a.min_slack) > 1e-9) CHECK(a.feasible == b.feasible);
    CHECK(a.feasible == (a.min_slack >= -1e-9 * std::max(1.0, a.total_inflow)));
  }
}
