#include "flownet/allocation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "flownet/simplex.hpp"

namespace flownet {

namespace {

double sum_over(std::span<const double> values, std::span<const LinkId> links) {
  double total = 0.0;
  for (const LinkId e : links) total += values[e.value];
  return total;
}

std::string describe(const NodeSet& cut) {
  std::string out = "{";
  for (const NodeId v : cut) out += fmt::format("{}{}", out.size() > 1 ? "," : "", v.value);
  return out + "}";
}

}  // namespace

std::vector<double> critical_profile(std::span<const LinkPhysics> physics) {
  std::vector<double> profile;
  profile.reserve(physics.size());
  for (const LinkPhysics& p : physics) profile.push_back(p.critical_density());
  return profile;
}

AllocationPolytope build_polytope(const FlowNetwork& network, std::span<const LinkPhysics> physics,
                                  std::span<const double> rho_star, std::span<const double> inflow) {
  if (rho_star.size() != network.link_count() || physics.size() != network.link_count()) {
    throw Error(Errc::out_of_range, "rho_star and physics need one entry per link");
  }
  AllocationPolytope polytope;
  polytope.upper_bound.reserve(network.link_count());
  for (std::size_t e = 0; e < network.link_count(); ++e) {
    polytope.upper_bound.push_back(physics[e].max_sustainable_inflow(rho_star[e]));
  }

  FeasibilityResult check = is_feasible(network, polytope.upper_bound, inflow);
  if (!check.feasible) {
    const std::string message =
        fmt::format("inflow exceeds sustainable capacity: cut {} has slack {}", describe(check.witness_cut),
                    check.min_slack);
    throw InfeasibleInflowError(message, std::move(check));
  }

  for (const std::size_t o : network.origins()) {
    const auto out = network.outgoing(o);
    polytope.origin_rows.push_back({o, inflow[o], {out.begin(), out.end()}});
  }
  for (const std::size_t v : network.intermediates()) {
    const auto in = network.incoming(v);
    const auto out = network.outgoing(v);
    polytope.balance_rows.push_back({v, {in.begin(), in.end()}, {out.begin(), out.end()}});
  }
  return polytope;
}

CapacityAllocation allocate(const AllocationPolytope& polytope, std::span<const double> weights) {
  const std::size_t n = polytope.upper_bound.size();
  if (weights.size() != n) throw Error(Errc::out_of_range, "one weight per link is required");
  for (const double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(Errc::out_of_range, "weights must be positive");
  }

  LinearProgram lp;
  lp.variables = n;
  lp.objective.assign(weights.begin(), weights.end());
  for (std::size_t e = 0; e < n; ++e) {
    std::vector<double> row(n, 0.0);
    row[e] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(polytope.upper_bound[e]);
  }
  for (const OriginRow& origin : polytope.origin_rows) {
    std::vector<double> row(n, 0.0);
    for (const LinkId e : origin.outgoing) row[e.value] -= 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(-origin.inflow);
  }
  for (const BalanceRow& balance : polytope.balance_rows) {
    std::vector<double> row(n, 0.0);
    for (const LinkId e : balance.incoming) row[e.value] += 1.0;
    for (const LinkId e : balance.outgoing) row[e.value] -= 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(0.0);
  }

  const LpSolution solution = solve_lp(lp);
  if (solution.status == LpStatus::infeasible) {
    throw Error(Errc::infeasible_polytope, "capacity allocation polytope is empty");
  }
  if (solution.status != LpStatus::optimal) {
    throw Error(Errc::numerical_failure, "capacity allocation LP did not reach an optimum");
  }

  CapacityAllocation allocation;
  allocation.target = solution.x;
  for (std::size_t e = 0; e < n; ++e) {
    allocation.target[e] = std::clamp(allocation.target[e], 0.0, polytope.upper_bound[e]);
  }
  allocation.weights.assign(weights.begin(), weights.end());
  for (std::size_t e = 0; e < n; ++e) allocation.objective += weights[e] * allocation.target[e];
  allocation.possibly_non_unique = solution.possibly_non_unique;

  const MembershipResult check = polytope_membership(polytope, allocation.target);
  if (!check.member) {
    throw Error(Errc::numerical_failure,
                fmt::format("LP solution violates a polytope row by {}", check.worst->amount));
  }
  allocation.policies = speed_limits_from_allocation(allocation, SpeedLimitMode::feedback);
  return allocation;
}

MembershipResult polytope_membership(const AllocationPolytope& polytope, std::span<const double> target,
                                     double tolerance) {
  if (target.size() != polytope.upper_bound.size()) {
    throw Error(Errc::out_of_range, "allocation has the wrong dimension");
  }
  MembershipResult result;
  auto consider = [&](RowKind kind, std::size_t index, double amount) {
    if (amount > tolerance && (!result.worst || amount > result.worst->amount)) {
      result.member = false;
      result.worst = RowViolation{kind, index, amount};
    }
  };
  for (std::size_t e = 0; e < target.size(); ++e) {
    consider(RowKind::nonnegativity, e, -target[e]);
    consider(RowKind::upper_bound, e, target[e] - polytope.upper_bound[e]);
  }
  for (const OriginRow& origin : polytope.origin_rows) {
    consider(RowKind::origin, origin.node, origin.inflow - sum_over(target, origin.outgoing));
  }
  for (const BalanceRow& balance : polytope.balance_rows) {
    consider(RowKind::balance, balance.node, sum_over(target, balance.incoming) - sum_over(target, balance.outgoing));
  }
  return result;
}

std::vector<SpeedLimitPolicy> speed_limits_from_allocation(const CapacityAllocation& allocation,
                                                           SpeedLimitMode mode) {
  std::vector<SpeedLimitPolicy> policies;
  policies.reserve(allocation.target.size());
  for (const double target : allocation.target) {
    if (mode == SpeedLimitMode::constant) {
      policies.emplace_back(ConstantCap{target});
    } else {
      policies.emplace_back(FeedbackCap{target});
    }
  }
  return policies;
}

}  // namespace flownet
