#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "flownet/error.hpp"
#include "flownet/feasibility.hpp"
#include "flownet/fundamental.hpp"
#include "flownet/network.hpp"

namespace flownet {

/// Origin row: inflow <= sum of targets on the origin's outgoing links.
struct OriginRow {
  std::size_t node = 0;
  double inflow = 0.0;
  std::vector<LinkId> outgoing;
};

/// Intermediate row: sum of incoming targets <= sum of outgoing targets.
struct BalanceRow {
  std::size_t node = 0;
  std::vector<LinkId> incoming;
  std::vector<LinkId> outgoing;
};

/// Set of capacity allocations bounded above by the maximum sustainable
/// inflows at the reference profile rho_star.
struct AllocationPolytope {
  std::vector<double> upper_bound;
  std::vector<OriginRow> origin_rows;
  std::vector<BalanceRow> balance_rows;
};

/// Raised when the inflow cannot be carried by capacities phi(rho_star).
class InfeasibleInflowError : public Error {
 public:
  InfeasibleInflowError(const std::string& what, FeasibilityResult result)
      : Error(Errc::infeasible_inflow, what), result_(std::move(result)) {}

  const FeasibilityResult& result() const noexcept { return result_; }

 private:
  FeasibilityResult result_;
};

/// Throws InfeasibleInflowError when some cut cannot carry its inflow under
/// capacities phi(rho_star); the result carries the witness cut.
AllocationPolytope build_polytope(const FlowNetwork& network, std::span<const LinkPhysics> physics,
                                  std::span<const double> rho_star, std::span<const double> inflow);

/// Reference profile rho_star = critical densities.
std::vector<double> critical_profile(std::span<const LinkPhysics> physics);

struct CapacityAllocation {
  std::vector<double> target;
  std::vector<double> weights;
  double objective = 0.0;
  /// The optimum may not be the only optimal vertex for these weights; the
  /// returned one is fixed by the pivot rule.
  bool possibly_non_unique = false;
  std::vector<SpeedLimitPolicy> policies;
};

/// Maximizes weights . target over the polytope. Throws infeasible_polytope
/// or numerical_failure.
CapacityAllocation allocate(const AllocationPolytope& polytope, std::span<const double> weights);

enum class RowKind { nonnegativity, upper_bound, origin, balance };

struct RowViolation {
  RowKind kind = RowKind::upper_bound;
  /// Link index for bound rows, node index for origin and balance rows.
  std::size_t index = 0;
  double amount = 0.0;
};

struct MembershipResult {
  bool member = true;
  std::optional<RowViolation> worst;
};

MembershipResult polytope_membership(const AllocationPolytope& polytope, std::span<const double> target,
                                     double tolerance = 1e-9);

enum class SpeedLimitMode { constant, feedback };

std::vector<SpeedLimitPolicy> speed_limits_from_allocation(const CapacityAllocation& allocation,
                                                           SpeedLimitMode mode = SpeedLimitMode::feedback);

}  // namespace flownet
