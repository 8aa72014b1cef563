#pragma once

#include <cstddef>
#include <vector>

namespace flownet {

/// maximize objective . x  subject to  rows[i] . x <= rhs[i],  x >= 0.
struct LinearProgram {
  std::size_t variables = 0;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> objective;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Some nonbasic column has zero reduced cost at the optimum, so another
  /// optimal vertex may exist.
  bool possibly_non_unique = false;
  std::size_t pivots = 0;
};

/// Dense two-phase simplex with Bland's rule. Throws numerical_failure when
/// the pivot budget runs out.
LpSolution solve_lp(const LinearProgram& lp, double tolerance = 1e-9);

}  // namespace flownet
