#include "lp_oracle.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace flownet::testing {

OracleSolution enumerate_vertices(const LinearProgram& lp, double tolerance) {
  const std::size_t n = lp.variables;
  const std::size_t m = lp.rows.size();
  // Constraint k < m is row k; constraint m + j is x_j >= 0 written as -x_j <= 0.
  const std::size_t total = m + n;
  auto coefficient = [&](std::size_t k, std::size_t j) {
    if (k < m) return lp.rows[k][j];
    return k - m == j ? -1.0 : 0.0;
  };
  auto bound = [&](std::size_t k) { return k < m ? lp.rhs[k] : 0.0; };

  OracleSolution best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (total < n) return best;

  while (true) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < n; ++j) a(r, j) = coefficient(pick[r], j);
      b(r) = bound(pick[r]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() == static_cast<Eigen::Index>(n)) {
      const Eigen::VectorXd x = lu.solve(b);
      bool feasible = true;
      for (std::size_t k = 0; k < total && feasible; ++k) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += coefficient(k, j) * x(j);
        feasible = lhs <= bound(k) + tolerance * (1.0 + std::abs(bound(k)));
      }
      if (feasible) {
        double value = 0.0;
        for (std::size_t j = 0; j < n; ++j) value += lp.objective[j] * x(j);
        if (value > best_value) {
          best_value = value;
          best.status = LpStatus::optimal;
          best.objective = value;
        }
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == total - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

LinearProgram allocation_lp(const AllocationPolytope& p, std::span<const double> weights) {
  const std::size_t n = p.upper_bound.size();
  LinearProgram lp{n, {}, {}, std::vector<double>(weights.begin(), weights.end())};
  for (std::size_t e = 0; e < n; ++e) {
    std::vector<double> row(n, 0.0);
    row[e] = 1.0;
    lp.rows.push_back(row);
    lp.rhs.push_back(p.upper_bound[e]);
  }
  for (const OriginRow& r : p.origin_rows) {
    std::vector<double> row(n, 0.0);
    for (const LinkId e : r.outgoing) row[e.value] -= 1.0;
    lp.rows.push_back(row);
    lp.rhs.push_back(-r.inflow);
  }
  for (const BalanceRow& r : p.balance_rows) {
    std::vector<double> row(n, 0.0);
    for (const LinkId e : r.incoming) row[e.value] += 1.0;
    for (const LinkId e : r.outgoing) row[e.value] -= 1.0;
    lp.rows.push_back(row);
    lp.rhs.push_back(0.0);
  }
  return lp;
}

}  // namespace flownet::testing
