#include "flownet/simplex.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "flownet/error.hpp"

namespace flownet {

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t columns)
      : rows_(rows), columns_(columns), data_(rows * (columns + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * (columns_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * (columns_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, columns_); }
  double rhs(std::size_t i) const { return at(i, columns_); }

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return columns_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    for (std::size_t j = 0; j <= columns_; ++j) at(row, j) /= p;
    at(row, col) = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == row) continue;
      const double factor = at(i, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j <= columns_; ++j) at(i, j) -= factor * at(row, j);
      at(i, col) = 0.0;
    }
    basis_[row] = col;
  }

  double reduced_cost(const std::vector<double>& cost, std::size_t j) const {
    double r = cost[j];
    for (std::size_t i = 0; i < rows_; ++i) r -= cost[basis_[i]] * at(i, j);
    return r;
  }

 private:
  std::size_t rows_;
  std::size_t columns_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

enum class Outcome { optimal, unbounded };

/// Maximizes cost . x over the tableau, entering only columns below `limit`.
Outcome run_phase(Tableau& t, const std::vector<double>& cost, std::size_t limit, double tol,
                  std::size_t& pivots, std::size_t max_pivots) {
  for (;;) {
    std::optional<std::size_t> entering;
    for (std::size_t j = 0; j < limit; ++j) {
      if (t.reduced_cost(cost, j) > tol) {
        entering = j;
        break;
      }
    }
    if (!entering) return Outcome::optimal;

    std::optional<std::size_t> leaving;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, *entering);
      if (a <= tol) continue;
      const double ratio = t.rhs(i) / a;
      if (!leaving || ratio < best_ratio - tol ||
          (ratio <= best_ratio + tol && t.basis()[i] < t.basis()[*leaving])) {
        leaving = i;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    if (!leaving) return Outcome::unbounded;
    if (++pivots > max_pivots) throw Error(Errc::numerical_failure, "simplex pivot budget exhausted");
    t.pivot(*leaving, *entering);
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol) {
  const std::size_t n = lp.variables;
  const std::size_t m = lp.rows.size();
  if (lp.rhs.size() != m || lp.objective.size() != n) {
    throw Error(Errc::out_of_range, "linear program dimensions are inconsistent");
  }

  // Columns: originals [0, n), slacks [n, n + m), artificials after that.
  std::size_t artificial_count = 0;
  for (const double b : lp.rhs) artificial_count += b < 0.0 ? 1 : 0;
  const std::size_t structural = n + m;
  Tableau t(m, structural + artificial_count);
  std::size_t next_artificial = structural;
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.rows[i].size() != n) throw Error(Errc::out_of_range, "constraint row has the wrong length");
    const double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * lp.rows[i][j];
    t.at(i, n + i) = sign;
    t.rhs(i) = sign * lp.rhs[i];
    if (sign < 0.0) {
      t.at(i, next_artificial) = 1.0;
      t.basis()[i] = next_artificial++;
    } else {
      t.basis()[i] = n + i;
    }
  }

  const std::size_t max_pivots = 50 * (m + t.columns()) + 1000;
  LpSolution solution;

  if (artificial_count > 0) {
    std::vector<double> phase_one(t.columns(), 0.0);
    for (std::size_t j = structural; j < t.columns(); ++j) phase_one[j] = -1.0;
    run_phase(t, phase_one, t.columns(), tol, solution.pivots, max_pivots);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] >= structural) infeasibility += t.rhs(i);
    }
    if (infeasibility > tol * std::max(1.0, static_cast<double>(m))) {
      solution.status = LpStatus::infeasible;
      return solution;
    }
    // Drive zero-valued artificials out of the basis where possible; rows
    // with no structural entry are redundant and keep theirs at zero.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < structural) continue;
      for (std::size_t j = 0; j < structural; ++j) {
        if (std::abs(t.at(i, j)) > tol) {
          t.pivot(i, j);
          ++solution.pivots;
          break;
        }
      }
    }
  }

  std::vector<double> cost(t.columns(), 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
  if (run_phase(t, cost, structural, tol, solution.pivots, max_pivots) == Outcome::unbounded) {
    solution.status = LpStatus::unbounded;
    return solution;
  }

  solution.status = LpStatus::optimal;
  solution.x.assign(n, 0.0);
  std::vector<bool> basic(t.columns(), false);
  for (std::size_t i = 0; i < m; ++i) {
    basic[t.basis()[i]] = true;
    if (t.basis()[i] < n) solution.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
  }
  for (std::size_t j = 0; j < n; ++j) solution.objective += lp.objective[j] * solution.x[j];
  for (std::size_t j = 0; j < structural; ++j) {
    if (!basic[j] && std::abs(t.reduced_cost(cost, j)) <= tol) {
      solution.possibly_non_unique = true;
      break;
    }
  }
  return solution;
}

}  // namespace flownet
