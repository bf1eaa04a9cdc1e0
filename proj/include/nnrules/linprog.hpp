#pragma once

#include <cstddef>
#include <vector>

namespace nnrules {

// One inequality row: coeffs . x <= rhs.
struct LinearConstraint {
    std::vector<double> coeffs;
    double rhs = 0.0;
};

enum class LpStatus { feasible, infeasible, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

// Decides feasibility of { lo <= x <= hi, rows } with a dense two-phase
// simplex (Bland's rule, feasibility tolerance 1e-9). When `objective` is
// nonempty, phase 2 maximizes objective . x; it stops early once the value
// reaches `objective_target` so callers get a comfortably interior witness
// without solving to optimality.
LpResult solve_lp(const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::vector<LinearConstraint>& rows,
                  const std::vector<double>& objective = {},
                  double objective_target = 0.0);

}  // namespace nnrules
