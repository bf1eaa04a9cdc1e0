#include "nnrules/linprog.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "nnrules/errors.hpp"

namespace nnrules {

namespace {

constexpr double kTol = 1e-9;
constexpr std::size_t kMaxIterations = 200000;

// Dense simplex tableau over the shifted variables x' = x - lo >= 0.
// Columns: [0, n) shifted variables, [n, n+m) slacks, [n+m, ...) artificials,
// last column rhs. The cost row is rebuilt per phase.
class Tableau {
public:
    Tableau(std::size_t n_vars, std::size_t n_rows)
        : n_(n_vars), m_(n_rows), cols_(n_vars + n_rows), rows_(n_rows) {
        for (auto& r : rows_) r.assign(cols_ + 1, 0.0);
        basis_.assign(m_, 0);
    }

    void set_row(std::size_t i, const std::vector<double>& coeffs, double rhs) {
        for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = coeffs[j];
        rows_[i][n_ + i] = 1.0;  // slack
        rows_[i][cols_] = rhs;
        basis_[i] = n_ + i;
    }

    // Rows with negative rhs get sign-flipped and an artificial basis column.
    void install_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (rows_[i][cols_] >= 0.0) continue;
            for (double& v : rows_[i]) v = -v;
            artificial_rows_.push_back(i);
        }
        std::size_t extra = artificial_rows_.size();
        if (extra == 0) {
            first_artificial_ = cols_;  // phase 2 may use every real column
            return;
        }
        std::size_t new_cols = cols_ + extra;
        for (auto& r : rows_) {
            r.insert(r.end() - 1, extra, 0.0);
        }
        for (std::size_t k = 0; k < extra; ++k) {
            std::size_t i = artificial_rows_[k];
            rows_[i][cols_ + k] = 1.0;
            basis_[i] = cols_ + k;
        }
        first_artificial_ = cols_;
        cols_ = new_cols;
    }

    bool has_artificials() const { return first_artificial_ < cols_; }

    // Minimizes sum of artificials. Returns false when the limit was hit.
    bool phase1(bool& feasible) {
        std::vector<double> cost(cols_ + 1, 0.0);
        for (std::size_t j = first_artificial_; j < cols_; ++j) cost[j] = 1.0;
        reduce_cost(cost);
        // Artificial mass cannot drop below zero, so stop as soon as it does.
        if (!iterate(cost, -kTol, cols_)) return false;
        feasible = -cost[cols_] <= kTol;  // cost rhs holds -objective
        return true;
    }

    // Maximizes objective . x' (cost row minimizes the negation). Stops once
    // the running objective reaches `target`.
    bool phase2(const std::vector<double>& objective, double target) {
        std::vector<double> cost(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < n_ && j < objective.size(); ++j) cost[j] = -objective[j];
        reduce_cost(cost);
        return iterate(cost, target, first_artificial_);
    }

    std::vector<double> solution() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = rows_[i][cols_];
        return x;
    }

    // Pivots any zero-valued basic artificial onto a real column so phase-2
    // pivots cannot regrow it; linearly dependent rows are blanked.
    void drive_out_artificials() {
        if (!has_artificials()) return;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < first_artificial_) continue;
            std::size_t col = first_artificial_;
            for (std::size_t j = 0; j < first_artificial_; ++j)
                if (std::fabs(rows_[i][j]) > kTol) {
                    col = j;
                    break;
                }
            if (col == first_artificial_) {
                for (double& v : rows_[i]) v = 0.0;
                continue;
            }
            pivot(i, col, nullptr);
        }
    }

private:
    // Turns a raw cost vector into reduced costs w.r.t. the current basis.
    void reduce_cost(std::vector<double>& cost) {
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) cost[j] -= cb * rows_[i][j];
        }
    }

    void pivot(std::size_t row, std::size_t col, std::vector<double>* cost) {
        double inv = 1.0 / rows_[row][col];
        for (double& v : rows_[row]) v *= inv;
        rows_[row][col] = 1.0;  // cancel residual rounding
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            double f = rows_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) rows_[i][j] -= f * rows_[row][j];
            rows_[i][col] = 0.0;
        }
        if (cost) {
            double f = (*cost)[col];
            if (f != 0.0) {
                for (std::size_t j = 0; j <= cols_; ++j) (*cost)[j] -= f * rows_[row][j];
                (*cost)[col] = 0.0;
            }
        }
        basis_[row] = col;
    }

    // Bland's rule: entering = lowest-index column with negative reduced
    // cost; leaving = minimum ratio, ties toward the lowest basis index.
    bool iterate(std::vector<double>& cost, double target, std::size_t col_limit) {
        for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
            if (cost[cols_] >= target) return true;  // early objective stop
            std::size_t entering = col_limit;
            for (std::size_t j = 0; j < col_limit; ++j)
                if (cost[j] < -kTol) {
                    entering = j;
                    break;
                }
            if (entering == col_limit) return true;  // optimal

            std::size_t leaving = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                double a = rows_[i][entering];
                if (a <= kTol) continue;
                double ratio = rows_[i][cols_] / a;
                if (leaving == m_ || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leaving])) {
                    leaving = i;
                    best_ratio = ratio;
                }
            }
            if (leaving == m_) return true;  // unbounded improvement: feasible stays feasible
            pivot(leaving, entering, &cost);
        }
        return false;
    }

    std::size_t n_;
    std::size_t m_;
    std::size_t cols_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> artificial_rows_;
    std::size_t first_artificial_ = std::numeric_limits<std::size_t>::max();
};

}  // namespace

LpResult solve_lp(const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::vector<LinearConstraint>& rows,
                  const std::vector<double>& objective, double objective_target) {
    std::size_t n = lo.size();
    if (hi.size() != n) raise(ErrorKind::DimensionMismatch, "lo/hi length mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(std::isfinite(lo[j]) && std::isfinite(hi[j])))
            raise(ErrorKind::InconsistentBox, "variable bounds must be finite");
        if (lo[j] > hi[j]) return LpResult{LpStatus::infeasible, {}, 0.0};
    }

    // Shift to x' = x - lo; upper bounds become plain rows.
    std::size_t m = rows.size() + n;
    Tableau tab(n, m);
    std::vector<double> coeffs(n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].coeffs.size() != n)
            raise(ErrorKind::DimensionMismatch, "constraint arity mismatch");
        double shift = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            coeffs[j] = rows[i].coeffs[j];
            shift += coeffs[j] * lo[j];
        }
        tab.set_row(i, coeffs, rows[i].rhs - shift);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(coeffs.begin(), coeffs.end(), 0.0);
        coeffs[j] = 1.0;
        tab.set_row(rows.size() + j, coeffs, hi[j] - lo[j]);
    }

    tab.install_artificials();
    if (tab.has_artificials()) {
        bool feasible = false;
        if (!tab.phase1(feasible)) return LpResult{LpStatus::iteration_limit, {}, 0.0};
        if (!feasible) return LpResult{LpStatus::infeasible, {}, 0.0};
        tab.drive_out_artificials();
    }

    if (!objective.empty()) {
        double shift = 0.0;
        for (std::size_t j = 0; j < n && j < objective.size(); ++j) shift += objective[j] * lo[j];
        if (!tab.phase2(objective, objective_target - shift))
            return LpResult{LpStatus::iteration_limit, {}, 0.0};
    }

    LpResult res;
    res.status = LpStatus::feasible;
    res.x = tab.solution();
    for (std::size_t j = 0; j < n; ++j) res.x[j] += lo[j];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n && j < objective.size(); ++j)
        res.objective += objective[j] * res.x[j];
    return res;
}

}  // namespace nnrules
