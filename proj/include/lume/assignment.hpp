#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lume {

/// Row-major similarity matrix: rows are predictions, cols are ground truth.
struct WeightMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> weights;

    WeightMatrix() = default;
    WeightMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), weights(static_cast<std::size_t>(r) * c, fill) {}

    [[nodiscard]] double at(int r, int c) const {
        return weights[static_cast<std::size_t>(r) * cols + c];
    }
    double& at(int r, int c) {
        return weights[static_cast<std::size_t>(r) * cols + c];
    }
};

/// A maximum-cardinality matching: min(rows, cols) pairs, each row/col used
/// at most once, `total` the sum of selected weights.
struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // sorted by row
    double total = 0.0;
};

namespace detail {

/// Shortest-augmenting-path solver on a square min-cost matrix (O(n^3)).
/// Returns col index per row.
inline std::vector<int> min_cost_square(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

/// Optimal total of the maximization problem, without tie-break guarantees.
/// Rectangular matrices are padded to square; padded cells cost a constant,
/// so every optimum keeps min(rows, cols) real pairs.
inline Assignment solve_core(const WeightMatrix& w) {
    Assignment out;
    if (w.rows == 0 || w.cols == 0) return out;
    const int n = std::max(w.rows, w.cols);
    double wmax = 0.0;
    for (double x : w.weights) wmax = std::max(wmax, x);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < w.rows; ++i)
        for (int j = 0; j < w.cols; ++j) cost[i][j] = wmax - w.at(i, j);
    const std::vector<int> row_to_col = min_cost_square(cost);
    for (int i = 0; i < w.rows; ++i) {
        const int j = row_to_col[i];
        if (j < w.cols) {
            out.pairs.emplace_back(i, j);
            out.total += w.at(i, j);
        }
    }
    return out;
}

inline WeightMatrix submatrix(const WeightMatrix& w, const std::vector<int>& rows,
                              const std::vector<int>& cols) {
    WeightMatrix sub(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            sub.at(static_cast<int>(i), static_cast<int>(j)) = w.at(rows[i], cols[j]);
    return sub;
}

} // namespace detail

/// Maximum-weight assignment over all maximum-cardinality matchings, with the
/// lexicographically smallest pair list among optima. Worst-case O(n^3) for
/// the optimum itself; the tie-break refinement re-solves shrinking
/// subproblems row by row.
inline Assignment solve_max(const WeightMatrix& w) {
    for (double x : w.weights)
        if (!std::isfinite(x)) throw std::invalid_argument("solve_max: non-finite weight");
    const Assignment core = detail::solve_core(w);
    if (core.pairs.empty()) return core;
    constexpr double tol = 1e-9;

    Assignment out;
    std::vector<int> free_cols(w.cols);
    for (int j = 0; j < w.cols; ++j) free_cols[j] = j;
    int skips_left = w.rows - std::min(w.rows, w.cols);
    double prefix = 0.0;
    for (int i = 0; i < w.rows; ++i) {
        std::vector<int> rest_rows;
        for (int r = i + 1; r < w.rows; ++r) rest_rows.push_back(r);
        bool fixed = false;
        for (std::size_t jj = 0; jj < free_cols.size() && !fixed; ++jj) {
            const int j = free_cols[jj];
            std::vector<int> rest_cols;
            for (std::size_t kk = 0; kk < free_cols.size(); ++kk)
                if (kk != jj) rest_cols.push_back(free_cols[kk]);
            const double rest =
                detail::solve_core(detail::submatrix(w, rest_rows, rest_cols)).total;
            if (prefix + w.at(i, j) + rest >= core.total - tol) {
                out.pairs.emplace_back(i, j);
                prefix += w.at(i, j);
                free_cols.erase(free_cols.begin() + static_cast<std::ptrdiff_t>(jj));
                fixed = true;
            }
        }
        if (!fixed) {
            // leaving this row unmatched must still be optimal and feasible
            --skips_left;
            if (skips_left < 0)
                throw std::logic_error("solve_max: tie-break refinement lost cardinality");
        }
    }
    out.total = prefix;
    return out;
}

/// Exhaustive oracle for matrices with max dimension <= 8. Same optimality
/// and tie-break contract as solve_max.
inline Assignment brute_max(const WeightMatrix& w) {
    if (std::max(w.rows, w.cols) > 8)
        throw std::invalid_argument("brute_max: matrix too large for exhaustive search");
    Assignment best;
    best.total = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> current;
    std::vector<char> col_used(static_cast<std::size_t>(w.cols), 0);
    const int target = std::min(w.rows, w.cols);
    auto recurse = [&](auto&& self, int row, int matched, double total) -> void {
        if (row == w.rows) {
            if (matched == target && total > best.total) {
                best.total = total;
                best.pairs = current;
            }
            return;
        }
        for (int j = 0; j < w.cols; ++j) {
            if (col_used[j]) continue;
            col_used[j] = 1;
            current.emplace_back(row, j);
            self(self, row + 1, matched + 1, total + w.at(row, j));
            current.pop_back();
            col_used[j] = 0;
        }
        if (w.rows - row - 1 + matched >= target)  // skipping still reaches full cardinality
            self(self, row + 1, matched, total);
    };
    recurse(recurse, 0, 0, 0.0);
    if (best.pairs.empty() && target > 0)
        best.total = 0.0;
    if (target == 0) best.total = 0.0;
    return best;
}

} // namespace lume
