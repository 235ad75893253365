#include "mkvcyl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mkvcyl/errors.hpp"

namespace mkvcyl {

LPResult solve_lp(const LinearProgram& lp, double tol)
{
    const std::size_t m = lp.A.size();
    const std::size_t n = lp.c.size();
    if (lp.b.size() != m)
        throw SolverError("solve_lp: row count mismatch");
    const std::size_t cols = n + m + 1;

    std::vector<double> T((m + 1) * cols, 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return T[i * cols + j]; };
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (lp.A[i].size() != n)
            throw SolverError("solve_lp: ragged constraint matrix");
        if (lp.b[i] < 0.0)
            throw SolverError("solve_lp: negative right-hand side");
        for (std::size_t j = 0; j < n; ++j)
            at(i, j) = lp.A[i][j];
        at(i, n + i) = 1.0;
        at(i, cols - 1) = lp.b[i];
        basis[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j)
        at(m, j) = -lp.c[j];

    LPResult res;
    const std::size_t max_pivots = 50 * (m + n) + 1000;
    const double piv_tol = 1e-9;
    std::size_t degenerate_run = 0;
    for (;;) {
        // Dantzig pricing; Bland's rule after a long degenerate stretch.
        const bool bland = degenerate_run > 50;
        std::size_t enter = cols;
        double most = -tol;
        for (std::size_t j = 0; j + 1 < cols; ++j) {
            const double r = at(m, j);
            if (bland ? r < -tol : r < most) {
                enter = j;
                most = r;
                if (bland) break;
            }
        }
        if (enter == cols)
            break;

        std::size_t leave = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double a = at(i, enter);
            if (a <= piv_tol) continue;
            const double r = std::max(at(i, cols - 1), 0.0) / a;
            if (leave == m || r < best - tol) {
                best = r;
                leave = i;
            } else if (r <= best + tol) {
                const bool take = bland ? basis[i] < basis[leave] : a > at(leave, enter);
                if (take) {
                    best = std::min(best, r);
                    leave = i;
                }
            }
        }
        if (leave == m)
            throw SolverError("solve_lp: unbounded");
        if (++res.pivots > max_pivots)
            throw SolverError("solve_lp: pivot limit reached");
        degenerate_run = (best <= tol) ? degenerate_run + 1 : 0;

        const double p = at(leave, enter);
        for (std::size_t j = 0; j < cols; ++j)
            at(leave, j) /= p;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = at(i, enter);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j)
                at(i, j) -= f * at(leave, j);
        }
        basis[leave] = enter;
    }

    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n)
            res.x[basis[i]] = at(i, cols - 1);
    res.value = at(m, cols - 1);
    return res;
}

} // namespace mkvcyl
