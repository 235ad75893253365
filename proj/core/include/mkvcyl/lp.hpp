#pragma once

#include <cstddef>
#include <vector>

namespace mkvcyl {

// maximize c.x  subject to  A x <= b, x >= 0, with b >= 0.
// Dense tableau simplex. Meant for small problems and
// cross-checks, not speed.
struct LinearProgram {
    std::vector<double> c;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
};

struct LPResult {
    double value = 0.0;
    std::vector<double> x;
    std::size_t pivots = 0;
};

LPResult solve_lp(const LinearProgram& lp, double tol = 1e-12);

} // namespace mkvcyl
