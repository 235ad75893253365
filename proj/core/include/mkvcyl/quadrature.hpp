#pragma once

#include <cstddef>
#include <vector>

namespace mkvcyl {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Jacobi rule on [0,1] for the weight (1-y)^a * y^b, a, b > -1.
// Golub-Welsch on the Jacobi matrix.
QuadratureRule gauss_jacobi01(std::size_t n, double a, double b);

inline QuadratureRule gauss_legendre01(std::size_t n) { return gauss_jacobi01(n, 0.0, 0.0); }

} // namespace mkvcyl
