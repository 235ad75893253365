#include "mkvcyl/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mkvcyl/errors.hpp"

namespace mkvcyl {

QuadratureRule gauss_jacobi01(std::size_t n, double a, double b)
{
    if (n == 0 || !(a > -1.0) || !(b > -1.0))
        throw DomainError("gauss_jacobi01: need n >= 1 and exponents > -1");

    // Recurrence for P_n^{(a,b)} on [-1,1]; the n = 0 and n = 1 entries are
    // written in cancelled form so a + b = 0 or -1 cause no 0/0.
    const double s = a + b;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J(0, 0) = (b - a) / (s + 2.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double k = static_cast<double>(i);
        const double d = 2.0 * k + s;
        J(i, i) = (b * b - a * a) / (d * (d + 2.0));
        double off2;
        if (i == 1)
            off2 = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s) * (2.0 + s) * (3.0 + s));
        else
            off2 = 4.0 * k * (k + a) * (k + b) * (k + s) / (d * d * (d + 1.0) * (d - 1.0));
        J(i, i - 1) = J(i - 1, i) = std::sqrt(off2);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw NumericalError("gauss_jacobi01: eigen-solve failed");

    // Total mass of the weight on [0,1] is B(a+1, b+1).
    const double mu0 = std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(s + 2.0));
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.nodes[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
        const double v = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v * v;
    }
    return r;
}

} // namespace mkvcyl
