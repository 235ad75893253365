#pragma once

#include <cstddef>
#include <vector>

#include "mkvcyl/lattice.hpp"

namespace mkvcyl {

// Left-sided Riemann-Liouville integral I^alpha_{0+} at the lattice nodes.
// Product integration: the weight (t_n - y)^(alpha-1) is integrated exactly
// against the piecewise-linear interpolant of f. Any alpha > 0 is accepted.
LatticeFunction frac_integral(const LatticeFunction& f, double alpha);

// Riemann-Liouville derivative D^alpha_{0+}, alpha in (0,1), Marchaud form.
// The leading c*t^alpha term fitted through nodes 0 and 1 is differentiated
// analytically; the remainder goes through product integration. The value at
// t = 0 is the one-sided limit, NaN when g(0) != 0.
LatticeFunction frac_derivative(const LatticeFunction& g, double alpha);

// Volterra operator of fBm: (K_H f)(t) = int_0^t K_H(t,s) f(s) ds.
LatticeFunction k_op(const LatticeFunction& f, double H);

// Inverse of k_op for F with F(0) = 0 (DomainError otherwise, tolerance 1e-12).
// F' is taken by finite differences: centred inside, one-sided at the ends.
LatticeFunction k_op_inverse(const LatticeFunction& F, double H);

// s -> K_H^{-1}(int_0^. u)(s), working from the derivative u directly so no
// finite difference is involved. Equal to u when H = 1/2.
LatticeFunction inverse_from_derivative(const LatticeFunction& u, double H);

// K_H = kernel_scale(H) * (composition of fractional integrals with power
// weights). b_H*Gamma(H+1/2) for H < 1/2, c_H*Gamma(H-1/2) for H > 1/2, 1 at 1/2.
double kernel_scale(double H);

// K_H 1 = unit_response(H) * s^(H+1/2).
double unit_response(double H);

// Normalising constants of the singular and regular kernels.
double kernel_bH(double H);
double kernel_cH(double H);

// Pointwise kernel K_H(t, s) for 0 < s < t. tms = t - s is passed separately
// so callers near the diagonal keep full precision.
double fbm_kernel(double H, double t, double s, double tms);
inline double fbm_kernel(double H, double t, double s) { return fbm_kernel(H, t, s, t - s); }

namespace detail {

// Dense (N+1)x(N+1) row-major lower-triangular matrices on the unit lattice
// (h = 1). Cached per argument tuple; the reference stays valid for the life
// of the process.
//
// weighted_integral: row n approximates
//   int_0^n (n-y)^(alpha-1) y^beta phi(y) dy
// for piecewise-linear phi. Multiply by h^(alpha+beta)/Gamma(alpha).
const std::vector<double>& weighted_integral_matrix(double alpha, double beta, std::size_t N);

// marchaud: row n approximates
//   n^(beta-alpha) phi(n) (1 + alpha J) + alpha int_0^n y^beta (phi(n)-phi(y)) (n-y)^(-alpha-1) dy
// so that D^alpha[y^beta phi](n) = row / Gamma(1-alpha). Multiply by h^(beta-alpha).
// Row 0 is zero.
const std::vector<double>& marchaud_matrix(double alpha, double beta, std::size_t N);

std::vector<double> apply_lower(const std::vector<double>& A, const std::vector<double>& x);

std::vector<double> finite_difference(const LatticeFunction& F);

} // namespace detail

} // namespace mkvcyl
