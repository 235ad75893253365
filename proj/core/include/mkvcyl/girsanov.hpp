#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mkvcyl/lattice.hpp"
#include "mkvcyl/noise.hpp"
#include "mkvcyl/spectrum.hpp"

namespace mkvcyl {

struct GirsanovCertificate {
    std::vector<double> dk;            // bound used per mode (core * factor)
    std::vector<double> dk_core;       // dk_bound(C_k, H_k, T)
    std::vector<double> factor;        // singular_factor, 1, or regular_factor by regime
    std::vector<double> empirical_dk;  // max over checked paths of int v^2
    std::vector<double> observed_constant;  // empirical_dk / dk_core (0 when core is 0)
    double dk_sum = 0.0;
    double slack = 0.1;
    bool conditions_ok = false;
    std::vector<std::size_t> violating;  // zero-based modes
};

struct StochasticExponentialSample {
    double log_density = 0.0;
    double ito_term = 0.0;
    double quadratic_term = 0.0;
};

// s -> K_H^{-1}(int_0^. u_r dr)(s) at the nodes (fraccalc route).
LatticeFunction inverse_kernel_drift(const LatticeFunction& u, double H);

// T C^2 (H = 1/2), T^2 C^2 (H < 1/2), C^2/(1-H) (H > 1/2).
double dk_bound(double C, double H, double T);

// Multiplier the certificate applies to dk_bound for the regular regime.
double regular_factor(double H, double T);

// Same for the singular regime: the worst case over |u| <= C relative to
// T^2 C^2 at T = 1, floored at 1. Exceeds 1 for small H. Valid for T >= 1.
double singular_factor(double H);

// Cell-wise inverse of a generating map G: v with sum_j G_{n-1,j} v_j h = U_n,
// U_n = sum_{i<n} u_i h. u holds N left-point values, v receives N values.
void inverse_kernel_cells(const double* u, double* v, double H, const TimeLattice& lattice,
                          Generator gen = Generator::volterra);

// u: [M][K][N] left-point Girsanov shifts (drift / lambda). The inverse uses
// the generating map of `paths`, and the Itô sums run against the stored
// increments, so exp(log_density) is an exact discrete martingale.
// NumericalError if some |log_density| > 700.
std::vector<StochasticExponentialSample> stochastic_exponential(const std::vector<double>& u,
                                                                const CylindricalPathSet& paths);

// Deterministic per-mode shifts, same for every particle (node N is ignored).
std::vector<StochasticExponentialSample> stochastic_exponential(const std::vector<LatticeFunction>& u,
                                                                const CylindricalPathSet& paths);

// Shift u^{(k)} of particle m at node i (i < N).
using ShiftEval = std::function<double(std::size_t m, std::size_t k, std::size_t i)>;

// Computes the certificate without throwing.
GirsanovCertificate evaluate_certificate(const HurstSpectrum& spec, const std::vector<double>& C,
                                         const CylindricalPathSet& paths, const ShiftEval& shift,
                                         double slack = 0.1);

// As above; throws CertificateError naming the violating modes.
GirsanovCertificate certify(const HurstSpectrum& spec, const std::vector<double>& C,
                            const CylindricalPathSet& paths, const ShiftEval& shift, double slack = 0.1);

std::string format_certificate(const GirsanovCertificate& cert, const HurstSpectrum& spec);

} // namespace mkvcyl
