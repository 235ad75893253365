#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mkvcyl/drift.hpp"
#include "mkvcyl/measure.hpp"
#include "mkvcyl/noise.hpp"

namespace mkvcyl {

// Particle states X^{(m)}_{t_i} in R^K, stored [M][N+1][K].
struct StatePaths {
    TimeLattice lattice;
    std::size_t particles = 0;
    std::size_t modes = 0;
    std::vector<double> x;

    const double* at(std::size_t m, std::size_t i) const { return &x[(m * lattice.size() + i) * modes]; }
    double* at(std::size_t m, std::size_t i) { return &x[(m * lattice.size() + i) * modes]; }
};

// Euler with additive noise, law frozen to `flow`:
// X_{i+1} = X_i + b(t_i, X_i, mu_{t_i}) h + lambda_k (B_{i+1} - B_i).
// The drift part is accumulated separately from the noise, so a zero drift
// reproduces x0 + lambda B bit for bit.
StatePaths solve_frozen(const DriftSpec& drift, const EmpiricalFlow& flow, const CylindricalPathSet& paths,
                        const std::vector<double>& x0);

// Interacting particle system: the law argument at t_i is the empirical
// measure of the M particles at t_i.
StatePaths simulate_interacting(const DriftSpec& drift, const CylindricalPathSet& paths,
                                const std::vector<double>& x0);

// Node-wise empirical laws, masses 1/M.
EmpiricalFlow empirical_flow(const StatePaths& states);

EmpiricalFlow psi_map(const DriftSpec& drift, const EmpiricalFlow& flow, const CylindricalPathSet& paths,
                      const std::vector<double>& x0);

struct FixedPointOptions {
    double tol = 0.02;
    std::size_t max_iter = 20;
    double damping = 1.0;           // mass on the new iterate
    std::size_t metric_subsample = 0;  // 0: compare full supports
    std::uint64_t subsample_seed = 0;
    MetricOptions metric;
    bool keep_iterates = true;
};

struct FixedPointTrace {
    std::vector<EmpiricalFlow> iterates;  // mu^{(1)}, mu^{(2)}, ...
    std::vector<double> distances;        // d_n = dist(mu^{(n+1)}, mu^{(n)})
    std::vector<double> wallclock_ms;     // elapsed time at each distance
    bool converged = false;
    std::size_t iterations_used = 0;
};

// Picard iteration on measure flows with common random numbers. mu^{(1)} =
// psi(init) with init = constant delta_{x0} unless given; then
// mu^{(n+1)} = theta psi(mu^{(n)}) + (1 - theta) mu^{(n)}. Stops at the first
// d_n <= tol or after max_iter distances; not converging is reported in the
// trace, not thrown.
FixedPointTrace fixed_point(const DriftSpec& drift, const CylindricalPathSet& paths, const std::vector<double>& x0,
                            const FixedPointOptions& opt, const EmpiricalFlow* init = nullptr);

// Distance between the limits of fixed_point started from two flows.
double uniqueness_probe(const DriftSpec& drift, const CylindricalPathSet& paths, const std::vector<double>& x0,
                        const EmpiricalFlow& init_a, const EmpiricalFlow& init_b, const FixedPointOptions& opt);

// A constant-in-time flow of `count` atoms spread around x0 + shift.
EmpiricalFlow dispersed_flow(const TimeLattice& lattice, const std::vector<double>& x0, double shift, double spread,
                             std::size_t count);

struct ReweightResult {
    double direct = 0.0;
    double reweighted = 0.0;
    double stderr_ = 0.0;  // pooled: sqrt(se_direct^2 + se_reweighted^2)
    double direct_se = 0.0;
    double reweighted_se = 0.0;
};

using TerminalFunctional = std::function<double(const double* x)>;

// E f(X_T) for the drifted frozen-law equation, once by Euler and once by
// weighting the driftless paths x0 + lambda B with the stochastic exponential.
ReweightResult reweighted_expectation(const DriftSpec& drift, const EmpiricalFlow& flow,
                                      const CylindricalPathSet& paths, const std::vector<double>& x0,
                                      const TerminalFunctional& f);

} // namespace mkvcyl
