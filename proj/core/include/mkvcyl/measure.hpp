#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mkvcyl/lattice.hpp"

namespace mkvcyl {

// Finitely supported probability measure on R^K.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;
    // points: n x dim row-major. Masses must be >= 0 and sum to 1 (1e-12).
    EmpiricalMeasure(std::size_t dim, std::vector<double> points, std::vector<double> masses);

    static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> points);
    static EmpiricalMeasure dirac(std::vector<double> x);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return masses_.size(); }
    const double* point(std::size_t i) const { return &points_[i * dim_]; }
    double mass(std::size_t i) const { return masses_[i]; }
    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& masses() const { return masses_; }
    // Barycentre, computed once at construction.
    const std::vector<double>& mean() const { return mean_; }

    bool operator==(const EmpiricalMeasure& o) const
    {
        return dim_ == o.dim_ && points_ == o.points_ && masses_ == o.masses_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> points_;
    std::vector<double> masses_;
    std::vector<double> mean_;
};

struct EmpiricalFlow {
    TimeLattice lattice;
    std::vector<EmpiricalMeasure> measures;  // one per node

    static EmpiricalFlow constant(const TimeLattice& lattice, const EmpiricalMeasure& m);
};

struct MetricOptions {
    std::size_t cap = 2000;  // largest merged support accepted by bl_distance
};

// Dual bounded-Lipschitz distance, exact. Euclidean ground metric.
double bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   const MetricOptions& opt = {});

// Same value from a dense simplex on the pairwise-constraint LP. O(n^2) rows;
// only for small supports.
double bl_distance_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Wasserstein-1 with Euclidean cost.
double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   const MetricOptions& opt = {});

// max over nodes of bl_distance; nodes are evaluated in parallel.
double flow_sup_distance(const EmpiricalFlow& mu, const EmpiricalFlow& nu,
                         const MetricOptions& opt = {});

// Per-node distances (same as above without the max).
std::vector<double> flow_distances(const EmpiricalFlow& mu, const EmpiricalFlow& nu,
                                   const MetricOptions& opt = {});

// max_i bl(mu_{i+1}, mu_i) / h^kappa.
double holder_modulus(const EmpiricalFlow& flow, double kappa, const MetricOptions& opt = {});

// Systematic resampling to `target` equal-mass atoms, one uniform drawn from
// seed. Measures of equal size with equal masses resample the same indices.
// target >= size returns the measure unchanged.
EmpiricalMeasure subsample(const EmpiricalMeasure& m, std::size_t target, std::uint64_t seed);

EmpiricalFlow subsample(const EmpiricalFlow& f, std::size_t target, std::uint64_t seed);

} // namespace mkvcyl
