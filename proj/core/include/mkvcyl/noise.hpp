#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mkvcyl/lattice.hpp"
#include "mkvcyl/spectrum.hpp"

namespace mkvcyl {

// Which lower-triangular map G turned the increments into the paths:
// B_n = sum_{j<n} G_{n-1,j} dW_j.
enum class Generator : std::uint32_t { volterra = 0, cholesky = 1 };

// M particles x K modes of fBm paths on a lattice, plus the Brownian
// increments that generate them.
struct CylindricalPathSet {
    TimeLattice lattice;
    HurstSpectrum spectrum;
    std::size_t particles = 0;
    std::uint64_t seed = 0;
    Generator generator = Generator::volterra;
    std::vector<double> fbm;         // [M][K][N+1]
    std::vector<double> increments;  // [M][K][N], dW_j over [t_j, t_{j+1}]

    std::size_t modes() const { return spectrum.modes(); }
    std::size_t steps() const { return lattice.steps; }

    double* path(std::size_t m, std::size_t k) { return &fbm[(m * modes() + k) * (steps() + 1)]; }
    const double* path(std::size_t m, std::size_t k) const
    {
        return &fbm[(m * modes() + k) * (steps() + 1)];
    }
    double* dW(std::size_t m, std::size_t k) { return &increments[(m * modes() + k) * steps()]; }
    const double* dW(std::size_t m, std::size_t k) const
    {
        return &increments[(m * modes() + k) * steps()];
    }
};

double fbm_covariance(double H, double t, double s);

// Lower-triangular N x (N) cell-averaged kernel on the lattice:
// entry (n-1, j) = (1/h) int_{t_j}^{t_{j+1}} K_H(t_n, s) ds, n = 1..N, j < n.
// Row-major, cached per (H, N, T).
const std::vector<double>& volterra_matrix(double H, const TimeLattice& lattice);

// Cholesky factor of [R_H(t_i,t_j)]_{i,j>=1} divided by sqrt(h), row-major,
// cached per (H, N, T).
const std::vector<double>& cholesky_matrix(double H, const TimeLattice& lattice);

// generating map of `gen` for H; nullptr when H = 1/2 (B is the running sum
// of the increments).
const std::vector<double>* generating_matrix(double H, const TimeLattice& lattice, Generator gen);

// Exact-in-distribution paths B = L z from the Cholesky factor of
// [R_H(t_i,t_j)]. The increments are dW = sqrt(h) z, i.i.d. N(0, h), and the
// map back to B is cholesky_matrix. For H = 1/2 they are the path differences.
CylindricalPathSet cholesky_fbm(const HurstSpectrum& spec, const TimeLattice& lattice,
                                std::size_t particles, std::uint64_t seed);

// B_n = sum_{j<n} Kbar(t_n, cell j) dW_j.
CylindricalPathSet volterra_fbm(const HurstSpectrum& spec, const TimeLattice& lattice,
                                std::size_t particles, std::uint64_t seed);

// Same synthesis for caller-supplied increments ([M][K][N]).
CylindricalPathSet volterra_from_increments(const HurstSpectrum& spec, const TimeLattice& lattice,
                                            std::size_t particles, std::vector<double> increments,
                                            std::uint64_t seed = 0);

// Standard-normal draw used for (particle, mode, step).
double noise_normal(std::uint64_t seed, std::size_t particle, std::size_t mode, std::size_t step);

class WeightedNoiseView {
public:
    WeightedNoiseView(const CylindricalPathSet& paths, const HurstSpectrum& spec);

    double value(std::size_t m, std::size_t k, std::size_t i) const
    {
        return weights_[k] * paths_->path(m, k)[i];
    }
    double norm(std::size_t m, std::size_t i) const;
    const CylindricalPathSet& paths() const { return *paths_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    const CylindricalPathSet* paths_;
    std::vector<double> weights_;
};

WeightedNoiseView weighted_view(const CylindricalPathSet& paths, const HurstSpectrum& spec);

struct MomentProfile {
    std::vector<double> mean;    // per node
    std::vector<double> stderr_; // per node
    std::vector<double> exact;   // sum lambda_k^2 t^{2H_k}
    double bound = 0.0;          // |lambda|^2 T^2
};

// Monte-Carlo E|B_t|^2 against its closed form.
MomentProfile second_moment_profile(const WeightedNoiseView& view);

struct SupDiagnostic {
    std::vector<double> empirical;  // E sup_t |B^{H_k}_t| per mode
    std::vector<double> reference;  // T^{H_k} / sqrt(H_k)
};

SupDiagnostic sup_diagnostic(const CylindricalPathSet& paths);

} // namespace mkvcyl
