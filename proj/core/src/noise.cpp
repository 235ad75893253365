#include "mkvcyl/noise.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mkvcyl/fraccalc.hpp"
#include "mkvcyl/parallel.hpp"
#include "mkvcyl/quadrature.hpp"
#include "mkvcyl/rng.hpp"

namespace mkvcyl {

namespace {

// Kernel cell averages on the unit lattice (h = 1). K_H(ct, cs) = c^{H-1/2} K_H(t, s).
std::vector<double> build_unit_volterra(double H, std::size_t N)
{
    std::vector<double> L(N * N, 0.0);
    if (H == 0.5) {
        for (std::size_t n = 1; n <= N; ++n)
            for (std::size_t j = 0; j < n; ++j)
                L[(n - 1) * N + j] = 1.0;
        return L;
    }

    boost::math::quadrature::tanh_sinh<double> ts;
    const auto gl = gauss_legendre01(16);
    for (std::size_t n = 1; n <= N; ++n) {
        const double t = static_cast<double>(n);
        auto by_s = [&](double s) { return fbm_kernel(H, t, s, t - s); };
        auto by_u = [&](double u) { return fbm_kernel(H, t, t - u, u); };
        double* row = &L[(n - 1) * N];
        if (n == 1) {
            row[0] = ts.integrate(by_s, 0.0, 0.5) + ts.integrate(by_u, 0.0, 0.5);
            continue;
        }
        row[0] = ts.integrate(by_s, 0.0, 1.0);
        row[n - 1] = ts.integrate(by_u, 0.0, 1.0);
        for (std::size_t j = 1; j + 1 < n; ++j) {
            double acc = 0.0;
            for (std::size_t q = 0; q < gl.nodes.size(); ++q)
                acc += gl.weights[q] * by_s(static_cast<double>(j) + gl.nodes[q]);
            row[j] = acc;
        }
    }
    return L;
}

struct MatrixCache {
    std::mutex mu;
    std::map<std::tuple<double, std::size_t, double>, std::shared_ptr<const std::vector<double>>> store;

    template <class Build>
    const std::vector<double>& get(double H, const TimeLattice& lattice, Build build)
    {
        const auto key = std::make_tuple(H, lattice.steps, lattice.horizon);
        {
            std::lock_guard lock(mu);
            auto it = store.find(key);
            if (it != store.end())
                return *it->second;
        }
        auto ptr = std::make_shared<const std::vector<double>>(build());
        std::lock_guard lock(mu);
        auto [it, inserted] = store.emplace(key, std::move(ptr));
        return *it->second;
    }
};

MatrixCache& volterra_cache()
{
    static MatrixCache c;
    return c;
}

MatrixCache& cholesky_cache()
{
    static MatrixCache c;
    return c;
}

void check_particles(std::size_t M)
{
    if (M == 0)
        throw DomainError("particle count must be positive");
}

void fill_increments(CylindricalPathSet& ps)
{
    const std::size_t K = ps.modes(), N = ps.steps();
    const double sh = std::sqrt(ps.lattice.h());
    const Philox4x32 gen(ps.seed);
    ps.increments.assign(ps.particles * K * N, 0.0);
    parallel_for(ps.particles, [&](std::size_t m) {
        for (std::size_t k = 0; k < K; ++k) {
            double* dw = ps.dW(m, k);
            for (std::size_t j = 0; j < N; ++j)
                dw[j] = sh * normal_at(gen, static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(k),
                                       static_cast<std::uint32_t>(j));
        }
    });
}

void synthesise(CylindricalPathSet& ps)
{
    const std::size_t K = ps.modes(), N = ps.steps();
    std::vector<const std::vector<double>*> mats(K);
    for (std::size_t k = 0; k < K; ++k)
        mats[k] = &volterra_matrix(ps.spectrum.hurst[k], ps.lattice);
    ps.fbm.assign(ps.particles * K * (N + 1), 0.0);
    parallel_for(ps.particles, [&](std::size_t m) {
        for (std::size_t k = 0; k < K; ++k) {
            const auto& L = *mats[k];
            const double* dw = ps.dW(m, k);
            double* b = ps.path(m, k);
            b[0] = 0.0;
            for (std::size_t n = 1; n <= N; ++n) {
                const double* row = &L[(n - 1) * N];
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += row[j] * dw[j];
                b[n] = acc;
            }
        }
    });
}

} // namespace

double fbm_covariance(double H, double t, double s)
{
    if (t < 0.0 || s < 0.0)
        throw DomainError("fbm_covariance: negative time");
    if (!(H > 0.0 && H < 1.0))
        throw DomainError("fbm_covariance: H outside (0,1)");
    const double e = 2.0 * H;
    return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double noise_normal(std::uint64_t seed, std::size_t particle, std::size_t mode, std::size_t step)
{
    const Philox4x32 gen(seed);
    return normal_at(gen, static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(mode),
                     static_cast<std::uint32_t>(step));
}

const std::vector<double>& volterra_matrix(double H, const TimeLattice& lattice)
{
    if (!(H > 0.0 && H < 1.0))
        throw DomainError("volterra_matrix: H outside (0,1)");
    return volterra_cache().get(H, lattice, [&] {
        auto L = build_unit_volterra(H, lattice.steps);
        const double scale = std::pow(lattice.h(), H - 0.5);
        for (double& v : L)
            v *= scale;
        return L;
    });
}

const std::vector<double>& cholesky_matrix(double H, const TimeLattice& lattice)
{
    if (!(H > 0.0 && H < 1.0))
        throw DomainError("cholesky_matrix: H outside (0,1)");
    return cholesky_cache().get(H, lattice, [&] {
        const std::size_t N = lattice.steps;
        Eigen::MatrixXd R(N, N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                R(i, j) = fbm_covariance(H, lattice.t(i + 1), lattice.t(j + 1));
        Eigen::LLT<Eigen::MatrixXd> llt(R);
        if (llt.info() != Eigen::Success)
            throw NumericalError("cholesky_fbm: covariance not positive definite");
        const Eigen::MatrixXd L = llt.matrixL();
        const double inv = 1.0 / std::sqrt(lattice.h());
        std::vector<double> G(N * N, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                G[i * N + j] = L(i, j) * inv;
        return G;
    });
}

const std::vector<double>* generating_matrix(double H, const TimeLattice& lattice, Generator gen)
{
    if (H == 0.5)
        return nullptr;
    return gen == Generator::cholesky ? &cholesky_matrix(H, lattice) : &volterra_matrix(H, lattice);
}

CylindricalPathSet volterra_fbm(const HurstSpectrum& spec, const TimeLattice& lattice,
                                std::size_t particles, std::uint64_t seed)
{
    validate_spectrum(spec);
    check_particles(particles);
    CylindricalPathSet ps;
    ps.lattice = lattice;
    ps.spectrum = spec;
    ps.particles = particles;
    ps.seed = seed;
    fill_increments(ps);
    synthesise(ps);
    return ps;
}

CylindricalPathSet volterra_from_increments(const HurstSpectrum& spec, const TimeLattice& lattice,
                                            std::size_t particles, std::vector<double> increments,
                                            std::uint64_t seed)
{
    validate_spectrum(spec);
    check_particles(particles);
    if (increments.size() != particles * spec.modes() * lattice.steps)
        throw DomainError("increment array has wrong size");
    CylindricalPathSet ps;
    ps.lattice = lattice;
    ps.spectrum = spec;
    ps.particles = particles;
    ps.seed = seed;
    ps.increments = std::move(increments);
    synthesise(ps);
    return ps;
}

CylindricalPathSet cholesky_fbm(const HurstSpectrum& spec, const TimeLattice& lattice,
                                std::size_t particles, std::uint64_t seed)
{
    validate_spectrum(spec);
    check_particles(particles);
    const std::size_t K = spec.modes(), N = lattice.steps;
    std::vector<const std::vector<double>*> G(K);
    for (std::size_t k = 0; k < K; ++k)
        G[k] = &cholesky_matrix(spec.hurst[k], lattice);

    CylindricalPathSet ps;
    ps.lattice = lattice;
    ps.spectrum = spec;
    ps.particles = particles;
    ps.seed = seed;
    ps.generator = Generator::cholesky;
    fill_increments(ps);
    ps.fbm.assign(particles * K * (N + 1), 0.0);

    parallel_for(particles, [&](std::size_t m) {
        for (std::size_t k = 0; k < K; ++k) {
            const auto& L = *G[k];
            double* dw = ps.dW(m, k);
            double* b = ps.path(m, k);
            b[0] = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double* row = &L[i * N];
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j)
                    acc += row[j] * dw[j];
                b[i + 1] = acc;
            }
            if (spec.hurst[k] == 0.5)
                for (std::size_t j = 0; j < N; ++j)
                    dw[j] = b[j + 1] - b[j];
        }
    });
    return ps;
}

WeightedNoiseView::WeightedNoiseView(const CylindricalPathSet& paths, const HurstSpectrum& spec)
    : paths_(&paths), weights_(spec.weights)
{
    if (spec.modes() != paths.modes())
        throw DomainError("weighted_view: mode count mismatch");
}

double WeightedNoiseView::norm(std::size_t m, std::size_t i) const
{
    double acc = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double v = value(m, k, i);
        acc += v * v;
    }
    return std::sqrt(acc);
}

WeightedNoiseView weighted_view(const CylindricalPathSet& paths, const HurstSpectrum& spec)
{
    return WeightedNoiseView(paths, spec);
}

MomentProfile second_moment_profile(const WeightedNoiseView& view)
{
    const auto& ps = view.paths();
    const std::size_t N = ps.steps(), M = ps.particles;
    MomentProfile p;
    p.mean.assign(N + 1, 0.0);
    p.stderr_.assign(N + 1, 0.0);
    p.exact.assign(N + 1, 0.0);
    for (std::size_t i = 0; i <= N; ++i) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double v = view.norm(m, i);
            const double q = v * v;
            s += q;
            s2 += q * q;
        }
        const double mean = s / static_cast<double>(M);
        const double var = M > 1 ? (s2 - s * mean) / static_cast<double>(M - 1) : 0.0;
        p.mean[i] = mean;
        p.stderr_[i] = std::sqrt(std::max(var, 0.0) / static_cast<double>(M));
        const double t = ps.lattice.t(i);
        for (std::size_t k = 0; k < ps.modes(); ++k) {
            const double l = view.weights()[k];
            p.exact[i] += l * l * std::pow(t, 2.0 * ps.spectrum.hurst[k]);
        }
    }
    double l2 = 0.0;
    for (double l : view.weights())
        l2 += l * l;
    p.bound = l2 * ps.lattice.horizon * ps.lattice.horizon;
    return p;
}

SupDiagnostic sup_diagnostic(const CylindricalPathSet& paths)
{
    const std::size_t K = paths.modes(), N = paths.steps();
    SupDiagnostic d;
    d.empirical.assign(K, 0.0);
    d.reference.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < paths.particles; ++m) {
            const double* b = paths.path(m, k);
            double mx = 0.0;
            for (std::size_t i = 0; i <= N; ++i)
                mx = std::max(mx, std::abs(b[i]));
            acc += mx;
        }
        const double H = paths.spectrum.hurst[k];
        d.empirical[k] = acc / static_cast<double>(paths.particles);
        d.reference[k] = std::pow(paths.lattice.horizon, H) / std::sqrt(H);
    }
    return d;
}

} // namespace mkvcyl
