#include "mkvcyl/girsanov.hpp"

#include <cmath>
#include <sstream>

#include "mkvcyl/fraccalc.hpp"
#include "mkvcyl/parallel.hpp"

namespace mkvcyl {

LatticeFunction inverse_kernel_drift(const LatticeFunction& u, double H)
{
    return inverse_from_derivative(u, H);
}

double dk_bound(double C, double H, double T)
{
    if (!(H > 0.0 && H < 1.0))
        throw DomainError("dk_bound: H outside (0,1)");
    if (H == 0.5) return T * C * C;
    if (H < 0.5) return T * T * C * C;
    return C * C / (1.0 - H);
}

double regular_factor(double H, double T)
{
    return H > 0.5 ? 2.0 * std::max(1.0, std::pow(T, 2.0 - 2.0 * H)) : 1.0;
}

double singular_factor(double H)
{
    if (!(H < 0.5)) return 1.0;
    // K_H^{-1} is positive here, so u = C is extremal: v = (C/I) s^{1/2-H} with
    // I = K_H(s^{1/2-H})(1), and int_0^T v^2 = C^2 T^{2-2H} / ((2-2H) I^2).
    const double I = kernel_scale(H) * std::tgamma(2.0 - 2.0 * H) / std::tgamma(1.5 - H);
    return std::max(1.0, 1.0 / ((2.0 - 2.0 * H) * I * I));
}

namespace {

// L == nullptr means the Brownian case (all-ones kernel).
void solve_cells(const double* u, double* v, const std::vector<double>* L, std::size_t N, double h)
{
    if (!L) {
        for (std::size_t j = 0; j < N; ++j)
            v[j] = u[j];
        return;
    }
    double U = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        U += u[n - 1] * h;
        const double* row = &(*L)[(n - 1) * N];
        double acc = U;
        for (std::size_t j = 0; j + 1 < n; ++j)
            acc -= row[j] * v[j] * h;
        v[n - 1] = acc / (row[n - 1] * h);
    }
}

std::vector<const std::vector<double>*> kernels(const HurstSpectrum& spec, const CylindricalPathSet& paths)
{
    std::vector<const std::vector<double>*> out;
    for (double H : spec.hurst)
        out.push_back(generating_matrix(H, paths.lattice, paths.generator));
    return out;
}

} // namespace

void inverse_kernel_cells(const double* u, double* v, double H, const TimeLattice& lattice, Generator gen)
{
    solve_cells(u, v, generating_matrix(H, lattice, gen), lattice.steps, lattice.h());
}

std::vector<StochasticExponentialSample> stochastic_exponential(const std::vector<double>& u,
                                                                const CylindricalPathSet& paths)
{
    const std::size_t M = paths.particles, K = paths.modes(), N = paths.steps();
    if (u.size() != M * K * N)
        throw DomainError("stochastic_exponential: shift array has wrong size");
    if (paths.increments.size() != M * K * N)
        throw DomainError("stochastic_exponential: paths carry no increments");
    const double h = paths.lattice.h();
    const auto Ls = kernels(paths.spectrum, paths);

    std::vector<StochasticExponentialSample> out(M);
    parallel_for(M, [&](std::size_t m) {
        std::vector<double> v(N);
        StochasticExponentialSample s;
        for (std::size_t k = 0; k < K; ++k) {
            solve_cells(&u[(m * K + k) * N], v.data(), Ls[k], N, h);
            const double* dw = paths.dW(m, k);
            for (std::size_t j = 0; j < N; ++j) {
                s.ito_term += v[j] * dw[j];
                s.quadratic_term += v[j] * v[j] * h;
            }
        }
        s.log_density = s.ito_term - 0.5 * s.quadratic_term;
        out[m] = s;
    });
    for (const auto& s : out)
        if (!(std::abs(s.log_density) <= 700.0))
            throw NumericalError("stochastic_exponential: |log density| exceeds 700");
    return out;
}

std::vector<StochasticExponentialSample> stochastic_exponential(const std::vector<LatticeFunction>& u,
                                                                const CylindricalPathSet& paths)
{
    const std::size_t M = paths.particles, K = paths.modes(), N = paths.steps();
    if (u.size() != K)
        throw DomainError("stochastic_exponential: one shift per mode expected");
    std::vector<double> flat(M * K * N);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k) {
            if (!(u[k].lattice == paths.lattice))
                throw DomainError("stochastic_exponential: lattice mismatch");
            for (std::size_t i = 0; i < N; ++i)
                flat[(m * K + k) * N + i] = u[k][i];
        }
    return stochastic_exponential(flat, paths);
}

GirsanovCertificate evaluate_certificate(const HurstSpectrum& spec, const std::vector<double>& C,
                                         const CylindricalPathSet& paths, const ShiftEval& shift,
                                         double slack)
{
    validate_spectrum(spec);
    const std::size_t K = spec.modes(), N = paths.steps(), M = paths.particles;
    if (C.size() != K)
        throw DomainError("certify: drift bound count does not match modes");
    if (paths.modes() != K)
        throw DomainError("certify: path set has a different mode count");

    GirsanovCertificate cert;
    cert.slack = slack;
    cert.dk.resize(K);
    cert.dk_core.resize(K);
    cert.factor.resize(K);
    cert.empirical_dk.assign(K, 0.0);
    cert.observed_constant.assign(K, 0.0);
    const double T = spec.horizon, h = paths.lattice.h();
    for (std::size_t k = 0; k < K; ++k) {
        cert.dk_core[k] = dk_bound(C[k], spec.hurst[k], T);
        cert.factor[k] = spec.hurst[k] < 0.5 ? singular_factor(spec.hurst[k]) : regular_factor(spec.hurst[k], T);
        cert.dk[k] = cert.dk_core[k] * cert.factor[k];
        cert.dk_sum += cert.dk[k];
    }

    const auto Ls = kernels(spec, paths);
    std::vector<double> per(M * K, 0.0);
    parallel_for(M, [&](std::size_t m) {
        std::vector<double> u(N), v(N);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t i = 0; i < N; ++i)
                u[i] = shift(m, k, i);
            solve_cells(u.data(), v.data(), Ls[k], N, h);
            double q = 0.0;
            for (double x : v)
                q += x * x * h;
            per[m * K + k] = q;
        }
    });
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k)
            cert.empirical_dk[k] = std::max(cert.empirical_dk[k], per[m * K + k]);

    for (std::size_t k = 0; k < K; ++k) {
        if (cert.dk_core[k] > 0.0)
            cert.observed_constant[k] = cert.empirical_dk[k] / cert.dk_core[k];
        if (!(cert.empirical_dk[k] <= cert.dk[k] * (1.0 + slack)))
            cert.violating.push_back(k);
    }
    cert.conditions_ok = cert.violating.empty() && std::isfinite(cert.dk_sum);
    return cert;
}

GirsanovCertificate certify(const HurstSpectrum& spec, const std::vector<double>& C,
                            const CylindricalPathSet& paths, const ShiftEval& shift, double slack)
{
    auto cert = evaluate_certificate(spec, C, paths, shift, slack);
    if (!cert.conditions_ok) {
        std::ostringstream os;
        os << "certificate violated for mode(s)";
        for (std::size_t k : cert.violating)
            os << ' ' << (k + 1);
        throw CertificateError(os.str());
    }
    return cert;
}

std::string format_certificate(const GirsanovCertificate& cert, const HurstSpectrum& spec)
{
    std::ostringstream os;
    os.precision(17);
    os << "modes = " << cert.dk.size() << '\n';
    os << "dk_sum = " << cert.dk_sum << '\n';
    os << "slack = " << cert.slack << '\n';
    os << "conditions_ok = " << (cert.conditions_ok ? "true" : "false") << '\n';
    for (std::size_t k = 0; k < cert.dk.size(); ++k) {
        const char* regime = spec.hurst[k] < 0.5 ? "singular" : spec.hurst[k] > 0.5 ? "regular" : "brownian";
        os << "mode." << (k + 1) << ".hurst = " << spec.hurst[k] << '\n';
        os << "mode." << (k + 1) << ".regime = " << regime << '\n';
        os << "mode." << (k + 1) << ".dk_core = " << cert.dk_core[k] << '\n';
        os << "mode." << (k + 1) << ".factor = " << cert.factor[k] << '\n';
        os << "mode." << (k + 1) << ".dk = " << cert.dk[k] << '\n';
        os << "mode." << (k + 1) << ".empirical_dk = " << cert.empirical_dk[k] << '\n';
        os << "mode." << (k + 1) << ".observed_constant = " << cert.observed_constant[k] << '\n';
    }
    return os.str();
}

} // namespace mkvcyl
