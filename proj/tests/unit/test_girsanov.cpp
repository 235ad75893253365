#include <gtest/gtest.h>

#include <cmath>

#include "mkvcyl/errors.hpp"
#include "mkvcyl/girsanov.hpp"
#include "mkvcyl/noise.hpp"
#include "support/oracles.hpp"

using namespace mkvcyl;

TEST(DkBound, Regimes)
{
    EXPECT_DOUBLE_EQ(dk_bound(2.0, 0.5, 3.0), 12.0);
    EXPECT_DOUBLE_EQ(dk_bound(2.0, 0.3, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(dk_bound(1.0, 0.75, 1.0), 4.0);
    EXPECT_THROW(dk_bound(1.0, 1.0, 1.0), DomainError);
    EXPECT_DOUBLE_EQ(regular_factor(0.3, 4.0), 1.0);
    EXPECT_DOUBLE_EQ(regular_factor(0.75, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(regular_factor(0.75, 4.0), 4.0);
}

TEST(DkBound, SingularFactorIsTheConstantShiftWorstCase)
{
    EXPECT_EQ(singular_factor(0.5), 1.0);
    EXPECT_EQ(singular_factor(0.8), 1.0);
    for (double H : {0.05, 0.13, 0.3, 0.45}) {
        const double I = oracle::kernel_apply(H, 1.0, [H](double r) { return std::pow(r, 0.5 - H); });
        EXPECT_NEAR(singular_factor(H), std::max(1.0, 1.0 / ((2.0 - 2.0 * H) * I * I)), 1e-9) << H;
    }
    EXPECT_GT(singular_factor(0.05), 1.0);
}

TEST(Certificate, ConstantShiftNearSharpInSingularMode)
{
    for (double H : {0.05, 0.13, 0.3}) {
        const HurstSpectrum spec{{H}, {1}, 1.0};
        const auto ps = volterra_fbm(spec, TimeLattice{1.0, 128}, 1, 1);
        const auto c = certify(spec, {1.0}, ps, [](std::size_t, std::size_t, std::size_t) { return 1.0; });
        if (singular_factor(H) > 1.0)
            EXPECT_NEAR(c.empirical_dk[0] / c.dk[0], 1.0, 0.05) << H;
        else
            EXPECT_LE(c.empirical_dk[0], c.dk[0]) << H;
    }
}

TEST(InverseKernelDrift, BrownianIsIdentity)
{
    const auto u = LatticeFunction::sample(TimeLattice{1.0, 16}, [](double t) { return std::cos(3 * t); });
    const auto v = inverse_kernel_drift(u, 0.5);
    for (std::size_t i = 0; i < u.size(); ++i)
        EXPECT_NEAR(v[i], u[i], 1e-14);
}

TEST(InverseKernelDrift, ZeroGivesZero)
{
    for (double H : {0.2, 0.7}) {
        const auto v = inverse_kernel_drift(LatticeFunction::sample(TimeLattice{1.0, 16}, [](double) { return 0.0; }), H);
        for (std::size_t i = 1; i < v.size(); ++i)
            EXPECT_EQ(v[i], 0.0);
    }
}

TEST(InverseKernelDrift, ConstantShiftPowerLaw)
{
    // K_H(A s^{1/2-H}) = c t with A = c / int_0^1 K_H(1,r) r^{1/2-H} dr.
    for (double H : {0.3, 0.7}) {
        const double c = 1.3;
        const double I = oracle::kernel_apply(H, 1.0, [H](double r) { return std::pow(r, 0.5 - H); });
        const double A = c / I;
        const TimeLattice lat{2.0, 128};
        const auto v = inverse_kernel_drift(LatticeFunction::sample(lat, [c](double) { return c; }), H);
        for (std::size_t i = 4; i <= 128; ++i) {
            const double ref = A * std::pow(lat.t(i), 0.5 - H);
            EXPECT_NEAR(v[i], ref, 5e-3 * std::abs(ref)) << "H=" << H << " i=" << i;
        }
    }
}

TEST(InverseKernelCells, ReproducesRunningIntegral)
{
    for (double H : {0.25, 0.5, 0.8})
        for (auto gen : {Generator::volterra, Generator::cholesky}) {
            const TimeLattice lat{1.0, 24};
            std::vector<double> u(24), v(24);
            for (std::size_t i = 0; i < 24; ++i)
                u[i] = std::sin(0.7 * static_cast<double>(i));
            inverse_kernel_cells(u.data(), v.data(), H, lat, gen);
            const auto* G = generating_matrix(H, lat, gen);
            double U = 0.0;
            for (std::size_t n = 1; n <= 24; ++n) {
                U += u[n - 1] * lat.h();
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += (G ? (*G)[(n - 1) * 24 + j] : 1.0) * v[j] * lat.h();
                EXPECT_NEAR(acc, U, 1e-12);
            }
        }
}

TEST(StochasticExponential, ZeroShiftIsOne)
{
    const auto ps = volterra_fbm({{0.3, 0.7}, {1, 1}, 1.0}, TimeLattice{1.0, 16}, 50, 2);
    const auto s = stochastic_exponential(std::vector<double>(50 * 2 * 16, 0.0), ps);
    for (const auto& x : s)
        EXPECT_EQ(std::exp(x.log_density), 1.0);
}

TEST(StochasticExponential, BrownianClosedForm)
{
    const double c = 0.8, T = 2.0;
    const TimeLattice lat{T, 32};
    const auto ps = volterra_fbm({{0.5}, {1}, T}, lat, 40, 5);
    const auto s = stochastic_exponential({LatticeFunction::sample(lat, [c](double) { return c; })}, ps);
    for (std::size_t m = 0; m < 40; ++m) {
        EXPECT_NEAR(s[m].log_density, c * ps.path(m, 0)[32] - 0.5 * c * c * T, 1e-12);
        EXPECT_NEAR(s[m].log_density, s[m].ito_term - 0.5 * s[m].quadratic_term, 1e-14);
        EXPECT_GE(s[m].quadratic_term, 0.0);
    }
}

TEST(StochasticExponential, OverflowGuard)
{
    const TimeLattice lat{1.0, 8};
    const auto ps = volterra_fbm({{0.5}, {1}, 1.0}, lat, 4, 5);
    EXPECT_THROW(stochastic_exponential({LatticeFunction::sample(lat, [](double) { return 1e3; })}, ps),
                 NumericalError);
    EXPECT_THROW(stochastic_exponential(std::vector<double>(3, 0.0), ps), DomainError);
}

TEST(StochasticExponential, MeanOneUnderBothGenerators)
{
    const HurstSpectrum spec{{0.3, 0.75}, {1, 1}, 1.0};
    const TimeLattice lat{1.0, 16};
    const std::size_t M = 20000;
    for (int g = 0; g < 2; ++g) {
        const auto ps = g == 0 ? volterra_fbm(spec, lat, M, 44) : cholesky_fbm(spec, lat, M, 44);
        std::vector<double> u(M * 2 * 16);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t i = 0; i < 16; ++i)
                    u[(m * 2 + k) * 16 + i] = 0.6 * std::tanh(ps.path(m, k)[i]);
        const auto s = stochastic_exponential(u, ps);
        double a = 0.0, a2 = 0.0;
        for (const auto& x : s) {
            const double e = std::exp(x.log_density);
            a += e;
            a2 += e * e;
        }
        const double mean = a / M, se = std::sqrt((a2 / M - mean * mean) / M);
        EXPECT_LE(std::abs(mean - 1.0), 5.0 * se) << "generator " << g;
    }
}

TEST(Certificate, ZeroShift)
{
    const HurstSpectrum spec{{0.3, 0.5, 0.7}, {1, 1, 1}, 1.0};
    const auto ps = volterra_fbm(spec, TimeLattice{1.0, 16}, 10, 1);
    const auto c = certify(spec, {0, 0, 0}, ps, [](std::size_t, std::size_t, std::size_t) { return 0.0; });
    EXPECT_TRUE(c.conditions_ok);
    EXPECT_EQ(c.dk_sum, 0.0);
    for (double d : c.empirical_dk)
        EXPECT_EQ(d, 0.0);
}

TEST(Certificate, BrownianConstantShiftIsTight)
{
    const double C = 1.5, T = 2.0;
    const HurstSpectrum spec{{0.5}, {1}, T};
    const auto ps = volterra_fbm(spec, TimeLattice{T, 20}, 3, 1);
    const auto c = certify(spec, {C}, ps, [C](std::size_t, std::size_t, std::size_t) { return C; });
    EXPECT_NEAR(c.empirical_dk[0], T * C * C, 1e-12);
    EXPECT_NEAR(c.observed_constant[0], 1.0, 1e-12);
    const auto text = format_certificate(c, spec);
    EXPECT_NE(text.find("mode.1.regime = brownian"), std::string::npos);
}

TEST(Certificate, OscillatingShiftRejectedInRegularMode)
{
    const HurstSpectrum spec{{0.8}, {1}, 1.0};
    const auto ps = volterra_fbm(spec, TimeLattice{1.0, 32}, 2, 1);
    const auto step = [](std::size_t, std::size_t, std::size_t i) { return i % 2 ? -1.0 : 1.0; };
    EXPECT_THROW(certify(spec, {1.0}, ps, step), CertificateError);
    const auto c = evaluate_certificate(spec, {1.0}, ps, step);
    EXPECT_FALSE(c.conditions_ok);
    ASSERT_EQ(c.violating.size(), 1u);
    EXPECT_EQ(c.violating[0], 0u);
}

TEST(Certificate, SmoothBoundedShiftsCertify)
{
    gen::Gen g(11);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t K = g.index(1, 3);
        HurstSpectrum spec{{}, {}, g.uniform(1.0, 3.0)};
        std::vector<double> C(K), w(K), phase(K);
        for (std::size_t k = 0; k < K; ++k) {
            spec.hurst.push_back(g.hurst());
            spec.weights.push_back(1.0);
            C[k] = g.uniform(0.1, 2.0);
            w[k] = g.uniform(0.0, 3.0);
            phase[k] = g.uniform(0.0, 6.3);
        }
        const TimeLattice lat{spec.horizon, 32};
        const auto ps = volterra_fbm(spec, lat, 1, 1);
        const auto shift = [&](std::size_t, std::size_t k, std::size_t i) {
            return C[k] * std::cos(w[k] * lat.t(i) + phase[k]);
        };
        const auto cert = evaluate_certificate(spec, C, ps, shift);
        EXPECT_TRUE(cert.conditions_ok) << "rep " << rep << "\n" << format_certificate(cert, spec);
    }
}
