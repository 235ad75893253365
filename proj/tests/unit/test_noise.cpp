#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mkvcyl/errors.hpp"
#include "mkvcyl/fraccalc.hpp"
#include "mkvcyl/noise.hpp"
#include "mkvcyl/parallel.hpp"
#include "mkvcyl/path_io.hpp"
#include "mkvcyl/rng.hpp"

using namespace mkvcyl;

TEST(Philox, KnownAnswer)
{
    const Philox4x32 g(0);
    const auto out = g({0, 0, 0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, UniformsInOpenInterval)
{
    const Philox4x32 g(5);
    double lo = 1.0, hi = 0.0, s = 0.0;
    for (std::uint32_t i = 0; i < 100000; ++i) {
        const double u = uniform_at(g, i, 1, 2, 3);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        s += u;
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_NEAR(s / 100000, 0.5, 5 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST(Covariance, ClosedFormCases)
{
    EXPECT_DOUBLE_EQ(fbm_covariance(0.5, 2.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(fbm_covariance(0.75, 1.0, 0.5), 0.5);
    for (double H : {0.2, 0.5, 0.9})
        EXPECT_NEAR(fbm_covariance(H, 1.7, 1.7), std::pow(1.7, 2 * H), 1e-15);
    EXPECT_THROW(fbm_covariance(0.5, -1.0, 1.0), DomainError);
}

TEST(Cholesky, BrownianTerminalVariance)
{
    const std::size_t M = 100000;
    const auto ps = cholesky_fbm({{0.5}, {1.0}, 1.0}, TimeLattice{1.0, 16}, M, 3);
    double s = 0.0;
    for (std::size_t m = 0; m < M; ++m)
        s += ps.path(m, 0)[16] * ps.path(m, 0)[16];
    EXPECT_LT(std::abs(s / M - 1.0), 3.0 / std::sqrt(static_cast<double>(M)));
}

TEST(Cholesky, SingularCovarianceWithinFiveSE)
{
    const std::size_t M = 100000, N = 8;
    const TimeLattice lat{1.0, N};
    const auto ps = cholesky_fbm({{0.3}, {1.0}, 1.0}, lat, M, 17);
    for (std::size_t i = 1; i <= N; ++i)
        for (std::size_t j = i; j <= N; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                s += ps.path(m, 0)[i] * ps.path(m, 0)[j];
            const double r = fbm_covariance(0.3, lat.t(i), lat.t(j));
            const double var = fbm_covariance(0.3, lat.t(i), lat.t(i)) * fbm_covariance(0.3, lat.t(j), lat.t(j)) + r * r;
            EXPECT_LE(std::abs(s / M - r), 5.0 * std::sqrt(var / M)) << i << "," << j;
        }
}

TEST(Cholesky, ParticleZeroIsReproducible)
{
    const HurstSpectrum spec{{0.3, 0.7}, {1, 1}, 1.0};
    const auto a = cholesky_fbm(spec, TimeLattice{1.0, 12}, 5, 99);
    const auto b = cholesky_fbm(spec, TimeLattice{1.0, 12}, 1, 99);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i <= 12; ++i)
            EXPECT_EQ(a.path(0, k)[i], b.path(0, k)[i]);
}

TEST(Cholesky, IncrementsRebuildThePaths)
{
    const HurstSpectrum spec{{0.3, 0.5, 0.8}, {1, 1, 1}, 2.0};
    const TimeLattice lat{2.0, 20};
    const auto ps = cholesky_fbm(spec, lat, 10, 5);
    EXPECT_EQ(ps.generator, Generator::cholesky);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto* G = generating_matrix(spec.hurst[k], lat, Generator::cholesky);
        for (std::size_t m = 0; m < 10; ++m)
            for (std::size_t n = 1; n <= 20; ++n) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += (G ? (*G)[(n - 1) * 20 + j] : 1.0) * ps.dW(m, k)[j];
                EXPECT_NEAR(acc, ps.path(m, k)[n], 1e-12);
            }
    }
}

TEST(Generators, IdenticalAcrossThreadCounts)
{
    const HurstSpectrum spec{{0.3, 0.5, 0.7}, {1, 0.5, 0.25}, 1.0};
    const TimeLattice lat{1.0, 16};
    set_threads(1);
    const auto a = volterra_fbm(spec, lat, 257, 8);
    const auto c = cholesky_fbm(spec, lat, 257, 8);
    set_threads(4);
    const auto b = volterra_fbm(spec, lat, 257, 8);
    const auto d = cholesky_fbm(spec, lat, 257, 8);
    set_threads(0);
    EXPECT_EQ(a.fbm, b.fbm);
    EXPECT_EQ(a.increments, b.increments);
    EXPECT_EQ(c.fbm, d.fbm);
    EXPECT_EQ(c.increments, d.increments);
}

TEST(Volterra, BrownianIsRunningSum)
{
    const auto ps = volterra_fbm({{0.5}, {1}, 1.0}, TimeLattice{1.0, 32}, 20, 4);
    for (std::size_t m = 0; m < 20; ++m) {
        double s = 0.0;
        EXPECT_EQ(ps.path(m, 0)[0], 0.0);
        for (std::size_t i = 0; i < 32; ++i) {
            s += ps.dW(m, 0)[i];
            EXPECT_NEAR(ps.path(m, 0)[i + 1], s, 1e-14);
        }
    }
}

TEST(Volterra, ZeroIncrementsGiveZeroPath)
{
    const auto ps = volterra_from_increments({{0.3, 0.7}, {1, 1}, 1.0}, TimeLattice{1.0, 16}, 3,
                                             std::vector<double>(3 * 2 * 16, 0.0));
    for (double v : ps.fbm)
        EXPECT_EQ(v, 0.0);
}

TEST(Volterra, MatrixRowsMatchKernelVariance)
{
    // h * sum_j Kbar^2 approaches t^{2H}; the gap is the cell-averaging bias.
    for (double H : {0.3, 0.7}) {
        double prev = INFINITY;
        for (std::size_t N : {16u, 64u, 256u}) {
            const TimeLattice lat{1.0, N};
            const auto& L = volterra_matrix(H, lat);
            double v = 0.0;
            for (std::size_t j = 0; j < N; ++j)
                v += L[(N - 1) * N + j] * L[(N - 1) * N + j] * lat.h();
            const double gap = 1.0 - v;
            EXPECT_GT(gap, 0.0);
            EXPECT_LT(gap, 0.1 * std::sqrt(lat.h()));
            EXPECT_LT(gap, prev);
            prev = gap;
        }
    }
}

TEST(Volterra, VarianceCloseToCholeskyTarget)
{
    const std::size_t M = 20000, N = 32;
    const TimeLattice lat{1.0, N};
    const auto ps = volterra_fbm({{0.7}, {1}, 1.0}, lat, M, 21);
    for (std::size_t i = 1; i <= N; ++i) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double x = ps.path(m, 0)[i] * ps.path(m, 0)[i];
            s += x;
            s2 += x * x;
        }
        const double v = s / M, se = std::sqrt((s2 / M - v * v) / M);
        EXPECT_LE(std::abs(v - std::pow(lat.t(i), 1.4)), 5.0 * se + 0.1 * std::sqrt(lat.h()));
    }
}

TEST(Volterra, InverseOperatorRecoversBrownianPath)
{
    for (double H : {0.3, 0.7}) {
        double err[2];
        int q = 0;
        for (std::size_t N : {64u, 256u}) {
            const TimeLattice lat{1.0, N};
            const auto ps = volterra_fbm({{H}, {1}, 1.0}, lat, 10, 3);
            double e = 0.0;
            for (std::size_t m = 0; m < 10; ++m) {
                LatticeFunction F{lat, std::vector<double>(ps.path(m, 0), ps.path(m, 0) + N + 1)};
                const auto g = k_op_inverse(F, H);
                double W = 0.0, I = 0.0;
                for (std::size_t i = 1; i <= N; ++i) {
                    W += ps.dW(m, 0)[i - 1];
                    const double left = std::isfinite(g[i - 1]) ? g[i - 1] : g[i];
                    I += 0.5 * (left + g[i]) * lat.h();
                    e = std::max(e, std::abs(I - W));
                }
            }
            err[q++] = e;
        }
        EXPECT_LT(err[1], 0.7 * err[0]) << "H=" << H;
        EXPECT_LT(err[1], 0.15) << "H=" << H;
    }
}

TEST(Noise, StationaryIncrements)
{
    const std::size_t M = 40000, N = 16;
    const double H = 0.3;
    const TimeLattice lat{1.0, N};
    const auto ps = cholesky_fbm({{H}, {1}, 1.0}, lat, M, 31);
    for (std::size_t lag : {1u, 4u})
        for (std::size_t start : {0u, 5u, 11u}) {
            double s = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                const double d = ps.path(m, 0)[start + lag] - ps.path(m, 0)[start];
                s += d * d;
            }
            const double target = std::pow(lag * lat.h(), 2 * H);
            EXPECT_LE(std::abs(s / M - target), 5.0 * target * std::sqrt(2.0 / M));
        }
}

TEST(WeightedView, SingleSurvivingMode)
{
    const HurstSpectrum spec{{0.3, 0.7}, {1.0, 0.0}, 1.0};
    const auto ps = volterra_fbm({{0.3, 0.7}, {1.0, 1.0}, 1.0}, TimeLattice{1.0, 8}, 5, 2);
    const auto v = weighted_view(ps, spec);
    for (std::size_t m = 0; m < 5; ++m) {
        EXPECT_EQ(v.norm(m, 0), 0.0);
        for (std::size_t i = 0; i <= 8; ++i) {
            EXPECT_DOUBLE_EQ(v.norm(m, i), std::abs(ps.path(m, 0)[i]));
            EXPECT_EQ(v.value(m, 1, i), 0.0);
        }
    }
    EXPECT_THROW(weighted_view(ps, HurstSpectrum{{0.3}, {1.0}, 1.0}), DomainError);
}

TEST(WeightedView, SecondMomentWithinBand)
{
    const HurstSpectrum spec{{0.3, 0.5, 0.7}, {0.5, 0.3, 0.2}, 1.0};
    const auto ps = cholesky_fbm(spec, TimeLattice{1.0, 16}, 50000, 12);
    const auto p = second_moment_profile(weighted_view(ps, spec));
    EXPECT_EQ(p.mean[0], 0.0);
    for (std::size_t i = 1; i <= 16; ++i) {
        EXPECT_LE(std::abs(p.mean[i] - p.exact[i]), 5.0 * p.stderr_[i]);
        EXPECT_LE(p.exact[i], p.bound);
    }
    EXPECT_DOUBLE_EQ(p.exact[16], 0.38);
}

TEST(Noise, SupDiagnosticReported)
{
    const auto ps = cholesky_fbm({{0.3, 0.7}, {1, 1}, 2.0}, TimeLattice{2.0, 16}, 2000, 1);
    const auto d = sup_diagnostic(ps);
    ASSERT_EQ(d.empirical.size(), 2u);
    EXPECT_NEAR(d.reference[0], std::pow(2.0, 0.3) / std::sqrt(0.3), 1e-14);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_GT(d.empirical[k], 0.0);
        EXPECT_TRUE(std::isfinite(d.empirical[k]));
    }
}

TEST(PathIO, RoundTrip)
{
    const auto ps = cholesky_fbm({{0.3, 0.5}, {1, 0.5}, 1.5}, TimeLattice{1.5, 10}, 7, 123);
    const auto file = (std::filesystem::temp_directory_path() / "mkvcyl_paths_test.bin").string();
    write_paths(ps, file);
    const auto back = read_paths(file);
    EXPECT_EQ(back.fbm, ps.fbm);
    EXPECT_EQ(back.increments, ps.increments);
    EXPECT_EQ(back.spectrum.hurst, ps.spectrum.hurst);
    EXPECT_EQ(back.spectrum.weights, ps.spectrum.weights);
    EXPECT_EQ(back.seed, 123u);
    EXPECT_EQ(back.generator, Generator::cholesky);
    EXPECT_EQ(back.lattice, ps.lattice);
    std::FILE* f = std::fopen(file.c_str(), "r+b");
    std::fputc('X', f);
    std::fclose(f);
    EXPECT_THROW(read_paths(file), DomainError);
    std::filesystem::remove(file);
}
