#include "mkvcyl/fraccalc.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mkvcyl/quadrature.hpp"

namespace mkvcyl {

namespace {

constexpr std::size_t kQuadPoints = 16;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_hurst(double H)
{
    if (!(H > 0.0 && H < 1.0))
        throw DomainError("Hurst parameter outside (0,1)");
}

using Key = std::tuple<int, double, double, std::size_t>;

struct MatrixCache {
    std::mutex mu;
    std::map<Key, std::shared_ptr<const std::vector<double>>> store;
};

MatrixCache& cache()
{
    static MatrixCache c;
    return c;
}

template <class Build>
const std::vector<double>& cached(int tag, double a, double b, std::size_t N, Build build)
{
    auto& c = cache();
    const Key key{tag, a, b, N};
    {
        std::lock_guard lock(c.mu);
        auto it = c.store.find(key);
        if (it != c.store.end())
            return *it->second;
    }
    auto m = std::make_shared<const std::vector<double>>(build());
    std::lock_guard lock(c.mu);
    auto [it, inserted] = c.store.emplace(key, std::move(m));
    return *it->second;
}

// Integral over [lo, lo+1] of g(y) y^beta, y^beta singular only when lo = 0.
template <class G>
double cell_with_left_weight(double lo, double beta, const QuadratureRule& legendre,
                             const QuadratureRule& jac_left, G g)
{
    double acc = 0.0;
    if (lo == 0.0 && beta != 0.0) {
        for (std::size_t q = 0; q < jac_left.nodes.size(); ++q)
            acc += jac_left.weights[q] * g(jac_left.nodes[q]);
    } else {
        for (std::size_t q = 0; q < legendre.nodes.size(); ++q) {
            const double y = lo + legendre.nodes[q];
            acc += legendre.weights[q] * std::pow(y, beta) * g(y);
        }
    }
    return acc;
}

std::vector<double> build_weighted_integral(double alpha, double beta, std::size_t N)
{
    const std::size_t n1 = N + 1;
    std::vector<double> A(n1 * n1, 0.0);
    const double am1 = alpha - 1.0;

    if (beta == 0.0) {
        // (n-y) = u; M0 = int u^(alpha-1), M1 = int u^(alpha-1) (n-j-u).
        for (std::size_t n = 1; n <= N; ++n) {
            for (std::size_t j = 0; j < n; ++j) {
                const double u1 = static_cast<double>(n - j);
                const double u0 = u1 - 1.0;
                const double m0 = (std::pow(u1, alpha) - std::pow(u0, alpha)) / alpha;
                const double m1 = u1 * m0 - (std::pow(u1, alpha + 1.0) - std::pow(u0, alpha + 1.0)) / (alpha + 1.0);
                A[n * n1 + j] += m0 - m1;
                A[n * n1 + j + 1] += m1;
            }
        }
        return A;
    }

    const auto legendre = gauss_legendre01(kQuadPoints);
    const auto jac_left = gauss_jacobi01(kQuadPoints, 0.0, beta);     // y^beta on [0,1]
    const auto jac_right = gauss_jacobi01(kQuadPoints, am1, 0.0);     // (1-z)^(alpha-1)
    const auto jac_both = gauss_jacobi01(kQuadPoints, am1, beta);     // n = 1, j = 0

    for (std::size_t n = 1; n <= N; ++n) {
        const double x = static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = static_cast<double>(j);
            double m0 = 0.0, m1 = 0.0;
            if (n == 1) {
                for (std::size_t q = 0; q < kQuadPoints; ++q) {
                    m0 += jac_both.weights[q];
                    m1 += jac_both.weights[q] * jac_both.nodes[q];
                }
            } else if (j == n - 1) {
                for (std::size_t q = 0; q < kQuadPoints; ++q) {
                    const double z = jac_right.nodes[q];
                    const double w = jac_right.weights[q] * std::pow(lo + z, beta);
                    m0 += w;
                    m1 += w * z;
                }
            } else {
                auto g0 = [&](double y) { return std::pow(x - y, am1); };
                auto g1 = [&](double y) { return std::pow(x - y, am1) * (y - lo); };
                m0 = cell_with_left_weight(lo, beta, legendre, jac_left, g0);
                m1 = cell_with_left_weight(lo, beta, legendre, jac_left, g1);
            }
            A[n * n1 + j] += m0 - m1;
            A[n * n1 + j + 1] += m1;
        }
    }
    return A;
}

std::vector<double> build_marchaud(double alpha, double beta, std::size_t N)
{
    const std::size_t n1 = N + 1;
    std::vector<double> A(n1 * n1, 0.0);

    // int_0^1 (1 - v^beta)(1-v)^(-alpha-1) dv, by analytic continuation.
    double J = 0.0;
    if (beta != 0.0)
        J = -1.0 / alpha - std::tgamma(beta + 1.0) * std::tgamma(-alpha) / std::tgamma(beta + 1.0 - alpha);

    const auto legendre = gauss_legendre01(kQuadPoints);
    QuadratureRule jac_left, jac_right, jac_both;
    if (beta != 0.0) {
        jac_left = gauss_jacobi01(kQuadPoints, 0.0, beta);
        jac_right = gauss_jacobi01(kQuadPoints, -alpha, 0.0);
        jac_both = gauss_jacobi01(kQuadPoints, -alpha, beta);
    }

    for (std::size_t n = 1; n <= N; ++n) {
        const double x = static_cast<double>(n);
        double* row = &A[n * n1];
        row[n] += std::pow(x, beta - alpha) * (1.0 + alpha * J);
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = static_cast<double>(j);
            const double u1 = x - lo;
            const double u0 = u1 - 1.0;
            double P = 0.0, Q = 0.0;
            if (beta == 0.0) {
                Q = (std::pow(u1, 1.0 - alpha) - std::pow(u0, 1.0 - alpha)) / (1.0 - alpha);
                if (j + 1 < n)
                    P = (std::pow(u0, -alpha) - std::pow(u1, -alpha)) / alpha;
            } else if (j + 1 == n) {
                // Last cell: the P term is multiplied by zero.
                const auto& r = (n == 1) ? jac_both : jac_right;
                for (std::size_t q = 0; q < kQuadPoints; ++q)
                    Q += r.weights[q] * (n == 1 ? 1.0 : std::pow(lo + r.nodes[q], beta));
            } else {
                P = cell_with_left_weight(lo, beta, legendre, jac_left,
                                          [&](double y) { return std::pow(x - y, -alpha - 1.0); });
                Q = cell_with_left_weight(lo, beta, legendre, jac_left,
                                          [&](double y) { return std::pow(x - y, -alpha); });
            }
            // A_j P_j + (phi_{j+1} - phi_j) Q_j, A_j = phi_n + (n-j-1) phi_j - (n-j) phi_{j+1}.
            if (j + 1 < n) {
                row[n] += alpha * P;
                row[j] += alpha * ((u1 - 1.0) * P - Q);
                row[j + 1] += alpha * (Q - u1 * P);
            } else {
                row[j] -= alpha * Q;
                row[j + 1] += alpha * Q;
            }
        }
    }
    return A;
}

// Weighted integral in physical units: (1/Gamma(alpha)) int_0^t (t-y)^(alpha-1) y^beta phi(y) dy.
std::vector<double> weighted_integral(const LatticeFunction& phi, double alpha, double beta)
{
    const auto& A = detail::weighted_integral_matrix(alpha, beta, phi.lattice.steps);
    auto out = detail::apply_lower(A, phi.values);
    const double scale = std::pow(phi.lattice.h(), alpha + beta) / std::tgamma(alpha);
    for (double& v : out)
        v *= scale;
    return out;
}

std::vector<double> marchaud(const LatticeFunction& phi, double alpha, double beta)
{
    const auto& A = detail::marchaud_matrix(alpha, beta, phi.lattice.steps);
    auto out = detail::apply_lower(A, phi.values);
    const double scale = std::pow(phi.lattice.h(), beta - alpha) / std::tgamma(1.0 - alpha);
    for (double& v : out)
        v *= scale;
    return out;
}

} // namespace

namespace detail {

const std::vector<double>& weighted_integral_matrix(double alpha, double beta, std::size_t N)
{
    return cached(0, alpha, beta, N, [&] { return build_weighted_integral(alpha, beta, N); });
}

const std::vector<double>& marchaud_matrix(double alpha, double beta, std::size_t N)
{
    return cached(1, alpha, beta, N, [&] { return build_marchaud(alpha, beta, N); });
}

std::vector<double> apply_lower(const std::vector<double>& A, const std::vector<double>& x)
{
    const std::size_t n1 = x.size();
    std::vector<double> y(n1, 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        const double* row = &A[i * n1];
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j)
            acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

std::vector<double> finite_difference(const LatticeFunction& F)
{
    const std::size_t N = F.lattice.steps;
    const double h = F.lattice.h();
    std::vector<double> d(N + 1);
    d[0] = (F[1] - F[0]) / h;
    d[N] = (F[N] - F[N - 1]) / h;
    for (std::size_t i = 1; i < N; ++i)
        d[i] = (F[i + 1] - F[i - 1]) / (2.0 * h);
    return d;
}

} // namespace detail

double kernel_bH(double H)
{
    return std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * boost::math::beta(1.0 - 2.0 * H, H + 0.5)));
}

double kernel_cH(double H)
{
    return std::sqrt(H * (2.0 * H - 1.0) / boost::math::beta(2.0 - 2.0 * H, H - 0.5));
}

double kernel_scale(double H)
{
    check_hurst(H);
    if (H < 0.5) return kernel_bH(H) * std::tgamma(H + 0.5);
    if (H > 0.5) return kernel_cH(H) * std::tgamma(H - 0.5);
    return 1.0;
}

double unit_response(double H)
{
    const double d = kernel_scale(H);
    if (H < 0.5) return d * std::tgamma(H + 0.5) * std::tgamma(1.5 - H) / std::tgamma(H + 1.5);
    if (H > 0.5) return d * std::tgamma(1.5 - H) / (H + 0.5);
    return 1.0;
}

double fbm_kernel(double H, double t, double s, double tms)
{
    check_hurst(H);
    if (!(s > 0.0) || !(tms > 0.0))
        return 0.0;
    const double y = s / t;
    if (H == 0.5)
        return 1.0;
    if (H < 0.5) {
        const double a = H + 0.5, b = 1.0 - 2.0 * H;
        // B(1 - s/t; a, b) = B(a,b) * I_{s/t}^c(b, a).
        const double inc = boost::math::beta(a, b) * boost::math::ibetac(b, a, y);
        return kernel_bH(H)
            * (std::pow(t / s, H - 0.5) * std::pow(tms, H - 0.5) + (0.5 - H) * std::pow(s, H - 0.5) * inc);
    }
    const double a = H - 0.5, b = 1.0 - 2.0 * H;
    // b < 0: B(x; a, b) = [(a+b) B(x; a, b+1) - x^a (1-x)^b] / b.
    const double inc1 = boost::math::beta(a, b + 1.0) * boost::math::ibetac(b + 1.0, a, y);
    const double inc = ((a + b) * inc1 - std::pow(tms / t, a) * std::pow(y, b)) / b;
    return kernel_cH(H) * std::pow(s, H - 0.5) * inc;
}

LatticeFunction frac_integral(const LatticeFunction& f, double alpha)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw DomainError("frac_integral: alpha must be positive");
    return {f.lattice, weighted_integral(f, alpha, 0.0)};
}

LatticeFunction frac_derivative(const LatticeFunction& g, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("frac_derivative: alpha must lie in (0,1)");
    const auto& lat = g.lattice;
    const std::size_t N = lat.steps;
    const double g0 = g[0];
    const double c = (g[1] - g0) / std::pow(lat.t(1), alpha);

    LatticeFunction r = g;
    for (std::size_t i = 0; i <= N; ++i)
        r[i] = g[i] - g0 - c * std::pow(lat.t(i), alpha);
    r[0] = 0.0;
    r[1] = 0.0;

    auto d = marchaud(r, alpha, 0.0);
    const double lead = c * std::tgamma(1.0 + alpha);
    const double ig = 1.0 / std::tgamma(1.0 - alpha);
    for (std::size_t i = 1; i <= N; ++i)
        d[i] += g0 * std::pow(lat.t(i), -alpha) * ig + lead;
    d[0] = (g0 != 0.0) ? kNaN : lead;
    return {lat, std::move(d)};
}

LatticeFunction k_op(const LatticeFunction& f, double H)
{
    check_hurst(H);
    const auto& lat = f.lattice;
    if (H == 0.5)
        return {lat, weighted_integral(f, 1.0, 0.0)};

    // Constant part analytically, remainder (zero at the origin) by composition.
    const double f0 = f[0];
    LatticeFunction r = f;
    for (double& v : r.values)
        v -= f0;
    r[0] = 0.0;

    std::vector<double> out;
    if (H < 0.5) {
        LatticeFunction inner{lat, weighted_integral(r, 0.5 - H, H - 0.5)};
        out = weighted_integral(inner, 2.0 * H, 0.5 - H);
    } else {
        LatticeFunction inner{lat, weighted_integral(r, H - 0.5, 0.5 - H)};
        out = weighted_integral(inner, 1.0, H - 0.5);
    }
    const double d = kernel_scale(H);
    const double k1 = unit_response(H);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = d * out[i] + f0 * k1 * std::pow(lat.t(i), H + 0.5);
    return {lat, std::move(out)};
}

LatticeFunction inverse_from_derivative(const LatticeFunction& u, double H)
{
    check_hurst(H);
    if (H == 0.5)
        return u;
    const auto& lat = u.lattice;
    const double d = kernel_scale(H);
    std::vector<double> out;
    if (H < 0.5) {
        out = weighted_integral(u, 0.5 - H, 0.5 - H);
        for (std::size_t i = 1; i < out.size(); ++i)
            out[i] *= std::pow(lat.t(i), H - 0.5) / d;
        out[0] = 0.0;
    } else {
        out = marchaud(u, H - 0.5, 0.5 - H);
        for (std::size_t i = 1; i < out.size(); ++i)
            out[i] *= std::pow(lat.t(i), H - 0.5) / d;
        out[0] = (u[0] != 0.0) ? kNaN : 0.0;
    }
    return {lat, std::move(out)};
}

LatticeFunction k_op_inverse(const LatticeFunction& F, double H)
{
    check_hurst(H);
    if (std::abs(F[0]) > 1e-12)
        throw DomainError("k_op_inverse: F(0) must vanish");
    const auto& lat = F.lattice;
    if (H == 0.5)
        return {lat, detail::finite_difference(F)};

    // Leading c * s^(H+1/2) through node 1 is inverted exactly (K_H 1 is a power).
    const double p = H + 0.5;
    const double c = F[1] / std::pow(lat.t(1), p);
    LatticeFunction R = F;
    for (std::size_t i = 0; i <= lat.steps; ++i)
        R[i] = F[i] - c * std::pow(lat.t(i), p);
    R[0] = 0.0;
    R[1] = 0.0;

    LatticeFunction u{lat, detail::finite_difference(R)};
    auto out = inverse_from_derivative(u, H);
    const double lead = c / unit_response(H);
    for (double& v : out.values)
        v += lead;
    return out;
}

} // namespace mkvcyl
