#include "mkvcyl/drift.hpp"

#include <algorithm>
#include <cmath>

namespace mkvcyl {

DriftSpec::DriftSpec(std::string name, Evaluator eval, std::vector<double> C, std::vector<double> lambda,
                     bool law_lipschitz)
    : name_(std::move(name)), eval_(std::move(eval)), C_(std::move(C)), lambda_(std::move(lambda)),
      moduli_(C_.size()), law_lipschitz_(law_lipschitz),
      clamps_(std::make_shared<std::atomic<std::size_t>>(0))
{
    if (C_.size() != lambda_.size())
        throw DomainError("drift: bounds and weights differ in length");
    for (double c : C_)
        if (!(c >= 0.0) || !std::isfinite(c))
            throw DomainError("drift: bounds must be finite and nonnegative");
}

double DriftSpec::operator()(std::size_t k, double t, const double* x, const EmpiricalMeasure& mu) const
{
    const double v = eval_(k, t, x, mu);
    const double cap = C_[k] * lambda_[k];
    if (v > cap || v < -cap || std::isnan(v)) {
        clamps_->fetch_add(1, std::memory_order_relaxed);
        if (std::isnan(v))
            return 0.0;
        return v > cap ? cap : -cap;
    }
    return v;
}

void DriftSpec::set_moduli(std::vector<std::optional<DriftModuli>> moduli, const HurstSpectrum& spec)
{
    if (moduli.size() != C_.size() || spec.modes() != C_.size())
        throw DomainError("drift moduli: length mismatch");
    const double kappa = holder_envelope(spec).kappa;
    for (std::size_t k = 0; k < moduli.size(); ++k) {
        const double H = spec.hurst[k];
        if (!moduli[k] || !(H > 0.5))
            continue;
        const auto& m = *moduli[k];
        const std::string tag = "drift moduli for mode " + std::to_string(k + 1) + ": ";
        if (!(m.gamma > H - 0.5))
            throw DomainError(tag + "gamma must exceed H - 1/2");
        if (!(kappa * m.alpha > 2.0 * H - 1.0) || !(m.alpha <= 2.0))
            throw DomainError(tag + "need 2H - 1 < kappa*alpha and alpha <= 2");
        if (!(kappa * m.beta > H - 0.5))
            throw DomainError(tag + "kappa*beta must exceed H - 1/2");
    }
    moduli_ = std::move(moduli);
}

DriftSpec zero_drift(const std::vector<double>& C, const std::vector<double>& lambda)
{
    return DriftSpec("zero", [](std::size_t, double, const double*, const EmpiricalMeasure&) { return 0.0; }, C,
                     lambda, true);
}

DriftSpec constant_drift(std::vector<double> c, const std::vector<double>& C, const std::vector<double>& lambda)
{
    if (c.size() != C.size())
        throw DomainError("constant drift: value count mismatch");
    return DriftSpec(
        "constant", [c = std::move(c)](std::size_t k, double, const double*, const EmpiricalMeasure&) { return c[k]; },
        C, lambda, true);
}

DriftSpec mean_field_ou(double rate, const std::vector<double>& C, const std::vector<double>& lambda)
{
    std::vector<double> cap(C.size());
    for (std::size_t k = 0; k < C.size(); ++k)
        cap[k] = C[k] * lambda[k];
    // Saturation is part of the family, so it never counts as a clamp.
    return DriftSpec(
        "mean_field_ou",
        [rate, cap](std::size_t k, double, const double* x, const EmpiricalMeasure& mu) {
            return std::clamp(-rate * (x[k] - mu.mean()[k]), -cap[k], cap[k]);
        },
        C, lambda, true);
}

DriftSpec tanh_mode(double gain, const std::vector<double>& C, const std::vector<double>& lambda)
{
    std::vector<double> cap(C.size());
    for (std::size_t k = 0; k < C.size(); ++k)
        cap[k] = C[k] * lambda[k];
    return DriftSpec(
        "tanh_mode",
        [gain, cap](std::size_t k, double, const double* x, const EmpiricalMeasure& mu) {
            return cap[k] * std::tanh(gain * (mu.mean()[k] - x[k]));
        },
        C, lambda, true);
}

namespace {

// Index i with g[i] <= v < g[i+1] and the weight of g[i+1]; held at the ends.
std::pair<std::size_t, double> locate(const std::vector<double>& g, double v)
{
    if (g.size() == 1 || v <= g.front())
        return {0, 0.0};
    if (v >= g.back())
        return {g.size() - 2, 1.0};
    const auto it = std::upper_bound(g.begin(), g.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
    return {i, (v - g[i]) / (g[i + 1] - g[i])};
}

} // namespace

DriftSpec custom_table(DriftTable table, const TimeLattice& lattice, const std::vector<double>& C,
                       const std::vector<double>& lambda)
{
    const std::size_t K = C.size();
    const std::size_t nx = table.x_grid.size(), nm = table.m_grid.size();
    if (nx == 0 || nm == 0)
        throw DomainError("custom_table: empty grid");
    if (!std::is_sorted(table.x_grid.begin(), table.x_grid.end())
        || std::adjacent_find(table.x_grid.begin(), table.x_grid.end()) != table.x_grid.end()
        || !std::is_sorted(table.m_grid.begin(), table.m_grid.end())
        || std::adjacent_find(table.m_grid.begin(), table.m_grid.end()) != table.m_grid.end())
        throw DomainError("custom_table: grids must be strictly increasing");
    if (table.rows != 1 && table.rows != lattice.size())
        throw DomainError("custom_table: rows must be 1 or N+1");
    if (table.values.size() != table.rows * K * nx * nm)
        throw DomainError("custom_table: value array has wrong size");

    auto tab = std::make_shared<const DriftTable>(std::move(table));
    const double h = lattice.h();
    const std::size_t N = lattice.steps;
    return DriftSpec(
        "custom_table",
        [tab, h, N, K, nx, nm](std::size_t k, double t, const double* x, const EmpiricalMeasure& mu) {
            std::size_t row = 0;
            if (tab->rows > 1)
                row = std::min(N, static_cast<std::size_t>(std::floor(t / h + 1e-9)));
            const auto [ix, wx] = locate(tab->x_grid, x[k]);
            const auto [im, wm] = locate(tab->m_grid, mu.mean()[k]);
            const double* v = &tab->values[((row * K + k) * nx) * nm];
            auto at = [&](std::size_t i, std::size_t j) {
                return v[std::min(i, nx - 1) * nm + std::min(j, nm - 1)];
            };
            return (1 - wx) * (1 - wm) * at(ix, im) + wx * (1 - wm) * at(ix + 1, im)
                + (1 - wx) * wm * at(ix, im + 1) + wx * wm * at(ix + 1, im + 1);
        },
        C, lambda, true);
}

} // namespace mkvcyl
