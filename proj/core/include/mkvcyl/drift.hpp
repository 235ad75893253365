#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mkvcyl/lattice.hpp"
#include "mkvcyl/measure.hpp"
#include "mkvcyl/spectrum.hpp"

namespace mkvcyl {

// Hölder/Lipschitz exponents for a regular mode.
struct DriftModuli {
    double gamma = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
};

// Componentwise drift b_k(t, x, mu) with declared bounds |b_k| <= C_k lambda_k.
// Values outside the bound are clamped and counted.
class DriftSpec {
public:
    using Evaluator = std::function<double(std::size_t k, double t, const double* x, const EmpiricalMeasure& mu)>;

    DriftSpec(std::string name, Evaluator eval, std::vector<double> C, std::vector<double> lambda,
              bool law_lipschitz);

    double operator()(std::size_t k, double t, const double* x, const EmpiricalMeasure& mu) const;

    // Checks gamma > H - 1/2, 2 >= kappa*alpha > 2H - 1, kappa*beta > H - 1/2
    // on regular modes; DomainError otherwise. Entries for other modes are ignored.
    void set_moduli(std::vector<std::optional<DriftModuli>> moduli, const HurstSpectrum& spec);

    const std::string& name() const { return name_; }
    std::size_t modes() const { return C_.size(); }
    const std::vector<double>& bounds() const { return C_; }
    const std::vector<double>& lambda() const { return lambda_; }
    const std::vector<std::optional<DriftModuli>>& moduli() const { return moduli_; }
    bool law_lipschitz() const { return law_lipschitz_; }

    std::size_t clamp_count() const { return clamps_->load(); }
    void reset_clamps() const { clamps_->store(0); }

private:
    std::string name_;
    Evaluator eval_;
    std::vector<double> C_;
    std::vector<double> lambda_;
    std::vector<std::optional<DriftModuli>> moduli_;
    bool law_lipschitz_ = false;
    std::shared_ptr<std::atomic<std::size_t>> clamps_;
};

DriftSpec zero_drift(const std::vector<double>& C, const std::vector<double>& lambda);

// b_k = c_k.
DriftSpec constant_drift(std::vector<double> c, const std::vector<double>& C,
                         const std::vector<double>& lambda);

// b_k = -rate (x_k - m_k(mu)), saturated at +-C_k lambda_k; m = mean of mu.
DriftSpec mean_field_ou(double rate, const std::vector<double>& C, const std::vector<double>& lambda);

// b_k = C_k lambda_k tanh(gain (m_k(mu) - x_k)).
DriftSpec tanh_mode(double gain, const std::vector<double>& C, const std::vector<double>& lambda);

// Gridded drift: per mode, values on an (x_k, m_k) grid, bilinear inside and
// held constant outside. values is [rows][K][nx][nm]; rows is 1 (used at all
// times) or N+1 (row i used on [t_i, t_{i+1})).
struct DriftTable {
    std::vector<double> x_grid;
    std::vector<double> m_grid;
    std::size_t rows = 1;
    std::vector<double> values;
};

DriftSpec custom_table(DriftTable table, const TimeLattice& lattice, const std::vector<double>& C,
                       const std::vector<double>& lambda);

} // namespace mkvcyl
