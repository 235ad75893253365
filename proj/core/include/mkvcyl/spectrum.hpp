#pragma once

#include <cstddef>
#include <vector>

#include "mkvcyl/errors.hpp"

namespace mkvcyl {

enum class Regime { singular, brownian, regular };

inline Regime regime_of(double H)
{
    if (H < 0.5) return Regime::singular;
    if (H > 0.5) return Regime::regular;
    return Regime::brownian;
}

struct HurstSpectrum {
    std::vector<double> hurst;
    std::vector<double> weights;
    double horizon = 1.0;

    std::size_t modes() const { return hurst.size(); }
};

// Zero-based mode indices.
struct ModePartition {
    std::vector<std::size_t> singular;
    std::vector<std::size_t> brownian;
    std::vector<std::size_t> regular;
};

struct HolderEnvelope {
    double kappa = 0.0;
    double rho = 0.0;
};

struct AdmissibilityReport {
    double l1_lambda = 0.0;
    double l1_lambda_over_sqrtH = 0.0;
    double l1_C_over_sqrt1mH = 0.0;
    double kappa = 0.0;
    double rho = 0.0;
    bool ok = false;
};

ModePartition validate_spectrum(const HurstSpectrum& spec);

// kappa = min H_k, rho = |lambda|_2 * T^(max H - min H).
HolderEnvelope holder_envelope(const HurstSpectrum& spec);

AdmissibilityReport admissibility(const HurstSpectrum& spec,
                                  const std::vector<double>& drift_bounds);

// First K modes of spec.
HurstSpectrum truncate(const HurstSpectrum& spec, std::size_t K);

} // namespace mkvcyl
