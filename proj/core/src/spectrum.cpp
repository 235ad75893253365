#include "mkvcyl/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mkvcyl {

ModePartition validate_spectrum(const HurstSpectrum& spec)
{
    if (spec.modes() == 0)
        throw DomainError("spectrum has no modes");
    if (spec.weights.size() != spec.modes())
        throw DomainError("hurst and weights differ in length");
    if (!(spec.horizon >= 1.0))
        throw DomainError("horizon must satisfy T >= 1");

    ModePartition part;
    bool any_weight = false;
    for (std::size_t k = 0; k < spec.modes(); ++k) {
        const double H = spec.hurst[k];
        if (!(H > 0.0 && H < 1.0))
            throw DomainError("H_" + std::to_string(k + 1) + " outside (0,1)");
        const double l = spec.weights[k];
        if (!(l >= 0.0) || !std::isfinite(l))
            throw DomainError("lambda_" + std::to_string(k + 1) + " negative or not finite");
        any_weight = any_weight || l > 0.0;
        switch (regime_of(H)) {
        case Regime::singular: part.singular.push_back(k); break;
        case Regime::brownian: part.brownian.push_back(k); break;
        case Regime::regular: part.regular.push_back(k); break;
        }
    }
    if (!any_weight)
        throw DomainError("all weights are zero");
    return part;
}

HolderEnvelope holder_envelope(const HurstSpectrum& spec)
{
    if (spec.modes() == 0)
        throw DomainError("spectrum has no modes");
    auto [lo, hi] = std::minmax_element(spec.hurst.begin(), spec.hurst.end());
    double norm2 = 0.0;
    for (double l : spec.weights)
        norm2 += l * l;
    return {*lo, std::sqrt(norm2) * std::pow(spec.horizon, *hi - *lo)};
}

AdmissibilityReport admissibility(const HurstSpectrum& spec,
                                  const std::vector<double>& drift_bounds)
{
    if (drift_bounds.size() != spec.modes())
        throw DomainError("drift bounds length does not match mode count");
    AdmissibilityReport r;
    for (std::size_t k = 0; k < spec.modes(); ++k) {
        const double H = spec.hurst[k];
        const double C = drift_bounds[k];
        if (!(C >= 0.0))
            throw DomainError("drift bound C_" + std::to_string(k + 1) + " negative");
        r.l1_lambda += spec.weights[k];
        if (H < 0.5)
            r.l1_lambda_over_sqrtH += spec.weights[k] / std::sqrt(H);
        r.l1_C_over_sqrt1mH += C / std::sqrt(1.0 - H);
    }
    auto env = holder_envelope(spec);
    r.kappa = env.kappa;
    r.rho = env.rho;
    r.ok = std::isfinite(r.l1_lambda) && std::isfinite(r.l1_lambda_over_sqrtH)
        && std::isfinite(r.l1_C_over_sqrt1mH) && r.kappa > 0.0 && r.kappa < 1.0;
    return r;
}

HurstSpectrum truncate(const HurstSpectrum& spec, std::size_t K)
{
    if (K == 0 || K > spec.modes())
        throw DomainError("truncation level out of range");
    HurstSpectrum out;
    out.hurst.assign(spec.hurst.begin(), spec.hurst.begin() + K);
    out.weights.assign(spec.weights.begin(), spec.weights.begin() + K);
    out.horizon = spec.horizon;
    return out;
}

} // namespace mkvcyl
