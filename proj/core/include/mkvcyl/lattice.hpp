#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mkvcyl/errors.hpp"

namespace mkvcyl {

// Uniform grid t_i = i*T/N, i = 0..N.
struct TimeLattice {
    double horizon = 1.0;
    std::size_t steps = 1;

    TimeLattice() = default;
    TimeLattice(double T, std::size_t N) : horizon(T), steps(N)
    {
        if (!(T > 0.0) || N == 0)
            throw DomainError("lattice needs T > 0 and N >= 1");
    }

    double h() const { return horizon / static_cast<double>(steps); }
    // t_N is returned as T itself so the endpoint carries no rounding.
    double t(std::size_t i) const
    {
        return i == steps ? horizon : static_cast<double>(i) * h();
    }
    std::size_t size() const { return steps + 1; }
    std::vector<double> nodes() const
    {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = t(i);
        return out;
    }

    bool operator==(const TimeLattice& o) const
    {
        return horizon == o.horizon && steps == o.steps;
    }
};

struct LatticeFunction {
    TimeLattice lattice;
    std::vector<double> values;

    LatticeFunction() = default;
    LatticeFunction(TimeLattice lat, std::vector<double> v)
        : lattice(lat), values(std::move(v))
    {
        if (values.size() != lattice.size())
            throw DomainError("lattice function has wrong length");
    }

    template <class F>
    static LatticeFunction sample(const TimeLattice& lat, F&& f)
    {
        std::vector<double> v(lat.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = f(lat.t(i));
        return {lat, std::move(v)};
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

} // namespace mkvcyl
