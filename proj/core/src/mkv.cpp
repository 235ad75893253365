#include "mkvcyl/mkv.hpp"

#include <chrono>
#include <cmath>
#include <tuple>

#include "mkvcyl/girsanov.hpp"
#include "mkvcyl/parallel.hpp"

namespace mkvcyl {

namespace {

void check_setup(const DriftSpec& drift, const CylindricalPathSet& paths, const std::vector<double>& x0)
{
    const std::size_t K = paths.modes();
    if (drift.modes() != K || x0.size() != K)
        throw DomainError("mode count mismatch between drift, paths and x0");
}

std::pair<double, double> mean_se(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v)
        s += x;
    const double mean = s / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

EmpiricalFlow mix(const EmpiricalFlow& fresh, const EmpiricalFlow& old, double theta)
{
    EmpiricalFlow out;
    out.lattice = fresh.lattice;
    out.measures.reserve(fresh.measures.size());
    for (std::size_t i = 0; i < fresh.measures.size(); ++i) {
        const auto& a = fresh.measures[i];
        const auto& b = old.measures[i];
        std::vector<double> pts = a.points();
        pts.insert(pts.end(), b.points().begin(), b.points().end());
        std::vector<double> w;
        w.reserve(a.size() + b.size());
        for (double m : a.masses())
            w.push_back(theta * m);
        for (double m : b.masses())
            w.push_back((1.0 - theta) * m);
        double tot = 0.0;
        for (double m : w)
            tot += m;
        for (double& m : w)
            m /= tot;
        out.measures.emplace_back(a.dim(), std::move(pts), std::move(w));
    }
    return out;
}

double iterate_distance(const EmpiricalFlow& a, const EmpiricalFlow& b, const FixedPointOptions& opt)
{
    if (opt.metric_subsample == 0)
        return flow_sup_distance(a, b, opt.metric);
    return flow_sup_distance(subsample(a, opt.metric_subsample, opt.subsample_seed),
                             subsample(b, opt.metric_subsample, opt.subsample_seed), opt.metric);
}

} // namespace

StatePaths solve_frozen(const DriftSpec& drift, const EmpiricalFlow& flow, const CylindricalPathSet& paths,
                        const std::vector<double>& x0)
{
    check_setup(drift, paths, x0);
    if (!(flow.lattice == paths.lattice) || flow.measures.size() != paths.lattice.size())
        throw DomainError("solve_frozen: flow and paths live on different lattices");
    const std::size_t K = paths.modes(), N = paths.steps(), M = paths.particles;
    const double h = paths.lattice.h();
    const auto& lam = paths.spectrum.weights;

    StatePaths st;
    st.lattice = paths.lattice;
    st.particles = M;
    st.modes = K;
    st.x.assign(M * (N + 1) * K, 0.0);
    parallel_for(M, [&](std::size_t m) {
        std::vector<double> acc(K, 0.0);
        double* x = st.at(m, 0);
        for (std::size_t k = 0; k < K; ++k)
            x[k] = x0[k];
        for (std::size_t i = 0; i < N; ++i) {
            const double* xi = st.at(m, i);
            const double t = paths.lattice.t(i);
            for (std::size_t k = 0; k < K; ++k)
                acc[k] += drift(k, t, xi, flow.measures[i]) * h;
            double* xn = st.at(m, i + 1);
            for (std::size_t k = 0; k < K; ++k)
                xn[k] = x0[k] + acc[k] + lam[k] * paths.path(m, k)[i + 1];
        }
    });
    return st;
}

StatePaths simulate_interacting(const DriftSpec& drift, const CylindricalPathSet& paths,
                                const std::vector<double>& x0)
{
    check_setup(drift, paths, x0);
    const std::size_t K = paths.modes(), N = paths.steps(), M = paths.particles;
    const double h = paths.lattice.h();
    const auto& lam = paths.spectrum.weights;

    StatePaths st;
    st.lattice = paths.lattice;
    st.particles = M;
    st.modes = K;
    st.x.assign(M * (N + 1) * K, 0.0);
    std::vector<double> acc(M * K, 0.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k)
            st.at(m, 0)[k] = x0[k];
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> pts(M * K);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < K; ++k)
                pts[m * K + k] = st.at(m, i)[k];
        const auto mu = EmpiricalMeasure::uniform(K, std::move(pts));
        const double t = paths.lattice.t(i);
        parallel_for(M, [&](std::size_t m) {
            const double* xi = st.at(m, i);
            double* xn = st.at(m, i + 1);
            for (std::size_t k = 0; k < K; ++k)
                acc[m * K + k] += drift(k, t, xi, mu) * h;
            for (std::size_t k = 0; k < K; ++k)
                xn[k] = x0[k] + acc[m * K + k] + lam[k] * paths.path(m, k)[i + 1];
        });
    }
    return st;
}

EmpiricalFlow empirical_flow(const StatePaths& st)
{
    EmpiricalFlow f;
    f.lattice = st.lattice;
    f.measures.resize(st.lattice.size());
    const std::size_t K = st.modes, M = st.particles;
    parallel_for(st.lattice.size(), [&](std::size_t i) {
        std::vector<double> pts(M * K);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < K; ++k)
                pts[m * K + k] = st.at(m, i)[k];
        f.measures[i] = EmpiricalMeasure::uniform(K, std::move(pts));
    });
    return f;
}

EmpiricalFlow psi_map(const DriftSpec& drift, const EmpiricalFlow& flow, const CylindricalPathSet& paths,
                      const std::vector<double>& x0)
{
    return empirical_flow(solve_frozen(drift, flow, paths, x0));
}

FixedPointTrace fixed_point(const DriftSpec& drift, const CylindricalPathSet& paths, const std::vector<double>& x0,
                            const FixedPointOptions& opt, const EmpiricalFlow* init)
{
    if (!(opt.tol > 0.0))
        throw DomainError("fixed_point: tol must be positive");
    if (!(opt.damping > 0.0 && opt.damping <= 1.0))
        throw DomainError("fixed_point: damping must lie in (0,1]");
    if (opt.max_iter == 0)
        throw DomainError("fixed_point: max_iter must be positive");
    check_setup(drift, paths, x0);

    const auto t0 = std::chrono::steady_clock::now();
    FixedPointTrace tr;
    const EmpiricalFlow start = init ? *init : EmpiricalFlow::constant(paths.lattice, EmpiricalMeasure::dirac(x0));
    EmpiricalFlow cur = psi_map(drift, start, paths, x0);
    if (opt.keep_iterates)
        tr.iterates.push_back(cur);

    while (tr.distances.size() < opt.max_iter) {
        EmpiricalFlow next = psi_map(drift, cur, paths, x0);
        if (opt.damping < 1.0)
            next = mix(next, cur, opt.damping);
        const double d = iterate_distance(next, cur, opt);
        tr.distances.push_back(d);
        tr.wallclock_ms.push_back(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        cur = std::move(next);
        if (opt.keep_iterates)
            tr.iterates.push_back(cur);
        if (d <= opt.tol) {
            tr.converged = true;
            break;
        }
    }
    if (!opt.keep_iterates)
        tr.iterates.push_back(std::move(cur));
    tr.iterations_used = tr.distances.size();
    return tr;
}

double uniqueness_probe(const DriftSpec& drift, const CylindricalPathSet& paths, const std::vector<double>& x0,
                        const EmpiricalFlow& init_a, const EmpiricalFlow& init_b, const FixedPointOptions& opt)
{
    if (!drift.law_lipschitz())
        throw DomainError("uniqueness_probe: drift is not declared Lipschitz in the law");
    FixedPointOptions o = opt;
    o.keep_iterates = false;
    const auto a = fixed_point(drift, paths, x0, o, &init_a);
    const auto b = fixed_point(drift, paths, x0, o, &init_b);
    if (!a.converged || !b.converged)
        throw SolverError("uniqueness_probe: fixed-point iteration did not converge");
    return iterate_distance(a.iterates.back(), b.iterates.back(), o);
}

EmpiricalFlow dispersed_flow(const TimeLattice& lattice, const std::vector<double>& x0, double shift, double spread,
                             std::size_t count)
{
    if (count == 0)
        throw DomainError("dispersed_flow: count must be positive");
    const std::size_t K = x0.size();
    std::vector<double> pts(count * K);
    for (std::size_t j = 0; j < count; ++j) {
        const double s = count == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(count - 1);
        for (std::size_t k = 0; k < K; ++k)
            pts[j * K + k] = x0[k] + shift + spread * s;
    }
    return EmpiricalFlow::constant(lattice, EmpiricalMeasure::uniform(K, std::move(pts)));
}

ReweightResult reweighted_expectation(const DriftSpec& drift, const EmpiricalFlow& flow,
                                      const CylindricalPathSet& paths, const std::vector<double>& x0,
                                      const TerminalFunctional& f)
{
    check_setup(drift, paths, x0);
    const std::size_t K = paths.modes(), N = paths.steps(), M = paths.particles;
    const auto& lam = paths.spectrum.weights;

    const auto direct = solve_frozen(drift, flow, paths, x0);
    std::vector<double> fd(M);
    for (std::size_t m = 0; m < M; ++m)
        fd[m] = f(direct.at(m, N));

    // Driftless paths x0 + lambda B; Girsanov shift u_k = b_k / lambda_k along them.
    std::vector<double> u(M * K * N, 0.0);
    std::vector<double> fr(M);
    parallel_for(M, [&](std::size_t m) {
        std::vector<double> y(K);
        for (std::size_t i = 0; i <= N; ++i) {
            for (std::size_t k = 0; k < K; ++k)
                y[k] = x0[k] + lam[k] * paths.path(m, k)[i];
            if (i == N)
                break;
            const double t = paths.lattice.t(i);
            for (std::size_t k = 0; k < K; ++k) {
                const double b = drift(k, t, y.data(), flow.measures[i]);
                if (b == 0.0) continue;
                if (lam[k] == 0.0)
                    throw DomainError("reweighting needs lambda_k > 0 on modes with drift");
                u[(m * K + k) * N + i] = b / lam[k];
            }
        }
        fr[m] = f(y.data());
    });
    const auto ex = stochastic_exponential(u, paths);
    for (std::size_t m = 0; m < M; ++m)
        fr[m] *= std::exp(ex[m].log_density);

    ReweightResult r;
    std::tie(r.direct, r.direct_se) = mean_se(fd);
    std::tie(r.reweighted, r.reweighted_se) = mean_se(fr);
    r.stderr_ = std::sqrt(r.direct_se * r.direct_se + r.reweighted_se * r.reweighted_se);
    return r;
}

} // namespace mkvcyl
