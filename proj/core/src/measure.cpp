#include "mkvcyl/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mkvcyl/errors.hpp"
#include "mkvcyl/lp.hpp"
#include "mkvcyl/parallel.hpp"
#include "mkvcyl/rng.hpp"
#include "mkvcyl/transport.hpp"

namespace mkvcyl {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> points, std::vector<double> masses)
    : dim_(dim), points_(std::move(points)), masses_(std::move(masses))
{
    if (dim_ == 0)
        throw DomainError("measure dimension must be positive");
    if (masses_.empty() || points_.size() != masses_.size() * dim_)
        throw DomainError("measure support and masses disagree");
    // Neumaier summation: 1/M masses must pass for large M
    double tot = 0.0, comp = 0.0;
    for (double m : masses_) {
        if (!(m >= 0.0))
            throw DomainError("negative mass");
        const double t = tot + m;
        comp += std::abs(tot) >= m ? (tot - t) + m : (m - t) + tot;
        tot = t;
    }
    tot += comp;
    if (std::abs(tot - 1.0) > 1e-12)
        throw DomainError("masses do not sum to one");
    for (double x : points_)
        if (!std::isfinite(x))
            throw DomainError("support point not finite");
    mean_.assign(dim_, 0.0);
    for (std::size_t i = 0; i < masses_.size(); ++i)
        for (std::size_t k = 0; k < dim_; ++k)
            mean_[k] += masses_[i] * points_[i * dim_ + k];
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t dim, std::vector<double> points)
{
    if (dim == 0 || points.empty() || points.size() % dim != 0)
        throw DomainError("uniform measure: bad point array");
    const std::size_t n = points.size() / dim;
    // Masses 1/n may miss 1 by a few ulps for large n; that stays within 1e-12.
    return EmpiricalMeasure(dim, std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::vector<double> x)
{
    const std::size_t d = x.size();
    return EmpiricalMeasure(d, std::move(x), {1.0});
}

EmpiricalFlow EmpiricalFlow::constant(const TimeLattice& lattice, const EmpiricalMeasure& m)
{
    EmpiricalFlow f;
    f.lattice = lattice;
    f.measures.assign(lattice.size(), m);
    return f;
}

namespace {

struct SignedSupport {
    std::size_t dim = 0;
    std::vector<double> points;  // merged distinct points
    std::vector<double> w;       // mu - nu on them
};

SignedSupport merge(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu)
{
    if (mu.dim() != nu.dim())
        throw DomainError("measures live in different dimensions");
    const std::size_t d = mu.dim();
    const std::size_t n = mu.size() + nu.size();
    auto pt = [&](std::size_t i) { return i < mu.size() ? mu.point(i) : nu.point(i - mu.size()); };
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(pt(a), pt(a) + d, pt(b), pt(b) + d);
    });
    SignedSupport s;
    s.dim = d;
    for (std::size_t q = 0; q < n; ++q) {
        const std::size_t i = idx[q];
        const double m = i < mu.size() ? mu.mass(i) : -nu.mass(i - mu.size());
        const double* p = pt(i);
        if (!s.w.empty() && std::equal(p, p + d, s.points.end() - static_cast<std::ptrdiff_t>(d))) {
            s.w.back() += m;
        } else {
            s.points.insert(s.points.end(), p, p + d);
            s.w.push_back(m);
        }
    }
    return s;
}

double euclid(const double* a, const double* b, std::size_t d)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        acc += t * t;
    }
    return std::sqrt(acc);
}

struct Bipartite {
    std::vector<double> supply, demand, dist;  // dist is S x D
    double mass = 0.0;
};

Bipartite split(const SignedSupport& s)
{
    Bipartite g;
    std::vector<std::size_t> src, snk;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        if (s.w[i] > 0.0) {
            src.push_back(i);
            g.supply.push_back(s.w[i]);
            g.mass += s.w[i];
        } else if (s.w[i] < 0.0) {
            snk.push_back(i);
            g.demand.push_back(-s.w[i]);
        }
    }
    g.dist.resize(src.size() * snk.size());
    for (std::size_t a = 0; a < src.size(); ++a)
        for (std::size_t b = 0; b < snk.size(); ++b)
            g.dist[a * snk.size() + b] = euclid(&s.points[src[a] * s.dim], &s.points[snk[b] * s.dim], s.dim);
    return g;
}

void check_cap(const SignedSupport& s, const MetricOptions& opt)
{
    if (s.w.size() > opt.cap)
        throw CapacityError("merged support of " + std::to_string(s.w.size()) + " points exceeds cap "
                            + std::to_string(opt.cap));
}

} // namespace

double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const MetricOptions& opt)
{
    const auto s = merge(mu, nu);
    check_cap(s, opt);
    auto g = split(s);
    if (g.supply.empty() || g.demand.empty())
        return 0.0;
    TransportSolver ts(g.supply, g.demand);
    return ts.solve(g.dist);
}

// The LP optimum at a fixed split a = theta, L = 1 - theta is the optimal
// transport cost for c_theta = min((1-theta) d, 2 theta), and theta -> W(c_theta)
// is concave and piecewise linear. Each evaluation gives an upper line
// (1-theta) A + theta B from the optimal plan; the lower envelope of these
// lines is maximised until it meets the evaluated value.
double bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const MetricOptions& opt)
{
    const auto s = merge(mu, nu);
    check_cap(s, opt);
    auto g = split(s);
    if (g.supply.empty() || g.demand.empty())
        return 0.0;

    TransportSolver ts(g.supply, g.demand);
    const double w1 = ts.solve(g.dist);

    struct Line {
        double A, B;
        double at(double th) const { return (1.0 - th) * A + th * B; }
    };
    std::vector<Line> lines{{0.0, 2.0 * g.mass}, {w1, 0.0}};
    double lower = 0.0;
    std::vector<double> cost(g.dist.size());

    for (int iter = 0; iter < 500; ++iter) {
        auto envelope = [&](double th) {
            double v = INFINITY;
            for (const auto& l : lines)
                v = std::min(v, l.at(th));
            return v;
        };
        std::vector<double> cand{0.0, 1.0};
        for (std::size_t i = 0; i < lines.size(); ++i)
            for (std::size_t j = i + 1; j < lines.size(); ++j) {
                // (1-t)Ai + t Bi = (1-t)Aj + t Bj
                const double den = (lines[i].B - lines[i].A) - (lines[j].B - lines[j].A);
                if (den == 0.0) continue;
                const double th = (lines[j].A - lines[i].A) / den;
                if (th > 0.0 && th < 1.0) cand.push_back(th);
            }
        double th_best = 0.0, upper = -INFINITY;
        for (double th : cand) {
            const double v = envelope(th);
            if (v > upper) {
                upper = v;
                th_best = th;
            }
        }
        if (upper - lower <= 1e-13 * std::max(1.0, upper))
            return lower;

        const double th = th_best;
        for (std::size_t a = 0; a < cost.size(); ++a)
            cost[a] = std::min((1.0 - th) * g.dist[a], 2.0 * th);
        const double val = ts.solve(cost);
        lower = std::max(lower, val);
        if (upper - val <= 1e-13 * std::max(1.0, upper))
            return lower;

        const auto f = ts.flow();
        Line l{0.0, 0.0};
        for (std::size_t a = 0; a < cost.size(); ++a) {
            if (f[a] == 0.0) continue;
            if ((1.0 - th) * g.dist[a] <= 2.0 * th)
                l.A += f[a] * g.dist[a];
            else
                l.B += 2.0 * f[a];
        }
        lines.push_back(l);
    }
    throw SolverError("bl_distance: cutting planes did not close the gap");
}

double bl_distance_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu)
{
    const auto s = merge(mu, nu);
    const std::size_t n = s.w.size();
    bool nonzero = false;
    for (double w : s.w)
        nonzero = nonzero || w != 0.0;
    if (!nonzero)
        return 0.0;

    // x = (p_0..p_{n-1}, q_0..q_{n-1}, a, L), f_i = p_i - q_i.
    const std::size_t nv = 2 * n + 2, ia = 2 * n, iL = 2 * n + 1;
    LinearProgram lp;
    lp.c.assign(nv, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        lp.c[i] = s.w[i];
        lp.c[n + i] = -s.w[i];
    }
    auto row = [&] { return std::vector<double>(nv, 0.0); };
    for (std::size_t i = 0; i < n; ++i) {
        auto r1 = row();
        r1[i] = 1.0;
        r1[n + i] = -1.0;
        r1[ia] = -1.0;
        lp.A.push_back(std::move(r1));
        lp.b.push_back(0.0);
        auto r2 = row();
        r2[i] = -1.0;
        r2[n + i] = 1.0;
        r2[ia] = -1.0;
        lp.A.push_back(std::move(r2));
        lp.b.push_back(0.0);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            auto r = row();
            r[i] += 1.0;
            r[n + i] -= 1.0;
            r[j] -= 1.0;
            r[n + j] += 1.0;
            r[iL] = -euclid(&s.points[i * s.dim], &s.points[j * s.dim], s.dim);
            lp.A.push_back(std::move(r));
            lp.b.push_back(0.0);
        }
    auto last = row();
    last[ia] = 1.0;
    last[iL] = 1.0;
    lp.A.push_back(std::move(last));
    lp.b.push_back(1.0);
    return solve_lp(lp).value;
}

std::vector<double> flow_distances(const EmpiricalFlow& mu, const EmpiricalFlow& nu, const MetricOptions& opt)
{
    if (!(mu.lattice == nu.lattice) || mu.measures.size() != nu.measures.size())
        throw DomainError("flows live on different lattices");
    std::vector<double> d(mu.measures.size(), 0.0);
    parallel_for(d.size(), [&](std::size_t i) { d[i] = bl_distance(mu.measures[i], nu.measures[i], opt); });
    return d;
}

double flow_sup_distance(const EmpiricalFlow& mu, const EmpiricalFlow& nu, const MetricOptions& opt)
{
    const auto d = flow_distances(mu, nu, opt);
    return *std::max_element(d.begin(), d.end());
}

double holder_modulus(const EmpiricalFlow& flow, double kappa, const MetricOptions& opt)
{
    if (!(kappa > 0.0 && kappa <= 1.0))
        throw DomainError("holder_modulus: kappa must lie in (0,1]");
    const std::size_t n = flow.measures.size();
    if (n < 2)
        return 0.0;
    std::vector<double> d(n - 1, 0.0);
    parallel_for(n - 1, [&](std::size_t i) { d[i] = bl_distance(flow.measures[i + 1], flow.measures[i], opt); });
    return *std::max_element(d.begin(), d.end()) / std::pow(flow.lattice.h(), kappa);
}

EmpiricalMeasure subsample(const EmpiricalMeasure& m, std::size_t target, std::uint64_t seed)
{
    if (target == 0)
        throw DomainError("subsample: target must be positive");
    if (target >= m.size())
        return m;
    const Philox4x32 gen(seed);
    const double u = uniform_at(gen, 0x5u, 0u, 0u, 0u);
    const std::size_t d = m.dim();
    std::vector<double> pts;
    pts.reserve(target * d);
    double cum = m.mass(0);
    std::size_t i = 0;
    for (std::size_t q = 0; q < target; ++q) {
        const double pos = (static_cast<double>(q) + u) / static_cast<double>(target);
        while (pos > cum && i + 1 < m.size())
            cum += m.mass(++i);
        pts.insert(pts.end(), m.point(i), m.point(i) + d);
    }
    return EmpiricalMeasure::uniform(d, std::move(pts));
}

EmpiricalFlow subsample(const EmpiricalFlow& f, std::size_t target, std::uint64_t seed)
{
    EmpiricalFlow out;
    out.lattice = f.lattice;
    out.measures.reserve(f.measures.size());
    for (const auto& m : f.measures)
        out.measures.push_back(subsample(m, target, seed));
    return out;
}

} // namespace mkvcyl
