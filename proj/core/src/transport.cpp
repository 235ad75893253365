#include "mkvcyl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mkvcyl/errors.hpp"

namespace mkvcyl {

// Node ids: sources 0..S-1, sinks S..S+D-1, root n_ = S+D.
// Arc ids: real arc i*D+j (source i -> sink S+j), artificial arc E_+v for node v
// (v -> root for sources, root -> v for sinks).

TransportSolver::TransportSolver(std::vector<double> supply, std::vector<double> demand)
    : S_(supply.size()), D_(demand.size())
{
    if (S_ == 0 || D_ == 0)
        throw SolverError("transport: empty side");
    n_ = S_ + D_;
    E_ = S_ * D_;
    b_.resize(n_);
    double tot_s = 0.0, tot_d = 0.0;
    for (std::size_t i = 0; i < S_; ++i) {
        if (!(supply[i] >= 0.0)) throw SolverError("transport: negative supply");
        b_[i] = supply[i];
        tot_s += supply[i];
    }
    for (std::size_t j = 0; j < D_; ++j) {
        if (!(demand[j] >= 0.0)) throw SolverError("transport: negative demand");
        b_[S_ + j] = -demand[j];
        tot_d += demand[j];
    }
    if (std::abs(tot_s - tot_d) > 1e-9 * std::max(1.0, tot_s))
        throw SolverError("transport: supply and demand differ");
    flow_tol_ = 1e-14 * std::max(1.0, tot_s);

    in_tree_.assign(E_ + n_, 0);
    x_.assign(E_ + n_, 0.0);
    cost_.assign(E_ + n_, 0.0);
    basic_.resize(n_);
    basic_slot_.assign(E_ + n_, 0);
    for (std::size_t v = 0; v < n_; ++v) {
        basic_[v] = E_ + v;
        basic_slot_[E_ + v] = v;
        in_tree_[E_ + v] = 1;
    }
    parent_.resize(n_ + 1);
    parc_.resize(n_ + 1);
    depth_.resize(n_ + 1);
    pot_.resize(n_ + 1);
}

int TransportSolver::tail(std::size_t a) const
{
    if (a < E_) return static_cast<int>(a / D_);
    const std::size_t v = a - E_;
    return v < S_ ? static_cast<int>(v) : static_cast<int>(n_);
}

int TransportSolver::head(std::size_t a) const
{
    if (a < E_) return static_cast<int>(S_ + a % D_);
    const std::size_t v = a - E_;
    return v < S_ ? static_cast<int>(n_) : static_cast<int>(v);
}

// Parent pointers, depths, potentials and flows from the current basic arcs.
void TransportSolver::rebuild()
{
    const std::size_t nn = n_ + 1;
    adj_start_.assign(nn + 1, 0);
    for (std::size_t a : basic_) {
        ++adj_start_[tail(a) + 1];
        ++adj_start_[head(a) + 1];
    }
    std::partial_sum(adj_start_.begin(), adj_start_.end(), adj_start_.begin());
    adj_.assign(2 * basic_.size(), 0);
    std::vector<int> fill(adj_start_.begin(), adj_start_.end() - 1);
    for (std::size_t a : basic_) {
        adj_[fill[tail(a)]++] = static_cast<int>(a);
        adj_[fill[head(a)]++] = static_cast<int>(a);
    }

    order_.clear();
    order_.reserve(nn);
    std::fill(parent_.begin(), parent_.end(), -2);
    const int root = static_cast<int>(n_);
    parent_[root] = -1;
    parc_[root] = -1;
    depth_[root] = 0;
    pot_[root] = 0.0;
    order_.push_back(root);
    for (std::size_t q = 0; q < order_.size(); ++q) {
        const int u = order_[q];
        for (int e = adj_start_[u]; e < adj_start_[u + 1]; ++e) {
            const auto a = static_cast<std::size_t>(adj_[e]);
            const int v = tail(a) == u ? head(a) : tail(a);
            if (parent_[v] != -2) continue;
            parent_[v] = u;
            parc_[v] = static_cast<int>(a);
            depth_[v] = depth_[u] + 1;
            pot_[v] = (tail(a) == u) ? pot_[u] - cost_[a] : pot_[u] + cost_[a];
            order_.push_back(v);
        }
    }
    if (order_.size() != nn)
        throw SolverError("transport: basis is not a spanning tree");

    std::vector<double> sub(nn, 0.0);
    for (std::size_t v = 0; v < n_; ++v)
        sub[v] = b_[v];
    for (std::size_t q = order_.size(); q-- > 1;) {
        const int v = order_[q];
        const auto a = static_cast<std::size_t>(parc_[v]);
        const double s = sub[v];
        double f = (tail(a) == v) ? s : -s;
        if (f < 0.0 && f > -flow_tol_) f = 0.0;
        x_[a] = f;
        sub[parent_[v]] += s;
    }
}

void TransportSolver::pivot(std::size_t e)
{
    const int k = tail(e), l = head(e);
    std::vector<int> kside, lside;  // nodes whose parent arc lies on the cycle
    int u = k, v = l;
    while (u != v) {
        if (depth_[u] >= depth_[v]) {
            kside.push_back(u);
            u = parent_[u];
        } else {
            lside.push_back(v);
            v = parent_[v];
        }
    }

    // The cycle runs along e (k -> l), up from l to the apex, down to k.
    auto backward_k = [&](int x) { return tail(parc_[x]) == x; };
    auto backward_l = [&](int x) { return head(parc_[x]) == x; };
    double delta = INFINITY;
    for (int x : kside)
        if (backward_k(x)) delta = std::min(delta, x_[parc_[x]]);
    for (int x : lside)
        if (backward_l(x)) delta = std::min(delta, x_[parc_[x]]);
    if (!std::isfinite(delta))
        throw SolverError("transport: unbounded cycle");

    // Last blocking arc in the order apex -> k -> l -> apex keeps the tree
    // strongly feasible.
    const double lim = delta + flow_tol_;
    std::size_t leaving = e;
    for (auto it = kside.rbegin(); it != kside.rend(); ++it)
        if (backward_k(*it) && x_[parc_[*it]] <= lim) leaving = static_cast<std::size_t>(parc_[*it]);
    for (int x : lside)
        if (backward_l(x) && x_[parc_[x]] <= lim) leaving = static_cast<std::size_t>(parc_[x]);
    if (leaving == e)
        throw SolverError("transport: no leaving arc");

    const std::size_t slot = basic_slot_[leaving];
    in_tree_[leaving] = 0;
    x_[leaving] = 0.0;
    basic_[slot] = e;
    basic_slot_[e] = slot;
    in_tree_[e] = 1;
    rebuild();
}

double TransportSolver::solve(const std::vector<double>& cost)
{
    if (cost.size() != E_)
        throw SolverError("transport: cost matrix has wrong size");
    double cmax = 0.0;
    for (std::size_t a = 0; a < E_; ++a) {
        if (!(cost[a] >= 0.0) || !std::isfinite(cost[a]))
            throw SolverError("transport: costs must be finite and nonnegative");
        cost_[a] = cost[a];
        cmax = std::max(cmax, cost[a]);
    }
    for (std::size_t v = 0; v < n_; ++v)
        cost_[E_ + v] = cmax + 1.0;
    rebuild();

    const double eps = 1e-12 * std::max(1.0, cmax);
    const std::size_t block = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(E_))));
    const std::size_t max_pivots = 100 * (E_ + n_) + 10000;

    for (;;) {
        std::size_t best = E_;
        double best_rc = -eps;
        std::size_t scanned = 0;
        while (scanned < E_) {
            const std::size_t stop = std::min(E_, scanned + block);
            for (; scanned < stop; ++scanned) {
                const std::size_t a = next_block_;
                next_block_ = (next_block_ + 1 == E_) ? 0 : next_block_ + 1;
                if (in_tree_[a]) continue;
                const double rc = cost_[a] - pot_[a / D_] + pot_[S_ + a % D_];
                if (rc < best_rc) {
                    best_rc = rc;
                    best = a;
                }
            }
            if (best != E_) break;
        }
        if (best == E_)
            break;
        if (++pivots_ > max_pivots)
            throw SolverError("transport: pivot limit reached");
        pivot(best);
    }

    for (std::size_t v = 0; v < n_; ++v)
        if (x_[E_ + v] > 1e-9 * std::max(1.0, std::abs(b_[v])))
            throw SolverError("transport: infeasible (artificial flow remains)");

    double total = 0.0;
    for (std::size_t a : basic_)
        if (a < E_) total += cost_[a] * x_[a];
    return total;
}

std::vector<double> TransportSolver::flow() const
{
    std::vector<double> f(E_, 0.0);
    for (std::size_t a : basic_)
        if (a < E_) f[a] = x_[a];
    return f;
}

} // namespace mkvcyl
