#pragma once

#include <cstddef>
#include <vector>

namespace mkvcyl {

// Uncapacitated transportation problem from S sources to D sinks on the
// complete bipartite graph. Primal network simplex on strongly feasible trees
// with block pricing. solve() can be called repeatedly with new costs; the
// last optimal basis is the starting point (it stays primal feasible because
// flows depend only on the tree).
class TransportSolver {
public:
    TransportSolver(std::vector<double> supply, std::vector<double> demand);

    // cost is S x D row-major. Returns the optimal total cost.
    double solve(const std::vector<double>& cost);

    // Optimal flow on the S x D arcs after solve().
    std::vector<double> flow() const;
    std::size_t pivots() const { return pivots_; }

private:
    int tail(std::size_t a) const;
    int head(std::size_t a) const;
    void rebuild();
    void pivot(std::size_t entering);

    std::size_t S_, D_, n_, E_;
    std::vector<double> b_;
    std::vector<std::size_t> basic_;
    std::vector<std::size_t> basic_slot_;
    std::vector<char> in_tree_;
    std::vector<double> x_;
    std::vector<double> cost_;
    std::vector<int> parent_, parc_, depth_, order_;
    std::vector<int> adj_start_, adj_;
    std::vector<double> pot_;
    std::size_t next_block_ = 0;
    std::size_t pivots_ = 0;
    double flow_tol_ = 0.0;
};

} // namespace mkvcyl
