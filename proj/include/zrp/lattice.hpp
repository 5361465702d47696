#pragma once

#include <vector>

namespace zrp {

// Finite cube of side `side` in dimension `dim` with free (non-periodic)
// nearest-neighbour edges. Sites are indexed 0..size-1 in row-major order.
struct Lattice {
    int dim = 1;
    int side = 1;
    std::vector<std::vector<int>> neighbors;  // per-site nearest neighbours

    int size() const { return static_cast<int>(neighbors.size()); }

    static Lattice cube(int dim, int side);
    static Lattice segment(int n) { return cube(1, n); }

    // Ordered nearest-neighbour pairs (x, y): each undirected edge appears twice.
    std::vector<std::pair<int, int>> directed_edges() const;
};

}  // namespace zrp
