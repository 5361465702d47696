#include "zrp/lattice.hpp"

#include "zrp/common.hpp"

namespace zrp {

Lattice Lattice::cube(int dim, int side) {
    if (dim < 1 || dim > 4) throw ConfigError("lattice: dim must be in [1,4]");
    if (side < 1) throw ConfigError("lattice: side must be >= 1");
    long n = 1;
    for (int d = 0; d < dim; ++d) n *= side;
    Lattice lat;
    lat.dim = dim;
    lat.side = side;
    lat.neighbors.resize(static_cast<std::size_t>(n));
    std::vector<int> coord(static_cast<std::size_t>(dim));
    for (long s = 0; s < n; ++s) {
        long rem = s;
        for (int d = 0; d < dim; ++d) {
            coord[d] = static_cast<int>(rem % side);
            rem /= side;
        }
        long stride = 1;
        for (int d = 0; d < dim; ++d) {
            if (coord[d] > 0) lat.neighbors[s].push_back(static_cast<int>(s - stride));
            if (coord[d] < side - 1) lat.neighbors[s].push_back(static_cast<int>(s + stride));
            stride *= side;
        }
    }
    return lat;
}

std::vector<std::pair<int, int>> Lattice::directed_edges() const {
    std::vector<std::pair<int, int>> edges;
    for (int x = 0; x < size(); ++x)
        for (int y : neighbors[x]) edges.emplace_back(x, y);
    return edges;
}

}  // namespace zrp
