#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "zrp/lattice.hpp"
#include "zrp/measures.hpp"
#include "zrp/rates.hpp"

namespace zrp {

// Occupation vector; moves eta -> eta^{x,y} conserve the total count.
using Configuration = std::vector<int>;

inline long total_count(std::span<const int> eta) {
    long r = 0;
    for (int k : eta) r += k;
    return r;
}

// All r-particle configurations on a lattice, lexicographically ordered, with
// the canonical law nu(eta) ~ prod_x 1/c_x(eta_x)!.
struct CanonicalEnsemble {
    Lattice lattice;
    RateFamily rf;
    long r = 0;
    std::vector<Configuration> states;
    std::vector<double> nu;
    std::vector<double> log_weight;  // unnormalized log nu

    std::size_t size() const { return states.size(); }
    int sites() const { return lattice.size(); }

    // lexicographic rank/unrank bijection over {eta : sum eta = r}
    std::size_t rank(std::span<const int> eta) const;
    Configuration unrank(std::size_t index) const;

    // index of eta^{x,y} given the index of eta (eta_x > 0)
    std::size_t move_index(std::size_t index, int x, int y) const;

    // nu-expectation of a vector over states
    double expectation(std::span<const double> f) const;

    // pmf of eta_x under nu
    std::vector<double> site_marginal(int x) const;
};

CanonicalEnsemble canonical(const RateFamily& rf, const Lattice& lattice, long r,
                            std::size_t state_cap = 200000);

// Number of states C(r + n - 1, n - 1) without building anything.
std::uint64_t canonical_state_count(int sites, long r);

}  // namespace zrp
