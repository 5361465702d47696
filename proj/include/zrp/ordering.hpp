#pragma once

#include <vector>

#include "zrp/ensemble.hpp"

namespace zrp {

struct CouplingEntry {
    std::size_t lo = 0;  // state index in the lower ensemble
    std::size_t hi = 0;  // state index in the upper ensemble
    double mass = 0.0;
};

struct DominationResult {
    bool dominated = false;
    // feasible monotone coupling when dominated
    std::vector<CouplingEntry> coupling;
    // otherwise: an increasing event E with nu_lo(E) > nu_hi(E)
    std::vector<std::size_t> violating_generators;  // lo states generating E
    double nu_lo_event = 0.0;
    double nu_hi_event = 0.0;
};

// Decides nu_lo <= nu_hi in the Strassen sense: existence of a coupling
// supported on {eta <= xi} with the given marginals, via max-flow on the
// order-restricted transport graph. The min cut yields the violating
// increasing event when infeasible.
DominationResult check_stochastic_domination(const CanonicalEnsemble& lo, const CanonicalEnsemble& hi,
                                             std::size_t pair_cap = 4000000);

}  // namespace zrp
