#include "zrp/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "zrp/common.hpp"

namespace zrp {

std::uint64_t canonical_state_count(int sites, long r) {
    return binomial_u64(r + sites - 1, sites - 1);
}

std::size_t CanonicalEnsemble::rank(std::span<const int> eta) const {
    // count configurations lexicographically below eta: for each site i and
    // value v < eta_i, the remaining mass can be placed freely on the suffix
    const int n = sites();
    std::size_t below = 0;
    long remaining = r;
    for (int i = 0; i < n - 1; ++i) {
        for (int v = 0; v < eta[static_cast<std::size_t>(i)]; ++v)
            below += binomial_u64(remaining - v + n - i - 2, n - i - 2);
        remaining -= eta[static_cast<std::size_t>(i)];
    }
    return below;
}

Configuration CanonicalEnsemble::unrank(std::size_t index) const {
    const int n = sites();
    Configuration eta(static_cast<std::size_t>(n), 0);
    long remaining = r;
    for (int i = 0; i < n - 1; ++i) {
        int v = 0;
        for (;; ++v) {
            std::uint64_t block = binomial_u64(remaining - v + n - i - 2, n - i - 2);
            if (index < block) break;
            index -= block;
        }
        eta[static_cast<std::size_t>(i)] = v;
        remaining -= v;
    }
    eta[static_cast<std::size_t>(n - 1)] = static_cast<int>(remaining);
    return eta;
}

std::size_t CanonicalEnsemble::move_index(std::size_t index, int x, int y) const {
    Configuration eta = states[index];
    eta[static_cast<std::size_t>(x)] -= 1;
    eta[static_cast<std::size_t>(y)] += 1;
    return rank(eta);
}

double CanonicalEnsemble::expectation(std::span<const double> f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) acc += nu[i] * f[i];
    return acc;
}

std::vector<double> CanonicalEnsemble::site_marginal(int x) const {
    std::vector<double> m(static_cast<std::size_t>(r) + 1, 0.0);
    for (std::size_t i = 0; i < states.size(); ++i)
        m[static_cast<std::size_t>(states[i][static_cast<std::size_t>(x)])] += nu[i];
    return m;
}

CanonicalEnsemble canonical(const RateFamily& rf, const Lattice& lattice, long r, std::size_t state_cap) {
    if (r < 0) throw ConfigError("canonical: r must be nonnegative");
    if (rf.sites() != lattice.size())
        throw ConfigError("canonical: rate family and lattice disagree on the site count");
    std::uint64_t count = canonical_state_count(lattice.size(), r);
    if (count > state_cap)
        throw NumericError("canonical: StateSpaceTooLarge (" + std::to_string(count) + " states, cap " +
                           std::to_string(state_cap) + ")");

    CanonicalEnsemble ens{lattice, rf, r, {}, {}, {}};
    ens.states.reserve(count);

    const int n = lattice.size();
    Configuration eta(static_cast<std::size_t>(n), 0);
    // lexicographic enumeration by recursion on the site index
    auto emit = [&](auto&& self, int i, long remaining) -> void {
        if (i == n - 1) {
            eta[static_cast<std::size_t>(i)] = static_cast<int>(remaining);
            ens.states.push_back(eta);
            return;
        }
        for (long v = 0; v <= remaining; ++v) {
            eta[static_cast<std::size_t>(i)] = static_cast<int>(v);
            self(self, i + 1, remaining - v);
        }
    };
    emit(emit, 0, r);

    ens.log_weight.resize(ens.states.size());
    for (std::size_t i = 0; i < ens.states.size(); ++i) {
        double lw = 0.0;
        for (int x = 0; x < n; ++x)
            lw -= rf.log_rate_factorial(x, ens.states[i][static_cast<std::size_t>(x)]);
        ens.log_weight[i] = lw;
    }
    double log_z = log_sum_exp(ens.log_weight);
    ens.nu.resize(ens.states.size());
    double total = 0.0;
    for (std::size_t i = 0; i < ens.states.size(); ++i) {
        ens.nu[i] = std::exp(ens.log_weight[i] - log_z);
        total += ens.nu[i];
    }
    for (double& p : ens.nu) p /= total;
    return ens;
}

}  // namespace zrp
