#pragma once

#include <tuple>
#include <vector>

#include "zrp/measures.hpp"

namespace zrp {

// Probabilists' Hermite polynomial H_m(x) via the three-term recursion.
double hermite(int m, double x);

// Nonnegative integer solutions of k_1 + 2 k_2 + ... + j k_j = j, with
// a = k_1 + ... + k_j per solution.
struct EdgeworthTerm {
    std::vector<int> k;  // k_1..k_j
    int a = 0;
};
std::vector<EdgeworthTerm> edgeworth_terms(int j);

// Correction functions g_0..g_J-2 for the total-count distribution at
// fugacity phi on `sites` sites. Cumulants aggregate as per-site averages
// normalized by sigma_Lambda (the non-identical-marginal convention).
struct EdgeworthExpansion {
    int order = 2;             // J
    double sigma = 0.0;        // sigma_Lambda(phi)
    double rho = 0.0;          // rho_Lambda(phi)
    int sites = 0;
    std::vector<double> kappa_avg;  // averaged cumulants up to order J+2

    // g_j(z); g_0 is the standard normal density
    double g(int j, double z) const;
    // sum_{j<=J-2} N^{-j/2} g_j(z)
    double series(double z) const;
};

EdgeworthExpansion edgeworth_expansion(const RateFamily& rf, int sites, double phi, int order);

// Exact law of R = sum eta_x under mu_{Lambda,phi} by marginal convolution.
struct SumDistribution {
    int sites = 0;
    double phi = 0.0;
    std::vector<double> pmf;
    double tail_bound = 0.0;

    double at(long k) const {
        return (k >= 0 && k < static_cast<long>(pmf.size())) ? pmf[static_cast<std::size_t>(k)] : 0.0;
    }
};

SumDistribution sum_distribution(const RateFamily& rf, int sites, double phi, double eps_trunc = 1e-14);

struct LltPointResult {
    double approx = 0.0;
    double exact = 0.0;
    double abs_err = 0.0;
    double z = 0.0;
};

// Edgeworth approximation of mu(R=r) at phi = phi(r/N) against the exact
// convolution oracle. J in {2,3,4}.
LltPointResult llt_normal(const RateFamily& rf, int sites, long r, int order);

// sup over the integer grid |z| <= z_max of |sqrt(N sigma^2) pmf - series|.
double llt_normal_sup_error(const RateFamily& rf, int sites, double phi, int order, double z_max = 6.0);

// Poisson-regime comparison: mu_{phi(r/N)}(R=k) against r^k e^{-r}/k!.
LltPointResult llt_poisson(const RateFamily& rf, int sites, long r, long k);
double llt_poisson_sup_error(const RateFamily& rf, int sites, long r);

// |mu^x_phi(t)| = |E exp(it(eta_x - rho_x)/sigma_x)| on a t grid.
struct CharFnScan {
    std::vector<double> t;
    std::vector<double> modulus;
    double max_beyond_delta = 0.0;  // max modulus over |t| >= delta
};
CharFnScan charfn_scan(const RateFamily& rf, int x, double phi, const std::vector<double>& t_grid,
                       double delta = 0.5);

// inf/sup of sqrt(r) mu_{Lambda,phi(r/|Lambda|)}(R=r) over sizes x r.
struct ConditionEScan {
    double inf = 0.0;
    double sup = 0.0;
    std::vector<std::tuple<int, long, double>> samples;  // (sites, r, statistic)
};
ConditionEScan condition_e_scan(const RateFamily& rf, const std::vector<int>& sizes, long r_max);

}  // namespace zrp
