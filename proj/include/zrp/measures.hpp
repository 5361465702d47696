#pragma once

#include <vector>

#include "zrp/rates.hpp"

namespace zrp {

// Truncated single-site grand canonical marginal
//   mu_{x,phi}(k) = phi^k / (c_x(k)! Z_x(phi)),  k = 0..K_trunc.
// K_trunc is chosen from the analytic tail bound sum_{k>K} (phi/c1)^k / k!.
struct GrandCanonicalMarginal {
    int site = 0;
    double phi = 0.0;
    std::vector<double> pmf;       // renormalized over 0..K_trunc
    double log_Z = 0.0;            // log partition function (untruncated estimate)
    double Z = 0.0;
    double tail_mass_bound = 0.0;  // certified bound on the discarded mass / Z
    int k_trunc() const { return static_cast<int>(pmf.size()) - 1; }

    double mean() const;
    double variance() const;
};

GrandCanonicalMarginal marginal(const RateFamily& rf, int x, double phi,
                                double eps_trunc = 1e-14, int hard_cap = 200000);

struct SiteMoments {
    double rho = 0.0;                // mean occupation
    double sigma2 = 0.0;             // variance
    std::vector<double> central;     // central moments m_0..m_order
    std::vector<double> cumulant;    // cumulants kappa_0..kappa_order (kappa_1 = 0 after centering)
};

struct MomentTable {
    std::vector<SiteMoments> site;
    double rho_avg = 0.0;     // rho_Lambda
    double sigma2_avg = 0.0;  // sigma^2_Lambda
    int order = 0;
};

// Moments and cumulants of every site marginal at fugacity phi, order <= 8.
// Checks the identity mu[c_x(eta_x)] = phi (1e-10) as a truncation guard.
MomentTable moments(const RateFamily& rf, double phi, int order = 8, double eps_trunc = 1e-14);

// Inverts rho_Lambda(phi) = rho: monotone bracketing plus Newton refinement
// with phi'(rho) = phi / sigma2(rho). Relative tolerance 1e-12.
double phi_of_rho(const RateFamily& rf, double rho, double tol = 1e-12, int max_iter = 200);

// Exact pmf of R = sum_x eta_x under mu_{Lambda,phi}: iterated convolution of
// the truncated marginals over `sites` cyclically drawn from rf.
std::vector<double> sum_pmf(const RateFamily& rf, int sites, double phi, double eps_trunc = 1e-14);

// log W_Lambda(m) for m = 0..r_max where W_Lambda(m) = sum over occupations of
// `sites` sites with total m of prod_x 1/c_x(eta_x)!  (canonical weights).
// Site x uses the rates of rf site (site_offset + x) mod rf.sites().
std::vector<double> canonical_log_weights(const RateFamily& rf, int sites, long r_max,
                                          int site_offset = 0);

// sqrt(r) * mu_{Lambda,phi(r/|Lambda|)}(R=r) for one (|Lambda|, r) pair.
double condition_e_statistic(const RateFamily& rf, int sites, long r);

// log pmf of the particle total over an explicit site subset of rf at
// fugacity phi; entries 0..r_cap (full support when r_cap < 0).
std::vector<double> sum_log_pmf(const RateFamily& rf, const std::vector<int>& sites, double phi,
                                double eps_trunc = 1e-14, long r_cap = -1);

}  // namespace zrp
