#pragma once

#include <vector>

#include "zrp/ensemble.hpp"
#include "zrp/generator.hpp"
#include "zrp/spectral.hpp"

namespace zrp {

// Birth-death chain on {0..r}: birth[k] = b(k) for k=0..r-1, death[k-1] = d(k)
// for k=1..r; stationary law from detailed balance.
struct BirthDeathChain {
    std::vector<double> birth;
    std::vector<double> death;
    std::vector<double> stationary;

    long r() const { return static_cast<long>(stationary.size()) - 1; }
    GeneratorMatrix generator() const;
    double detailed_balance_defect() const;
};

BirthDeathChain make_birth_death(std::vector<double> birth, std::vector<double> death);

// Law of R_1 = particles inside half1 under nu_{Lambda,r}.
struct BoundaryCountLaw {
    std::vector<int> half1;
    std::vector<int> half2;
    long r = 0;
    std::vector<double> gamma1;
};

BoundaryCountLaw boundary_count_law(const CanonicalEnsemble& ens, const std::vector<int>& half1);

// Same pmf by convolving half-lattice canonical weights (oracle path).
std::vector<double> boundary_count_by_convolution(const RateFamily& rf, const std::vector<int>& half1,
                                                  long r);

// Metropolis rates b(k) = min(gamma(k+1)/gamma(k), 1), d(k) = min(gamma(k-1)/gamma(k), 1).
BirthDeathChain metropolis_chain(const std::vector<double>& gamma);

// Marginal dynamics at site x: death c_x(.), birth from the canonical ensemble
// on Lambda \ {x} with r-k particles.
BirthDeathChain single_site_chain(const CanonicalEnsemble& ens, int x);

struct BdGapConditions {
    double J0 = 0.0;
    double J1 = 0.0;
    double J2 = 0.0;
    double d_star = 0.0;
    bool admissible = false;  // J1 > J2 strictly
    bool boundary = false;    // J1 == J2
};

BdGapConditions check_bdspecgap_conditions(const BirthDeathChain& chain);

struct MicloResult {
    bool satisfied = false;
    double a0_min = 0.0;
    long rbar = -1;
    // log-scale slack of each condition at the reported (a0, rbar); negative
    // margins on a failed check show how far the worst condition was off
    double margin_ratio_above = 0.0;
    double margin_ratio_below = 0.0;
    double margin_gauss_upper = 0.0;
    double margin_gauss_lower = 0.0;
};

// Smallest grid A0 admitting an rbar with A0^{-1} rbar <= r - rbar <= A0 rbar,
// one-step ratio decay away from rbar, and a two-sided Gaussian envelope.
MicloResult miclo_check(const std::vector<double>& gamma, const std::vector<double>& a0_grid);

std::vector<double> default_a0_grid();

struct ModifiedMeasure {
    double epsilon = 0.0;
    long r = 0;
    long rbar = 0;
    long i_lo = 0, i_hi = 0;  // I_eps = [i_lo, i_hi]
    std::vector<double> h_vals;
    double log_z = 0.0;
    std::vector<double> gamma1_eps;
    double ratio_sup = 0.0;  // sup gamma1_eps/gamma1
    double ratio_inf = 0.0;
};

// gamma1^eps: exp(-H)/Z inside I_eps = [eps r, (1-eps) r], gamma1 outside.
// H compares half-lattice sum probabilities at locally matched fugacities
// against the balanced ones at rbar = ceil(r/2); computed in log space.
ModifiedMeasure modified_measure(const RateFamily& rf, const std::vector<int>& half1,
                                 const BoundaryCountLaw& law, double epsilon);

struct CondDiffResult {
    double lhs = 0.0;  // nu(f|R1=r1) - nu(f|R1=r1-1)
    double rhs = 0.0;  // identity right-hand side
    double abs_err = 0.0;
    double mirror_err = 0.0;  // same identity with the halves exchanged
};

// Exact conditional-difference identity: the difference of conditional means
// equals gamma1(r1-1)/gamma1(r1) * 1/(r1 |Lambda_2|) * [gradient + covariance]
// evaluated on {R1 = r1-1}, with h_x(k) = (k+1)/c_x(k+1).
CondDiffResult conditional_difference_check(const CanonicalEnsemble& ens, const std::vector<int>& half1,
                                            std::span<const double> f, long r1);

// Log-Sobolev constant of the |Lambda|=2 process via its exact reduction to a
// birth-death chain in eta_1.
double two_site_logsob(const CanonicalEnsemble& ens, const EstimateOptions& opts = {});

BirthDeathChain two_site_chain(const CanonicalEnsemble& ens);

}  // namespace zrp
