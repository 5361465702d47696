#include "zrp/bdchain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "zrp/common.hpp"
#include "zrp/measures.hpp"

namespace zrp {

namespace {

std::vector<int> complement_sites(int n, const std::vector<int>& half1) {
    std::vector<char> inside(static_cast<std::size_t>(n), 0);
    for (int x : half1) {
        if (x < 0 || x >= n) throw ConfigError("split: site index out of range");
        if (inside[static_cast<std::size_t>(x)]) throw ConfigError("split: duplicate site");
        inside[static_cast<std::size_t>(x)] = 1;
    }
    std::vector<int> rest;
    for (int x = 0; x < n; ++x)
        if (!inside[static_cast<std::size_t>(x)]) rest.push_back(x);
    return rest;
}

}  // namespace

BirthDeathChain make_birth_death(std::vector<double> birth, std::vector<double> death) {
    if (birth.size() != death.size())
        throw ConfigError("birth-death chain: need matching birth and death ranges");
    const std::size_t n = birth.size() + 1;
    for (double b : birth)
        if (!(b > 0.0)) throw ConfigError("birth-death chain: birth rates must be positive");
    for (double d : death)
        if (!(d > 0.0)) throw ConfigError("birth-death chain: death rates must be positive");

    // detailed balance in log space: log pi(k+1) = log pi(k) + log b(k) - log d(k+1)
    std::vector<double> logpi(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k)
        logpi[k + 1] = logpi[k] + std::log(birth[k]) - std::log(death[k]);
    double log_z = log_sum_exp(logpi);
    BirthDeathChain chain;
    chain.birth = std::move(birth);
    chain.death = std::move(death);
    chain.stationary.resize(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        chain.stationary[k] = std::exp(logpi[k] - log_z);
        total += chain.stationary[k];
    }
    for (double& p : chain.stationary) p /= total;
    return chain;
}

GeneratorMatrix BirthDeathChain::generator() const {
    return tridiagonal_generator(birth, death, stationary);
}

double BirthDeathChain::detailed_balance_defect() const {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < stationary.size(); ++k)
        worst = std::max(worst, std::abs(stationary[k] * birth[k] - stationary[k + 1] * death[k]));
    return worst;
}

BoundaryCountLaw boundary_count_law(const CanonicalEnsemble& ens, const std::vector<int>& half1) {
    BoundaryCountLaw law;
    law.half1 = half1;
    law.half2 = complement_sites(ens.sites(), half1);
    law.r = ens.r;
    law.gamma1.assign(static_cast<std::size_t>(ens.r) + 1, 0.0);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        long r1 = 0;
        for (int x : half1) r1 += ens.states[i][static_cast<std::size_t>(x)];
        law.gamma1[static_cast<std::size_t>(r1)] += ens.nu[i];
    }
    return law;
}

std::vector<double> boundary_count_by_convolution(const RateFamily& rf, const std::vector<int>& half1,
                                                  long r) {
    auto half2 = complement_sites(rf.sites(), half1);
    RateFamily rf1 = subfamily(rf, half1);
    RateFamily rf2 = subfamily(rf, half2);
    auto w1 = canonical_log_weights(rf1, rf1.sites(), r);
    auto w2 = canonical_log_weights(rf2, rf2.sites(), r);
    std::vector<double> logg(static_cast<std::size_t>(r) + 1);
    for (long k = 0; k <= r; ++k)
        logg[static_cast<std::size_t>(k)] =
            w1[static_cast<std::size_t>(k)] + w2[static_cast<std::size_t>(r - k)];
    double log_z = log_sum_exp(logg);
    std::vector<double> gamma(logg.size());
    double total = 0.0;
    for (std::size_t k = 0; k < logg.size(); ++k) {
        gamma[k] = std::exp(logg[k] - log_z);
        total += gamma[k];
    }
    for (double& p : gamma) p /= total;
    return gamma;
}

BirthDeathChain metropolis_chain(const std::vector<double>& gamma) {
    const std::size_t n = gamma.size();
    if (n < 2) throw ConfigError("metropolis_chain: need at least two states");
    for (double g : gamma)
        if (!(g > 0.0)) throw NumericError("metropolis_chain: ZeroMass in the target law");
    std::vector<double> birth(n - 1), death(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        birth[k] = std::min(gamma[k + 1] / gamma[k], 1.0);
        death[k] = std::min(gamma[k] / gamma[k + 1], 1.0);  // d(k+1)
    }
    return make_birth_death(std::move(birth), std::move(death));
}

BirthDeathChain single_site_chain(const CanonicalEnsemble& ens, int x) {
    if (ens.r < 1) throw ConfigError("single_site_chain: need r >= 1");
    const long r = ens.r;
    auto rest = complement_sites(ens.sites(), {x});
    if (rest.empty()) throw ConfigError("single_site_chain: need at least two sites");
    RateFamily reduced = subfamily(ens.rf, rest);
    // b(k) = nu_{Lambda_x, r-k}[c_y(eta_y)] = W(r-k-1)/W(r-k), independent of y
    auto logw = canonical_log_weights(reduced, reduced.sites(), r);
    std::vector<double> birth(static_cast<std::size_t>(r)), death(static_cast<std::size_t>(r));
    for (long k = 0; k < r; ++k) {
        birth[static_cast<std::size_t>(k)] =
            std::exp(logw[static_cast<std::size_t>(r - k - 1)] - logw[static_cast<std::size_t>(r - k)]);
        death[static_cast<std::size_t>(k)] = ens.rf.rate(x, k + 1);  // d(k+1) = c_x(k+1)
    }
    return make_birth_death(std::move(birth), std::move(death));
}

BdGapConditions check_bdspecgap_conditions(const BirthDeathChain& chain) {
    BdGapConditions out;
    const auto& b = chain.birth;
    const auto& d = chain.death;
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
        out.J2 = std::max(out.J2, std::abs(b[k + 1] - b[k]));

    // tightest affine lower envelope: J1 = min pair slope of d, then minimal J0
    double j1 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < d.size(); ++k)
        for (std::size_t j = 0; j < k; ++j)
            j1 = std::min(j1, (d[k] - d[j]) / static_cast<double>(k - j));
    if (d.size() < 2) j1 = d.empty() ? 0.0 : d[0];
    out.J1 = j1;
    double j0 = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k)
        for (std::size_t j = 0; j < k; ++j)
            j0 = std::max(j0, out.J1 * static_cast<double>(k - j) - (d[k] - d[j]));
    out.J0 = j0;
    out.d_star = d.empty() ? 0.0 : *std::min_element(d.begin(), d.end());
    out.admissible = out.J1 > out.J2;
    out.boundary = out.J1 == out.J2;
    return out;
}

std::vector<double> default_a0_grid() {
    std::vector<double> grid;
    for (double a = 1.0; a <= 64.0 * 1.0001; a *= 1.25) grid.push_back(a);
    return grid;
}

namespace {

struct MicloMargins {
    double ratio_above = std::numeric_limits<double>::infinity();
    double ratio_below = std::numeric_limits<double>::infinity();
    double gauss_upper = std::numeric_limits<double>::infinity();
    double gauss_lower = std::numeric_limits<double>::infinity();
    double worst() const {
        return std::min(std::min(ratio_above, ratio_below), std::min(gauss_upper, gauss_lower));
    }
};

// log-scale slack of the Miclo conditions at a fixed (a0, rbar)
MicloMargins miclo_margins(const std::vector<double>& gamma, double a0, long rbar) {
    const long r = static_cast<long>(gamma.size()) - 1;
    const double rb = static_cast<double>(rbar);
    MicloMargins m;
    auto logg = [&](long k) {
        if (k < 0 || k > r) return -std::numeric_limits<double>::infinity();
        return gamma[static_cast<std::size_t>(k)] > 0.0 ? std::log(gamma[static_cast<std::size_t>(k)])
                                                        : -std::numeric_limits<double>::infinity();
    };
    for (long r1 = rbar + 1; r1 <= r; ++r1) {
        double bound = -static_cast<double>(r1 - rbar) / (a0 * rb);
        m.ratio_above = std::min(m.ratio_above, bound - (logg(r1 + 1) - logg(r1)));
    }
    for (long r1 = 0; r1 <= rbar - 1; ++r1) {
        double bound = -static_cast<double>(rbar - r1) / (a0 * rb);
        m.ratio_below = std::min(m.ratio_below, bound - (logg(r1 - 1) - logg(r1)));
    }
    for (long r1 = 0; r1 <= r; ++r1) {
        double dev = sq(static_cast<double>(r1) - rb);
        double upper = std::log(a0) - 0.5 * std::log(rb) - dev / (a0 * rb);
        double lower = -std::log(a0) - 0.5 * std::log(rb) - a0 * dev / rb;
        m.gauss_upper = std::min(m.gauss_upper, upper - logg(r1));
        m.gauss_lower = std::min(m.gauss_lower, logg(r1) - lower);
    }
    return m;
}

}  // namespace

MicloResult miclo_check(const std::vector<double>& gamma, const std::vector<double>& a0_grid) {
    const long r = static_cast<long>(gamma.size()) - 1;
    if (r < 2) throw ConfigError("miclo_check: need r >= 2");
    MicloResult best;
    best.satisfied = false;
    double best_worst = -std::numeric_limits<double>::infinity();
    for (double a0 : a0_grid) {
        for (long rbar = 1; rbar < r; ++rbar) {
            double rb = static_cast<double>(rbar);
            double other = static_cast<double>(r - rbar);
            if (!(rb / a0 <= other && other <= a0 * rb)) continue;
            MicloMargins m = miclo_margins(gamma, a0, rbar);
            if (m.worst() > best_worst) {
                best_worst = m.worst();
                best.a0_min = a0;
                best.rbar = rbar;
                best.margin_ratio_above = m.ratio_above;
                best.margin_ratio_below = m.ratio_below;
                best.margin_gauss_upper = m.gauss_upper;
                best.margin_gauss_lower = m.gauss_lower;
            }
            if (m.worst() >= 0.0) {
                best.satisfied = true;
                best.a0_min = a0;
                best.rbar = rbar;
                best.margin_ratio_above = m.ratio_above;
                best.margin_ratio_below = m.ratio_below;
                best.margin_gauss_upper = m.gauss_upper;
                best.margin_gauss_lower = m.gauss_lower;
                return best;
            }
        }
    }
    return best;
}

ModifiedMeasure modified_measure(const RateFamily& rf, const std::vector<int>& half1,
                                 const BoundaryCountLaw& law, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.25))
        throw ConfigError("modified_measure: epsilon must lie in (0, 1/4)");
    const long r = law.r;
    if (r < 4) throw ConfigError("modified_measure: need r >= 4 so I_eps is nonempty");

    ModifiedMeasure out;
    out.epsilon = epsilon;
    out.r = r;
    out.rbar = (r + 1) / 2;
    out.i_lo = static_cast<long>(std::ceil(epsilon * static_cast<double>(r)));
    out.i_hi = static_cast<long>(std::floor((1.0 - epsilon) * static_cast<double>(r)));

    auto half2 = complement_sites(rf.sites(), half1);
    RateFamily rf1 = subfamily(rf, half1);
    RateFamily rf2 = subfamily(rf, half2);
    const double n1 = static_cast<double>(rf1.sites());
    const double n2 = static_cast<double>(rf2.sites());

    // log mu_{Lambda_i, phi_i(rho)}(R_i = m); rho = 0 degenerates to the point
    // mass at zero, giving log-probability 0 at m = 0
    auto log_prob = [](const RateFamily& fam, double rho, long m) {
        if (rho <= 0.0) return m == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
        double phi = phi_of_rho(fam, rho);
        std::vector<int> all(static_cast<std::size_t>(fam.sites()));
        std::iota(all.begin(), all.end(), 0);
        auto logp = sum_log_pmf(fam, all, phi, 1e-14, m);
        return logp[static_cast<std::size_t>(m)];
    };

    const double rbar = static_cast<double>(out.rbar);
    out.h_vals.resize(static_cast<std::size_t>(r) + 1);
    for (long r1 = 0; r1 <= r; ++r1) {
        double num = log_prob(rf1, static_cast<double>(r1) / n1, r1) +
                     log_prob(rf2, static_cast<double>(r - r1) / n2, r - r1);
        double den = log_prob(rf1, rbar / n1, r1) + log_prob(rf2, rbar / n2, r - r1);
        double h = num - den;  // H = log(num/den); exp(-H) carries the Gaussian profile
        if (!std::isfinite(h))
            throw NumericError("modified_measure: H not finite at r1 = " + std::to_string(r1));
        out.h_vals[static_cast<std::size_t>(r1)] = h;
    }

    std::vector<double> neg_h, logg;
    for (long k = out.i_lo; k <= out.i_hi; ++k) {
        neg_h.push_back(-out.h_vals[static_cast<std::size_t>(k)]);
        logg.push_back(std::log(law.gamma1[static_cast<std::size_t>(k)]));
    }
    out.log_z = log_sum_exp(neg_h) - log_sum_exp(logg);

    out.gamma1_eps = law.gamma1;
    for (long k = out.i_lo; k <= out.i_hi; ++k)
        out.gamma1_eps[static_cast<std::size_t>(k)] =
            std::exp(-out.h_vals[static_cast<std::size_t>(k)] - out.log_z);

    out.ratio_sup = 0.0;
    out.ratio_inf = std::numeric_limits<double>::infinity();
    for (long k = 0; k <= r; ++k) {
        double ratio = out.gamma1_eps[static_cast<std::size_t>(k)] / law.gamma1[static_cast<std::size_t>(k)];
        out.ratio_sup = std::max(out.ratio_sup, ratio);
        out.ratio_inf = std::min(out.ratio_inf, ratio);
    }
    return out;
}

CondDiffResult conditional_difference_check(const CanonicalEnsemble& ens, const std::vector<int>& half1,
                                            std::span<const double> f, long r1) {
    if (r1 < 1 || r1 > ens.r) throw ConfigError("conditional_difference_check: need 1 <= r1 <= r");
    auto half2 = complement_sites(ens.sites(), half1);

    auto evaluate = [&](const std::vector<int>& h1, const std::vector<int>& h2, long split_r1) {
        // conditional means over {R1 = split_r1} and {R1 = split_r1 - 1} plus
        // the identity's right-hand side evaluated on the lower slice
        double g_hi = 0.0, g_lo = 0.0;
        double mean_hi = 0.0, mean_lo = 0.0;
        double grad = 0.0, mean_fg = 0.0, mean_g = 0.0;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            long c1 = 0;
            for (int x : h1) c1 += ens.states[i][static_cast<std::size_t>(x)];
            if (c1 == split_r1) {
                g_hi += ens.nu[i];
                mean_hi += ens.nu[i] * f[i];
            } else if (c1 == split_r1 - 1) {
                const auto& eta = ens.states[i];
                g_lo += ens.nu[i];
                mean_lo += ens.nu[i] * f[i];
                double gsum = 0.0, gradsum = 0.0;
                for (int x : h1) {
                    double hx = h_factor(ens.rf, x, eta[static_cast<std::size_t>(x)]);
                    for (int y : h2) {
                        if (eta[static_cast<std::size_t>(y)] == 0) continue;
                        double cy = ens.rf.rate(y, eta[static_cast<std::size_t>(y)]);
                        gsum += hx * cy;
                        std::size_t j = ens.move_index(i, y, x);
                        gradsum += hx * cy * (f[j] - f[i]);
                    }
                }
                grad += ens.nu[i] * gradsum;
                mean_fg += ens.nu[i] * f[i] * gsum;
                mean_g += ens.nu[i] * gsum;
            }
        }
        if (!(g_hi > 0.0) || !(g_lo > 0.0))
            throw ConfigError("conditional_difference_check: gamma1 vanishes on the requested slice");
        mean_hi /= g_hi;
        mean_lo /= g_lo;
        grad /= g_lo;
        double cov = mean_fg / g_lo - (mean_lo) * (mean_g / g_lo);
        double pre = (g_lo / g_hi) / (static_cast<double>(split_r1) * static_cast<double>(h2.size()));
        return std::pair<double, double>{mean_hi - mean_lo, pre * (grad + cov)};
    };

    auto [lhs, rhs] = evaluate(half1, half2, r1);
    CondDiffResult out;
    out.lhs = lhs;
    out.rhs = rhs;
    out.abs_err = std::abs(lhs - rhs);

    // exchanging the roles of the halves reproduces the negated difference
    auto [lhs_m, rhs_m] = evaluate(half2, half1, ens.r - r1 + 1);
    out.mirror_err = std::max(std::abs(lhs_m + lhs), std::abs(rhs_m + lhs));
    return out;
}

BirthDeathChain two_site_chain(const CanonicalEnsemble& ens) {
    if (ens.sites() != 2) throw ConfigError("two_site_chain: need |Lambda| = 2");
    const long r = ens.r;
    std::vector<double> birth(static_cast<std::size_t>(r)), death(static_cast<std::size_t>(r));
    for (long k = 0; k < r; ++k) {
        birth[static_cast<std::size_t>(k)] = 0.5 * ens.rf.rate(1, r - k);  // eta_2 -> eta_1
        death[static_cast<std::size_t>(k)] = 0.5 * ens.rf.rate(0, k + 1);  // d(k+1)
    }
    return make_birth_death(std::move(birth), std::move(death));
}

double two_site_logsob(const CanonicalEnsemble& ens, const EstimateOptions& opts) {
    BirthDeathChain chain = two_site_chain(ens);
    GeneratorMatrix gen = chain.generator();
    return estimate_constant(gen, ConstantKind::log_sobolev, opts).value;
}

}  // namespace zrp
