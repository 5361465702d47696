#include "zrp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zrp/common.hpp"

namespace zrp {

double GrandCanonicalMarginal::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
    return m;
}

double GrandCanonicalMarginal::variance() const {
    double m = mean(), v = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) v += sq(static_cast<double>(k) - m) * pmf[k];
    return v;
}

GrandCanonicalMarginal marginal(const RateFamily& rf, int x, double phi, double eps_trunc, int hard_cap) {
    if (!(phi > 0.0)) throw ConfigError("marginal: phi must be positive");
    if (!(eps_trunc > 0.0 && eps_trunc <= 1e-6))
        throw ConfigError("marginal: eps_trunc must lie in (0, 1e-6]");

    // Analytic tail control: c_x(k) >= c1*k gives
    //   sum_{k>K} phi^k / c_x(k)! <= sum_{k>K} psi^k / k!,  psi = phi/c1,
    // and Z_x(phi) >= exp(phi/c2). Both in log space.
    const double psi = phi / rf.min_slope(x);
    const double log_z_floor = phi / rf.max_slope(x);
    const double log_eps = std::log(eps_trunc);

    long k_trunc = std::max<long>(2, static_cast<long>(std::ceil(2.0 * psi)));
    for (;; ++k_trunc) {
        if (k_trunc > hard_cap)
            throw NumericError("marginal: TruncationOverflow (K_trunc cap " + std::to_string(hard_cap) + ")");
        // log of psi^{K+1}/(K+1)!; beyond 2*psi the terms at least halve, so
        // the tail is below twice the next term.
        double log_next = static_cast<double>(k_trunc + 1) * std::log(psi) -
                          std::lgamma(static_cast<double>(k_trunc) + 2.0);
        double log_tail = std::log(2.0) + log_next;
        if (log_tail <= log_eps + log_z_floor) break;
    }

    GrandCanonicalMarginal out;
    out.site = x;
    out.phi = phi;
    std::vector<double> logw(static_cast<std::size_t>(k_trunc) + 1);
    const double log_phi = std::log(phi);
    for (long k = 0; k <= k_trunc; ++k)
        logw[static_cast<std::size_t>(k)] = static_cast<double>(k) * log_phi - rf.log_rate_factorial(x, k);
    out.log_Z = log_sum_exp(logw);
    out.Z = std::exp(out.log_Z);
    out.pmf.resize(logw.size());
    double total = 0.0;
    for (std::size_t k = 0; k < logw.size(); ++k) {
        out.pmf[k] = std::exp(logw[k] - out.log_Z);
        total += out.pmf[k];
    }
    for (double& p : out.pmf) p /= total;
    double log_next = static_cast<double>(k_trunc + 1) * std::log(psi) -
                      std::lgamma(static_cast<double>(k_trunc) + 2.0);
    out.tail_mass_bound = std::exp(std::log(2.0) + log_next - out.log_Z);
    return out;
}

namespace {

std::vector<double> central_moments(const std::vector<double>& pmf, double mean, int order) {
    std::vector<double> m(static_cast<std::size_t>(order) + 1, 0.0);
    m[0] = 1.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        double d = static_cast<double>(k) - mean;
        double p = pmf[k];
        double dp = 1.0;
        for (int j = 1; j <= order; ++j) {
            dp *= d;
            m[static_cast<std::size_t>(j)] += dp * p;
        }
    }
    return m;
}

// kappa_n = m_n - sum_{j=1}^{n-1} C(n-1, j-1) kappa_j m_{n-j}, central m (m_1 = 0).
std::vector<double> cumulants_from_central(const std::vector<double>& m) {
    std::vector<double> kappa(m.size(), 0.0);
    for (std::size_t n = 1; n < m.size(); ++n) {
        double acc = m[n];
        for (std::size_t j = 1; j < n; ++j)
            acc -= binomial(static_cast<long>(n) - 1, static_cast<long>(j) - 1) * kappa[j] * m[n - j];
        kappa[n] = acc;
    }
    return kappa;
}

}  // namespace

MomentTable moments(const RateFamily& rf, double phi, int order, double eps_trunc) {
    if (order < 2 || order > 8) throw ConfigError("moments: order must lie in [2, 8]");
    MomentTable t;
    t.order = order;
    t.site.resize(static_cast<std::size_t>(rf.sites()));
    for (int x = 0; x < rf.sites(); ++x) {
        auto mg = marginal(rf, x, phi, eps_trunc);
        auto& s = t.site[static_cast<std::size_t>(x)];
        s.rho = mg.mean();
        s.central = central_moments(mg.pmf, s.rho, order);
        s.sigma2 = s.central[2];
        s.cumulant = cumulants_from_central(s.central);
        t.rho_avg += s.rho / rf.sites();
        t.sigma2_avg += s.sigma2 / rf.sites();

        // truncation guard: mu[c_x(eta_x)] = phi must hold on the window
        double mc = 0.0;
        for (std::size_t k = 0; k < mg.pmf.size(); ++k)
            mc += rf.rate(x, static_cast<long>(k)) * mg.pmf[k];
        if (std::abs(mc - phi) > 1e-10 * std::max(1.0, phi))
            throw NumericError("moments: fugacity identity violated; truncation too aggressive");
    }
    return t;
}

namespace {

double rho_avg_at(const RateFamily& rf, double phi) {
    double acc = 0.0;
    for (int x = 0; x < rf.sites(); ++x) acc += marginal(rf, x, phi).mean();
    return acc / rf.sites();
}

double sigma2_avg_at(const RateFamily& rf, double phi) {
    double acc = 0.0;
    for (int x = 0; x < rf.sites(); ++x) acc += marginal(rf, x, phi).variance();
    return acc / rf.sites();
}

}  // namespace

double phi_of_rho(const RateFamily& rf, double rho, double tol, int max_iter) {
    if (!(rho > 0.0)) throw ConfigError("phi_of_rho: rho must be positive");
    const double target_tol = tol * std::max(1.0, rho);

    double phi = rho;  // exact already for c(k) = k
    double f = rho_avg_at(rf, phi);
    if (std::abs(f - rho) <= target_tol) return phi;

    // geometric bracket around the root; rho(phi) is strictly increasing
    double lo = phi, hi = phi;
    int guard = 0;
    if (f < rho) {
        while (rho_avg_at(rf, hi) < rho) {
            lo = hi;
            hi *= 4.0;
            if (++guard > 64) throw NumericError("phi_of_rho: NoConvergence while bracketing");
        }
    } else {
        while (rho_avg_at(rf, lo) > rho) {
            hi = lo;
            lo /= 4.0;
            if (++guard > 64) throw NumericError("phi_of_rho: NoConvergence while bracketing");
        }
    }

    for (int it = 0; it < max_iter; ++it) {
        // bisection step keeps the bracket shrinking; a Newton step with
        // phi'(rho) = phi/sigma^2 polishes whenever it stays inside
        double mid = 0.5 * (lo + hi);
        double fm = rho_avg_at(rf, mid);
        if (std::abs(fm - rho) <= target_tol) return mid;
        if (fm < rho)
            lo = mid;
        else
            hi = mid;

        double s2 = sigma2_avg_at(rf, mid);
        if (s2 > 0.0) {
            double newton = mid - (fm - rho) * mid / s2;
            if (newton > lo && newton < hi) {
                double fn = rho_avg_at(rf, newton);
                if (std::abs(fn - rho) <= target_tol) return newton;
                if (fn < rho)
                    lo = newton;
                else
                    hi = newton;
            }
        }
    }
    throw NumericError("phi_of_rho: NoConvergence after iteration cap");
}

std::vector<double> sum_pmf(const RateFamily& rf, int sites, double phi, double eps_trunc) {
    if (sites < 1) throw ConfigError("sum_pmf: need at least one site");
    std::vector<double> acc{1.0};
    for (int x = 0; x < sites; ++x) {
        auto mg = marginal(rf, x % rf.sites(), phi, eps_trunc);
        std::vector<double> next(acc.size() + mg.pmf.size() - 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            if (acc[i] == 0.0) continue;
            for (std::size_t k = 0; k < mg.pmf.size(); ++k) next[i + k] += acc[i] * mg.pmf[k];
        }
        acc = std::move(next);
    }
    return acc;
}

std::vector<double> canonical_log_weights(const RateFamily& rf, int sites, long r_max, int site_offset) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(static_cast<std::size_t>(r_max) + 1, neg_inf);
    logw[0] = 0.0;
    std::vector<double> next(logw.size());
    std::vector<double> terms;
    for (int x = 0; x < sites; ++x) {
        int site = (site_offset + x) % rf.sites();
        for (long m = 0; m <= r_max; ++m) {
            terms.clear();
            for (long k = 0; k <= m; ++k) {
                double prev = logw[static_cast<std::size_t>(m - k)];
                if (prev == neg_inf) continue;
                terms.push_back(prev - rf.log_rate_factorial(site, k));
            }
            next[static_cast<std::size_t>(m)] = log_sum_exp(terms);
        }
        logw.swap(next);
    }
    return logw;
}

std::vector<double> sum_log_pmf(const RateFamily& rf, const std::vector<int>& sites, double phi,
                                double eps_trunc, long r_cap) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> acc{0.0};
    std::vector<double> terms;
    for (int x : sites) {
        auto mg = marginal(rf, x, phi, eps_trunc);
        std::vector<double> logp(mg.pmf.size());
        for (std::size_t k = 0; k < mg.pmf.size(); ++k)
            logp[k] = mg.pmf[k] > 0.0 ? std::log(mg.pmf[k]) : neg_inf;
        std::size_t out_len = acc.size() + logp.size() - 1;
        if (r_cap >= 0) out_len = std::min<std::size_t>(out_len, static_cast<std::size_t>(r_cap) + 1);
        std::vector<double> next(out_len);
        for (std::size_t m = 0; m < out_len; ++m) {
            terms.clear();
            std::size_t k_lo = (m >= logp.size() - 1) ? m - (logp.size() - 1) : 0;
            for (std::size_t i = k_lo; i < acc.size() && i <= m; ++i) {
                double a = acc[i];
                double b = logp[m - i];
                if (a == neg_inf || b == neg_inf) continue;
                terms.push_back(a + b);
            }
            next[m] = log_sum_exp(terms);
        }
        acc = std::move(next);
    }
    if (r_cap >= 0 && acc.size() < static_cast<std::size_t>(r_cap) + 1)
        acc.resize(static_cast<std::size_t>(r_cap) + 1, neg_inf);
    return acc;
}

double condition_e_statistic(const RateFamily& rf, int sites, long r) {
    if (sites < 2) throw ConfigError("condition_e_statistic: need |Lambda| >= 2");
    if (r < 1) throw ConfigError("condition_e_statistic: need r >= 1");
    RateFamily view = cycle_to_sites(rf, sites);
    double phi = phi_of_rho(view, static_cast<double>(r) / sites);
    auto pmf = sum_pmf(view, sites, phi);
    double p = (static_cast<std::size_t>(r) < pmf.size()) ? pmf[static_cast<std::size_t>(r)] : 0.0;
    return std::sqrt(static_cast<double>(r)) * p;
}

}  // namespace zrp
