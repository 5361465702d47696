#include "zrp/llt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "zrp/common.hpp"

namespace zrp {

double hermite(int m, double x) {
    if (m < 0) throw ConfigError("hermite: degree must be nonnegative");
    double h0 = 1.0, h1 = x;
    if (m == 0) return h0;
    if (m == 1) return h1;
    for (int k = 1; k < m; ++k) {
        double h2 = x * h1 - static_cast<double>(k) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

std::vector<EdgeworthTerm> edgeworth_terms(int j) {
    if (j < 1) throw ConfigError("edgeworth_terms: j must be >= 1");
    std::vector<EdgeworthTerm> out;
    std::vector<int> k(static_cast<std::size_t>(j), 0);
    // enumerate k_1..k_j with sum l*k_l = j
    auto recurse = [&](auto&& self, int l, int remaining) -> void {
        if (l == j) {
            if (remaining % j == 0) {
                k[static_cast<std::size_t>(j - 1)] = remaining / j;
                EdgeworthTerm term;
                term.k = k;
                term.a = 0;
                for (int v : k) term.a += v;
                out.push_back(term);
            }
            return;
        }
        for (int v = 0; v * l <= remaining; ++v) {
            k[static_cast<std::size_t>(l - 1)] = v;
            self(self, l + 1, remaining - v * l);
        }
    };
    recurse(recurse, 1, j);
    return out;
}

double EdgeworthExpansion::g(int j, double z) const {
    const double g0 = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    if (j == 0) return g0;
    double sum = 0.0;
    for (const auto& term : edgeworth_terms(j)) {
        double prod = 1.0;
        for (int m = 1; m <= j; ++m) {
            int km = term.k[static_cast<std::size_t>(m - 1)];
            if (km == 0) continue;
            double lambda = kappa_avg[static_cast<std::size_t>(m + 2)] /
                            (std::tgamma(static_cast<double>(m) + 3.0) * std::pow(sigma, m + 2));
            prod *= std::pow(lambda, km) / std::tgamma(static_cast<double>(km) + 1.0);
        }
        sum += hermite(j + 2 * term.a, z) * prod;
    }
    return g0 * sum;
}

double EdgeworthExpansion::series(double z) const {
    double acc = 0.0;
    for (int j = 0; j <= order - 2; ++j)
        acc += g(j, z) / std::pow(static_cast<double>(sites), 0.5 * j);
    return acc;
}

EdgeworthExpansion edgeworth_expansion(const RateFamily& rf, int sites, double phi, int order) {
    if (order < 2 || order > 4) throw ConfigError("edgeworth_expansion: order J must lie in {2,3,4}");
    RateFamily view = cycle_to_sites(rf, sites);
    MomentTable table = moments(view, phi, order + 2);
    EdgeworthExpansion e;
    e.order = order;
    e.sites = sites;
    e.rho = table.rho_avg;
    e.sigma = std::sqrt(table.sigma2_avg);
    e.kappa_avg.assign(static_cast<std::size_t>(order) + 3, 0.0);
    for (int m = 2; m <= order + 2; ++m) {
        double acc = 0.0;
        for (const auto& s : table.site) acc += s.cumulant[static_cast<std::size_t>(m)];
        e.kappa_avg[static_cast<std::size_t>(m)] = acc / sites;
    }
    return e;
}

SumDistribution sum_distribution(const RateFamily& rf, int sites, double phi, double eps_trunc) {
    SumDistribution out;
    out.sites = sites;
    out.phi = phi;
    out.pmf = sum_pmf(rf, sites, phi, eps_trunc);
    out.tail_bound = eps_trunc * sites;
    return out;
}

LltPointResult llt_normal(const RateFamily& rf, int sites, long r, int order) {
    RateFamily view = cycle_to_sites(rf, sites);
    double phi = phi_of_rho(view, static_cast<double>(r) / sites);
    EdgeworthExpansion e = edgeworth_expansion(view, sites, phi, order);
    SumDistribution exact = sum_distribution(view, sites, phi);
    double scale = e.sigma * std::sqrt(static_cast<double>(sites));
    LltPointResult out;
    out.z = (static_cast<double>(r) - static_cast<double>(sites) * e.rho) / scale;
    out.approx = e.series(out.z) / scale;
    out.exact = exact.at(r);
    out.abs_err = std::abs(out.approx - out.exact);
    return out;
}

double llt_normal_sup_error(const RateFamily& rf, int sites, double phi, int order, double z_max) {
    RateFamily view = cycle_to_sites(rf, sites);
    EdgeworthExpansion e = edgeworth_expansion(view, sites, phi, order);
    SumDistribution exact = sum_distribution(view, sites, phi);
    double scale = e.sigma * std::sqrt(static_cast<double>(sites));
    double mean = static_cast<double>(sites) * e.rho;
    long lo = std::max<long>(0, static_cast<long>(std::floor(mean - z_max * scale)));
    long hi = static_cast<long>(std::ceil(mean + z_max * scale));
    double worst = 0.0;
    for (long k = lo; k <= hi; ++k) {
        double z = (static_cast<double>(k) - mean) / scale;
        double err = std::abs(scale * exact.at(k) - e.series(z));
        worst = std::max(worst, err);
    }
    return worst;
}

LltPointResult llt_poisson(const RateFamily& rf, int sites, long r, long k) {
    RateFamily view = cycle_to_sites(rf, sites);
    double phi = phi_of_rho(view, static_cast<double>(r) / sites);
    SumDistribution exact = sum_distribution(view, sites, phi);
    LltPointResult out;
    double lr = static_cast<double>(r);
    out.approx = std::exp(static_cast<double>(k) * std::log(lr) - lr -
                          std::lgamma(static_cast<double>(k) + 1.0));
    out.exact = exact.at(k);
    out.abs_err = std::abs(out.approx - out.exact);
    return out;
}

double llt_poisson_sup_error(const RateFamily& rf, int sites, long r) {
    RateFamily view = cycle_to_sites(rf, sites);
    double phi = phi_of_rho(view, static_cast<double>(r) / sites);
    SumDistribution exact = sum_distribution(view, sites, phi);
    double lr = static_cast<double>(r);
    double worst = 0.0;
    long k_hi = std::max<long>(static_cast<long>(exact.pmf.size()) - 1, 8 * r + 20);
    for (long k = 0; k <= k_hi; ++k) {
        double pois = std::exp(static_cast<double>(k) * std::log(lr) - lr -
                               std::lgamma(static_cast<double>(k) + 1.0));
        worst = std::max(worst, std::abs(pois - exact.at(k)));
    }
    return worst;
}

CharFnScan charfn_scan(const RateFamily& rf, int x, double phi, const std::vector<double>& t_grid,
                       double delta) {
    auto mg = marginal(rf, x, phi);
    double rho = mg.mean();
    double sigma = std::sqrt(mg.variance());
    CharFnScan out;
    out.t = t_grid;
    out.modulus.resize(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < mg.pmf.size(); ++k) {
            double angle = t_grid[i] * (static_cast<double>(k) - rho) / sigma;
            acc += mg.pmf[k] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out.modulus[i] = std::abs(acc);
        if (std::abs(t_grid[i]) >= delta)
            out.max_beyond_delta = std::max(out.max_beyond_delta, out.modulus[i]);
    }
    return out;
}

ConditionEScan condition_e_scan(const RateFamily& rf, const std::vector<int>& sizes, long r_max) {
    ConditionEScan out;
    out.inf = std::numeric_limits<double>::infinity();
    out.sup = 0.0;
    for (int n : sizes)
        for (long r = 1; r <= r_max; ++r) {
            double s = condition_e_statistic(rf, n, r);
            out.samples.emplace_back(n, r, s);
            out.inf = std::min(out.inf, s);
            out.sup = std::max(out.sup, s);
        }
    return out;
}

}  // namespace zrp
