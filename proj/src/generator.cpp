#include "zrp/generator.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "zrp/common.hpp"

namespace zrp {

Topology topology_from_string(const std::string& s) {
    if (s == "nn" || s == "nearest-neighbour" || s == "nearest_neighbour") return Topology::nearest_neighbour;
    if (s == "complete") return Topology::complete;
    throw ConfigError("unknown topology: " + s);
}

std::string to_string(Topology t) {
    return t == Topology::nearest_neighbour ? "nearest-neighbour" : "complete";
}

GeneratorMatrix build_generator(std::shared_ptr<const CanonicalEnsemble> ens, Topology topology) {
    const auto& e = *ens;
    const int n = e.sites();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(e.size(), 0.0);

    auto add_move = [&](std::size_t i, int x, int y, double rate) {
        if (rate <= 0.0) return;
        std::size_t j = e.move_index(i, x, y);
        trip.emplace_back(static_cast<int>(i), static_cast<int>(j), rate);
        diag[i] += rate;
    };

    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& eta = e.states[i];
        for (int x = 0; x < n; ++x) {
            if (eta[static_cast<std::size_t>(x)] == 0) continue;
            double cx = e.rf.rate(x, eta[static_cast<std::size_t>(x)]);
            if (topology == Topology::nearest_neighbour) {
                for (int y : e.lattice.neighbors[static_cast<std::size_t>(x)])
                    add_move(i, x, y, 0.5 * cx);
            } else {
                for (int y = 0; y < n; ++y)
                    if (y != x) add_move(i, x, y, cx);
            }
        }
    }
    for (std::size_t i = 0; i < e.size(); ++i)
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -diag[i]);

    GeneratorMatrix gen;
    gen.ensemble = std::move(ens);
    gen.topology = topology;
    gen.L.resize(static_cast<long>(e.size()), static_cast<long>(e.size()));
    gen.L.setFromTriplets(trip.begin(), trip.end());
    gen.L.makeCompressed();
    if (e.size() > 1 && !is_irreducible(gen))
        throw NumericError("build_generator: NotIrreducible");
    return gen;
}

GeneratorMatrix tridiagonal_generator(std::span<const double> birth, std::span<const double> death,
                                      std::span<const double> stationary) {
    const std::size_t n = stationary.size();
    if (birth.size() + 1 != n || death.size() + 1 != n)
        throw ConfigError("tridiagonal_generator: need n-1 birth and death rates for n states");

    // Wrap the chain in a one-site pseudo ensemble so the spectral code can
    // treat it like any other generator.
    auto ens = std::make_shared<CanonicalEnsemble>(CanonicalEnsemble{
        Lattice::segment(1), preset_rates("linear", 1), static_cast<long>(n) - 1, {}, {}, {}});
    ens->states.resize(n);
    ens->nu.assign(stationary.begin(), stationary.end());
    ens->log_weight.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        ens->states[k] = {static_cast<int>(k)};
        ens->log_weight[k] = std::log(std::max(stationary[k], 1e-300));
    }

    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < n; ++k) {
        double out = 0.0;
        if (k + 1 < n && birth[k] > 0.0) {
            trip.emplace_back(static_cast<int>(k), static_cast<int>(k + 1), birth[k]);
            out += birth[k];
        }
        if (k > 0 && death[k - 1] > 0.0) {
            trip.emplace_back(static_cast<int>(k), static_cast<int>(k - 1), death[k - 1]);
            out += death[k - 1];
        }
        trip.emplace_back(static_cast<int>(k), static_cast<int>(k), -out);
    }
    GeneratorMatrix gen;
    gen.ensemble = std::move(ens);
    gen.topology = Topology::nearest_neighbour;
    gen.L.resize(static_cast<long>(n), static_cast<long>(n));
    gen.L.setFromTriplets(trip.begin(), trip.end());
    gen.L.makeCompressed();
    return gen;
}

double dirichlet_form(const GeneratorMatrix& gen, std::span<const double> f) {
    // nu[f(-L)f] = 1/2 sum_ij nu_i L_ij (f_i - f_j)^2 for reversible L
    const auto& nu = gen.nu();
    double acc = 0.0;
    for (int i = 0; i < gen.L.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.L, i); it; ++it) {
            if (it.col() == it.row()) continue;
            acc += 0.5 * nu[static_cast<std::size_t>(it.row())] * it.value() *
                   sq(f[static_cast<std::size_t>(it.row())] - f[static_cast<std::size_t>(it.col())]);
        }
    return acc;
}

double entropy_production(const GeneratorMatrix& gen, std::span<const double> f) {
    const auto& nu = gen.nu();
    double acc = 0.0;
    for (int i = 0; i < gen.L.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.L, i); it; ++it) {
            if (it.col() == it.row()) continue;
            double fi = f[static_cast<std::size_t>(it.row())];
            double fj = f[static_cast<std::size_t>(it.col())];
            if (!(fi > 0.0) || !(fj > 0.0))
                throw NumericError("entropy_production: NegativeDensity");
            acc += 0.5 * nu[static_cast<std::size_t>(it.row())] * it.value() * (fi - fj) *
                   (std::log(fi) - std::log(fj));
        }
    return acc;
}

double entropy(std::span<const double> nu, std::span<const double> f) {
    double mean = 0.0, flogf = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (f[i] < 0.0) throw NumericError("entropy: NegativeDensity");
        mean += nu[i] * f[i];
        if (f[i] > 0.0) flogf += nu[i] * f[i] * std::log(f[i]);
    }
    return flogf - (mean > 0.0 ? mean * std::log(mean) : 0.0);
}

double variance(std::span<const double> nu, std::span<const double> f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) mean += nu[i] * f[i];
    double acc = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) acc += nu[i] * sq(f[i] - mean);
    return acc;
}

Functionals functionals(const GeneratorMatrix& gen, std::span<const double> f) {
    const auto& nu = gen.nu();
    Functionals out;
    for (std::size_t i = 0; i < nu.size(); ++i) out.mean += nu[i] * f[i];
    out.variance = variance(nu, f);
    out.entropy = entropy(nu, f);
    out.dirichlet = dirichlet_form(gen, f);
    std::vector<double> root(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < 0.0) throw NumericError("functionals: NegativeDensity for sqrt");
        root[i] = std::sqrt(f[i]);
    }
    out.dirichlet_sqrt = dirichlet_form(gen, root);
    return out;
}

double stationarity_defect(const GeneratorMatrix& gen) {
    const auto& nu = gen.nu();
    std::vector<double> col(nu.size(), 0.0);
    for (int i = 0; i < gen.L.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.L, i); it; ++it)
            col[static_cast<std::size_t>(it.col())] += nu[static_cast<std::size_t>(it.row())] * it.value();
    double worst = 0.0;
    for (double v : col) worst = std::max(worst, std::abs(v));
    return worst;
}

double reversibility_defect(const GeneratorMatrix& gen) {
    const auto& nu = gen.nu();
    double worst = 0.0;
    for (int i = 0; i < gen.L.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.L, i); it; ++it) {
            if (it.row() == it.col()) continue;
            double forward = nu[static_cast<std::size_t>(it.row())] * it.value();
            double backward = nu[static_cast<std::size_t>(it.col())] * gen.L.coeff(it.col(), it.row());
            worst = std::max(worst, std::abs(forward - backward));
        }
    return worst;
}

bool is_irreducible(const GeneratorMatrix& gen) {
    const std::size_t n = gen.size();
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t visited = 1;
    while (!frontier.empty()) {
        std::size_t i = frontier.front();
        frontier.pop();
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.L, static_cast<int>(i)); it; ++it) {
            std::size_t j = static_cast<std::size_t>(it.col());
            if (j == i || it.value() <= 0.0 || seen[j]) continue;
            seen[j] = 1;
            ++visited;
            frontier.push(j);
        }
    }
    return visited == n;
}

}  // namespace zrp
