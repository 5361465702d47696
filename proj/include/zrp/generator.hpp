#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <span>

#include "zrp/ensemble.hpp"

namespace zrp {

enum class Topology { nearest_neighbour, complete };

Topology topology_from_string(const std::string& s);
std::string to_string(Topology t);

// Reversible generator L on the canonical state space. Off-diagonal entry
// eta -> eta^{x,y} is c_x(eta_x)/2 per ordered adjacent pair (nearest
// neighbour) or c_x(eta_x) per ordered pair x != y (complete graph);
// diagonal entries make rows sum to zero.
struct GeneratorMatrix {
    std::shared_ptr<const CanonicalEnsemble> ensemble;
    Topology topology = Topology::nearest_neighbour;
    Eigen::SparseMatrix<double, Eigen::RowMajor> L;

    std::size_t size() const { return ensemble->size(); }
    const std::vector<double>& nu() const { return ensemble->nu; }
};

GeneratorMatrix build_generator(std::shared_ptr<const CanonicalEnsemble> ens, Topology topology);

inline GeneratorMatrix build_generator(const CanonicalEnsemble& ens, Topology topology) {
    return build_generator(std::make_shared<CanonicalEnsemble>(ens), topology);
}

// A birth-death chain packaged as a generator (used by the bdchain module so
// gaps and log-Sobolev constants come from one code path).
GeneratorMatrix tridiagonal_generator(std::span<const double> birth, std::span<const double> death,
                                      std::span<const double> stationary);

struct Functionals {
    double mean = 0.0;
    double variance = 0.0;
    double entropy = 0.0;        // H(f) = nu[f log f] - nu[f] log nu[f]
    double dirichlet = 0.0;      // D(f)
    double dirichlet_sqrt = 0.0; // D(sqrt f); NaN when f has negative entries
};

Functionals functionals(const GeneratorMatrix& gen, std::span<const double> f);

// D(f) = nu[f (-L) f] evaluated edge-wise.
double dirichlet_form(const GeneratorMatrix& gen, std::span<const double> f);

// nu[f (-L) log f] for positive f (entropy production of the density f).
double entropy_production(const GeneratorMatrix& gen, std::span<const double> f);

double entropy(std::span<const double> nu, std::span<const double> f);
double variance(std::span<const double> nu, std::span<const double> f);

// max_i |(nu^T L)_i|: stationarity defect.
double stationarity_defect(const GeneratorMatrix& gen);

// max over transitions of |nu_i L_ij - nu_j L_ji|: reversibility defect.
double reversibility_defect(const GeneratorMatrix& gen);

bool is_irreducible(const GeneratorMatrix& gen);

}  // namespace zrp
