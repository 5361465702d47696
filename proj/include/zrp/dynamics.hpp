#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "zrp/common.hpp"
#include "zrp/ensemble.hpp"
#include "zrp/generator.hpp"

namespace zrp {

// Two-colour occupation state; the colour-blind projection eta1 + eta2 is an
// ordinary configuration.
struct ColourState {
    Configuration eta1;
    Configuration eta2;
};

struct Trajectory {
    std::uint64_t seed = 0;
    double horizon = 0.0;
    long events = 0;
    std::vector<double> sample_times;
    std::vector<Configuration> samples;          // colour-blind occupation
    std::vector<ColourState> colour_samples;     // filled for two-colour runs
};

enum class SimTopology { nearest_neighbour, complete, two_colour };

struct SimOptions {
    double horizon = 10.0;
    double sample_dt = 0.1;
    std::uint64_t seed = 1;
};

// Event-driven continuous-time path. Nearest-neighbour moves fire at rate
// c_x(eta_x)/2 per ordered adjacent pair; complete-graph moves at c_x(eta_x)
// per ordered pair; the two-colour dynamics splits c into the colour rates.
// Deterministic in the seed.
Trajectory simulate(const RateFamily& rf, const Lattice& lattice, const Configuration& initial,
                    SimTopology topology, const SimOptions& opts);

Trajectory simulate_two_colour(const RateFamily& hom, const Lattice& lattice, const ColourState& initial,
                               const SimOptions& opts);

// Multinomial placement of r particles (used for default initial states).
Configuration random_initial(int sites, long r, std::uint64_t seed);

// First jump out of a configuration: holding time and the move taken.
struct JumpSample {
    double time = 0.0;
    int from = -1;
    int to = -1;
};
JumpSample first_jump(const RateFamily& rf, const Lattice& lattice, const Configuration& eta,
                      SimTopology topology, std::uint64_t seed);

// Exact nu-distributed draw on an enumerable canonical space.
Configuration sample_stationary(const CanonicalEnsemble& ens, Rng& rng);

struct DecayEstimate {
    double lambda_hat = 0.0;  // fitted decay rate of Var[P_t f]
    double stderr_hat = 0.0;
    std::vector<double> times;
    std::vector<double> variances;
};

struct DecayOptions {
    int replicas = 400;      // outer nu-distributed starting points
    int inner = 48;          // trajectories per starting point
    double horizon = 2.0;
    double sample_dt = 0.0;  // <= 0: gap-adaptive, 0.1 / gap estimate
    std::uint64_t seed = 7;
};

// Estimates the exponential decay rate of Var_nu[P_t f] from replicated
// simulation: P_t f per starting state by inner averaging, variance across
// nu-distributed starts, slope of the log-variance.
DecayEstimate estimate_decay(const CanonicalEnsemble& ens,
                             const std::function<double(const Configuration&)>& observable,
                             const DecayOptions& opts);

// Generator of the two-colour process on the enumerable space of colour pairs
// with fixed per-colour totals (r1, r2), plus the colour-blind projection
// check against the ordinary generator.
struct ColourGeneratorCheck {
    double max_entry_error = 0.0;  // |L_colour (f o proj) - (L f) o proj|
    std::size_t colour_states = 0;
};
ColourGeneratorCheck colour_projection_check(const RateFamily& hom, const Lattice& lattice, long r1,
                                             long r2);

struct CouplingResult {
    bool order_preserved = true;
    std::optional<double> violation_time;
    long events = 0;
    double eta_mean_occupation = 0.0;  // time-averaged occupation of site 0, eta component
};

// Order-preserving coupled complete-graph dynamics for (eta, xi) with
// eta(0) <= xi(0): equal-occupancy sites jump jointly, matched jumps pair the
// common rate mass, and order-breaking lone eta jumps are compensated by a
// surplus xi particle moved to the same target. Marginals stay exact.
CouplingResult coupled_order_sim(const RateFamily& rf, const Lattice& lattice,
                                 const Configuration& eta0, const Configuration& xi0, long max_events,
                                 std::uint64_t seed);

}  // namespace zrp
