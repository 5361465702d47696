#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zrp/generator.hpp"

namespace zrp {

struct GapResult {
    double gap = 0.0;
    double residual = 0.0;            // ||A v - gap v||_2 of the symmetrized operator
    std::vector<double> eigenvector;  // eigenvector of -L (original coordinates)
    bool dense = true;
};

// Smallest nonzero eigenvalue of -L via the nu-symmetrized operator
// D^{1/2}(-L)D^{-1/2}. Dense solve up to `dense_cutoff` states, shift-invert
// Lanczos with the constant mode deflated beyond that.
GapResult spectral_gap(const GeneratorMatrix& gen, double residual_tol = 1e-9,
                       std::size_t dense_cutoff = 4000);

enum class ConstantKind { log_sobolev, entropy_dissipation };

struct EstimateOptions {
    int restarts = 32;
    int max_iters = 2000;
    double tol = 1e-10;
    std::uint64_t seed = 20240901;
    std::vector<std::vector<double>> seed_densities;  // extra starting points
};

struct EstimateResult {
    double value = 0.0;        // best ratio found: a certified lower bound
    int best_restart = -1;
    long evaluations = 0;
    std::vector<double> best_density;
};

// Maximizes H(f)/D(sqrt f) (log-Sobolev) or H(f)/nu[f(-L)log f] (entropy
// dissipation) over densities f > 0 with nu[f] = 1 by multiplicative mirror
// ascent from multiple deterministic starts (random Dirichlet draws, spiked
// states, and small perturbations along the spectral-gap eigenvector).
EstimateResult estimate_constant(const GeneratorMatrix& gen, ConstantKind kind,
                                 const EstimateOptions& opts = {});

struct SpectralReport {
    double gap = 0.0;
    double c_sg = 0.0;
    double c_ed_hat = 0.0;
    double c_ls_hat = 0.0;
    int restarts = 0;
    long evaluations = 0;
};

SpectralReport spectral_report(const GeneratorMatrix& gen, const EstimateOptions& opts = {});

struct RothausResult {
    double lhs = 0.0;  // H(f)
    double rhs = 0.0;  // H(ftilde) + 2 nu[sqrt f; sqrt f]
    bool holds = false;
};

// H(f|nu) <= H(ftilde|nu) + 2 nu[sqrt f; sqrt f], ftilde = (sqrt f - nu[sqrt f])^2.
RothausResult rothaus_check(std::span<const double> nu, std::span<const double> f, double slack = 1e-10);

enum class SweepKind { gap, log_sobolev };

struct SweepRow {
    int side = 0;
    long r = 0;
    double constant = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double slope = 0.0;  // of log(constant) against log(side)
};

// Computes C_SG = 1/gap (or the log-Sobolev estimate) on cubes of the given
// sides with r = r_rule(side), then fits log(constant) ~ log(side).
SweepResult scaling_sweep(const std::function<RateFamily(int)>& rates_for, int dim,
                          const std::vector<int>& sides, const std::function<long(int)>& r_rule,
                          SweepKind kind, const EstimateOptions& opts = {});

}  // namespace zrp
