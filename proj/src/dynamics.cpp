#include "zrp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "zrp/common.hpp"
#include "zrp/spectral.hpp"

namespace zrp {

namespace {

struct Move {
    int from = 0;
    int to = 0;
    int colour = 0;  // 0 for colour-blind moves
    double rate = 0.0;
};

// one Gillespie step over an explicit move list; returns the chosen index
std::size_t pick_move(const std::vector<Move>& moves, double total, Rng& rng) {
    double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        acc += moves[i].rate;
        if (u <= acc) return i;
    }
    return moves.size() - 1;
}

void record_samples(Trajectory& traj, double& next_sample, double until, const Configuration& eta,
                    const ColourState* colour, double sample_dt) {
    while (next_sample <= until && next_sample <= traj.horizon + 1e-12) {
        traj.sample_times.push_back(next_sample);
        traj.samples.push_back(eta);
        if (colour) traj.colour_samples.push_back(*colour);
        next_sample += sample_dt;
    }
}

}  // namespace

Configuration random_initial(int sites, long r, std::uint64_t seed) {
    Rng rng(seed);
    Configuration eta(static_cast<std::size_t>(sites), 0);
    for (long i = 0; i < r; ++i) eta[rng.index(static_cast<std::size_t>(sites))] += 1;
    return eta;
}

Configuration sample_stationary(const CanonicalEnsemble& ens, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        acc += ens.nu[i];
        if (u <= acc) return ens.states[i];
    }
    return ens.states.back();
}

JumpSample first_jump(const RateFamily& rf, const Lattice& lattice, const Configuration& eta,
                      SimTopology topology, std::uint64_t seed) {
    if (topology == SimTopology::two_colour)
        throw ConfigError("first_jump: colour-blind topologies only");
    Rng rng(seed);
    std::vector<Move> moves;
    double total = 0.0;
    const int n = lattice.size();
    for (int x = 0; x < n; ++x) {
        if (eta[static_cast<std::size_t>(x)] == 0) continue;
        double cx = rf.rate(x, eta[static_cast<std::size_t>(x)]);
        if (topology == SimTopology::nearest_neighbour) {
            for (int y : lattice.neighbors[static_cast<std::size_t>(x)]) {
                moves.push_back({x, y, 0, 0.5 * cx});
                total += 0.5 * cx;
            }
        } else {
            for (int y = 0; y < n; ++y)
                if (y != x) {
                    moves.push_back({x, y, 0, cx});
                    total += cx;
                }
        }
    }
    JumpSample out;
    if (total <= 0.0) return out;
    out.time = rng.exponential(total);
    const Move& m = moves[pick_move(moves, total, rng)];
    out.from = m.from;
    out.to = m.to;
    return out;
}

Trajectory simulate(const RateFamily& rf, const Lattice& lattice, const Configuration& initial,
                    SimTopology topology, const SimOptions& opts) {
    if (topology == SimTopology::two_colour)
        throw ConfigError("simulate: use simulate_two_colour for the colour dynamics");
    if (static_cast<int>(initial.size()) != lattice.size())
        throw ConfigError("simulate: InvalidInitial (size mismatch)");
    for (int k : initial)
        if (k < 0) throw ConfigError("simulate: InvalidInitial (negative occupation)");

    Trajectory traj;
    traj.seed = opts.seed;
    traj.horizon = opts.horizon;
    Rng rng(opts.seed);
    Configuration eta = initial;
    const int n = lattice.size();

    double t = 0.0;
    double next_sample = 0.0;
    std::vector<Move> moves;
    for (;;) {
        moves.clear();
        double total = 0.0;
        for (int x = 0; x < n; ++x) {
            if (eta[static_cast<std::size_t>(x)] == 0) continue;
            double cx = rf.rate(x, eta[static_cast<std::size_t>(x)]);
            if (topology == SimTopology::nearest_neighbour) {
                for (int y : lattice.neighbors[static_cast<std::size_t>(x)]) {
                    moves.push_back({x, y, 0, 0.5 * cx});
                    total += 0.5 * cx;
                }
            } else {
                for (int y = 0; y < n; ++y)
                    if (y != x) {
                        moves.push_back({x, y, 0, cx});
                        total += cx;
                    }
            }
        }
        if (total <= 0.0) {
            record_samples(traj, next_sample, opts.horizon, eta, nullptr, opts.sample_dt);
            break;
        }
        double dt = rng.exponential(total);
        record_samples(traj, next_sample, std::min(t + dt, opts.horizon), eta, nullptr, opts.sample_dt);
        t += dt;
        if (t > opts.horizon) break;
        const Move& m = moves[pick_move(moves, total, rng)];
        eta[static_cast<std::size_t>(m.from)] -= 1;
        eta[static_cast<std::size_t>(m.to)] += 1;
        ++traj.events;
    }
    return traj;
}

Trajectory simulate_two_colour(const RateFamily& hom, const Lattice& lattice, const ColourState& initial,
                               const SimOptions& opts) {
    if (static_cast<int>(initial.eta1.size()) != lattice.size() ||
        static_cast<int>(initial.eta2.size()) != lattice.size())
        throw ConfigError("simulate_two_colour: InvalidInitial (size mismatch)");

    Trajectory traj;
    traj.seed = opts.seed;
    traj.horizon = opts.horizon;
    Rng rng(opts.seed);
    ColourState state = initial;
    const int n = lattice.size();

    double t = 0.0;
    double next_sample = 0.0;
    std::vector<Move> moves;
    Configuration blind(static_cast<std::size_t>(n));
    for (;;) {
        moves.clear();
        double total = 0.0;
        for (int x = 0; x < n; ++x) {
            long k1 = state.eta1[static_cast<std::size_t>(x)];
            long k2 = state.eta2[static_cast<std::size_t>(x)];
            if (k1 + k2 == 0) continue;
            auto [c1, c2] = colour_rates(hom, k1, k2);
            for (int y : lattice.neighbors[static_cast<std::size_t>(x)]) {
                if (c1 > 0.0) {
                    moves.push_back({x, y, 1, 0.5 * c1});
                    total += 0.5 * c1;
                }
                if (c2 > 0.0) {
                    moves.push_back({x, y, 2, 0.5 * c2});
                    total += 0.5 * c2;
                }
            }
        }
        for (int x = 0; x < n; ++x)
            blind[static_cast<std::size_t>(x)] =
                state.eta1[static_cast<std::size_t>(x)] + state.eta2[static_cast<std::size_t>(x)];
        if (total <= 0.0) {
            record_samples(traj, next_sample, opts.horizon, blind, &state, opts.sample_dt);
            break;
        }
        double dt = rng.exponential(total);
        record_samples(traj, next_sample, std::min(t + dt, opts.horizon), blind, &state, opts.sample_dt);
        t += dt;
        if (t > opts.horizon) break;
        const Move& m = moves[pick_move(moves, total, rng)];
        Configuration& eta = m.colour == 1 ? state.eta1 : state.eta2;
        eta[static_cast<std::size_t>(m.from)] -= 1;
        eta[static_cast<std::size_t>(m.to)] += 1;
        ++traj.events;
    }
    return traj;
}

DecayEstimate estimate_decay(const CanonicalEnsemble& ens,
                             const std::function<double(const Configuration&)>& observable,
                             const DecayOptions& raw_opts) {
    if (raw_opts.replicas < 100) throw ConfigError("estimate_decay: need at least 100 replicas");
    DecayOptions opts = raw_opts;
    if (opts.sample_dt <= 0.0) {
        auto gen = build_generator(std::make_shared<CanonicalEnsemble>(ens), Topology::nearest_neighbour);
        opts.sample_dt = 0.1 / spectral_gap(gen).gap;
    }
    const std::size_t steps = static_cast<std::size_t>(std::floor(opts.horizon / opts.sample_dt)) + 1;

    // P_t f per starting state by inner averaging; variance across nu starts
    std::vector<std::vector<double>> inner_mean(static_cast<std::size_t>(opts.replicas),
                                                std::vector<double>(steps, 0.0));
    std::vector<std::vector<double>> inner_var(static_cast<std::size_t>(opts.replicas),
                                               std::vector<double>(steps, 0.0));

    SimOptions sim;
    sim.horizon = opts.horizon;
    sim.sample_dt = opts.sample_dt;

    parallel_for(static_cast<std::size_t>(opts.replicas), [&](std::size_t i) {
        Rng draw(derive_seed(opts.seed, 1000000 + i));
        Configuration start = sample_stationary(ens, draw);
        std::vector<double> acc(steps, 0.0), acc2(steps, 0.0);
        for (int j = 0; j < opts.inner; ++j) {
            SimOptions s = sim;
            s.seed = derive_seed(opts.seed, i * static_cast<std::size_t>(opts.inner) + static_cast<std::size_t>(j));
            Trajectory traj = simulate(ens.rf, ens.lattice, start, SimTopology::nearest_neighbour, s);
            for (std::size_t k = 0; k < steps && k < traj.samples.size(); ++k) {
                double v = observable(traj.samples[k]);
                acc[k] += v;
                acc2[k] += v * v;
            }
        }
        for (std::size_t k = 0; k < steps; ++k) {
            double mean = acc[k] / opts.inner;
            inner_mean[i][k] = mean;
            inner_var[i][k] = std::max(0.0, acc2[k] / opts.inner - mean * mean) *
                              static_cast<double>(opts.inner) / std::max(1, opts.inner - 1);
        }
    });

    DecayEstimate out;
    std::vector<double> logv, times;
    double v0 = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        double mean = 0.0, m2 = 0.0, bias = 0.0;
        for (int i = 0; i < opts.replicas; ++i) {
            mean += inner_mean[static_cast<std::size_t>(i)][k];
            bias += inner_var[static_cast<std::size_t>(i)][k];
        }
        mean /= opts.replicas;
        bias /= opts.replicas;
        for (int i = 0; i < opts.replicas; ++i) m2 += sq(inner_mean[static_cast<std::size_t>(i)][k] - mean);
        m2 /= std::max(1, opts.replicas - 1);
        double debiased = m2 - bias / opts.inner;
        double t = static_cast<double>(k) * opts.sample_dt;
        out.times.push_back(t);
        out.variances.push_back(debiased);
        if (k == 0) v0 = debiased;
    }
    if (!(v0 > 0.0)) throw NumericError("estimate_decay: InsufficientSignal (flat observable)");

    for (std::size_t k = 0; k < steps; ++k) {
        if (out.variances[k] <= v0 * std::exp(-4.0) || out.variances[k] <= 0.0) break;
        times.push_back(out.times[k]);
        logv.push_back(std::log(out.variances[k]));
    }
    if (times.size() < 4)
        throw NumericError("estimate_decay: InsufficientSignal (variance hit the noise floor early)");
    out.lambda_hat = -fit_slope(times, logv);

    // residual-based slope error
    double slope = -out.lambda_hat;
    double tbar = 0.0, lbar = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        tbar += times[k];
        lbar += logv[k];
    }
    tbar /= static_cast<double>(times.size());
    lbar /= static_cast<double>(times.size());
    double sse = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double pred = lbar + slope * (times[k] - tbar);
        sse += sq(logv[k] - pred);
        sxx += sq(times[k] - tbar);
    }
    if (times.size() > 2 && sxx > 0.0)
        out.stderr_hat = std::sqrt(sse / (static_cast<double>(times.size()) - 2.0) / sxx);
    return out;
}

ColourGeneratorCheck colour_projection_check(const RateFamily& hom, const Lattice& lattice, long r1,
                                             long r2) {
    if (!hom.homogeneous()) throw ConfigError("colour_projection_check: base rate must be homogeneous");
    const int n = lattice.size();

    // enumerate pairs (eta1, eta2) with fixed per-colour totals
    auto blind = canonical(hom, lattice, r1 + r2);
    std::vector<ColourState> states;
    std::vector<Configuration> ones, twos;
    {
        auto e1 = canonical(hom, lattice, r1);
        auto e2 = canonical(hom, lattice, r2);
        for (const auto& a : e1.states)
            for (const auto& b : e2.states) states.push_back({a, b});
    }
    std::map<std::pair<Configuration, Configuration>, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i)
        index[{states[i].eta1, states[i].eta2}] = i;

    const std::size_t n_blind = blind.size();
    // rows: colour states; columns: blind states; M = L_colour summed over fibres
    std::vector<std::vector<double>> m(states.size(), std::vector<double>(n_blind, 0.0));
    for (std::size_t s = 0; s < states.size(); ++s) {
        Configuration proj(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x)
            proj[static_cast<std::size_t>(x)] = states[s].eta1[static_cast<std::size_t>(x)] +
                                                states[s].eta2[static_cast<std::size_t>(x)];
        std::size_t diag_col = blind.rank(proj);
        for (int x = 0; x < n; ++x) {
            long k1 = states[s].eta1[static_cast<std::size_t>(x)];
            long k2 = states[s].eta2[static_cast<std::size_t>(x)];
            if (k1 + k2 == 0) continue;
            auto [c1, c2] = colour_rates(hom, k1, k2);
            for (int y : lattice.neighbors[static_cast<std::size_t>(x)]) {
                Configuration target = proj;
                target[static_cast<std::size_t>(x)] -= 1;
                target[static_cast<std::size_t>(y)] += 1;
                std::size_t col = blind.rank(target);
                if (c1 > 0.0) {
                    m[s][col] += 0.5 * c1;
                    m[s][diag_col] -= 0.5 * c1;
                }
                if (c2 > 0.0) {
                    m[s][col] += 0.5 * c2;
                    m[s][diag_col] -= 0.5 * c2;
                }
            }
        }
    }

    GeneratorMatrix gen = build_generator(std::make_shared<CanonicalEnsemble>(blind),
                                          Topology::nearest_neighbour);
    ColourGeneratorCheck out;
    out.colour_states = states.size();
    for (std::size_t s = 0; s < states.size(); ++s) {
        Configuration proj(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x)
            proj[static_cast<std::size_t>(x)] = states[s].eta1[static_cast<std::size_t>(x)] +
                                                states[s].eta2[static_cast<std::size_t>(x)];
        long row = static_cast<long>(blind.rank(proj));
        for (std::size_t col = 0; col < n_blind; ++col) {
            double expected = gen.L.coeff(row, static_cast<long>(col));
            out.max_entry_error = std::max(out.max_entry_error, std::abs(m[s][col] - expected));
        }
    }
    return out;
}

CouplingResult coupled_order_sim(const RateFamily& rf, const Lattice& lattice, const Configuration& eta0,
                                 const Configuration& xi0, long max_events, std::uint64_t seed) {
    const int n = lattice.size();
    if (static_cast<int>(eta0.size()) != n || static_cast<int>(xi0.size()) != n)
        throw ConfigError("coupled_order_sim: InvalidInitial (size mismatch)");
    for (int x = 0; x < n; ++x)
        if (eta0[static_cast<std::size_t>(x)] > xi0[static_cast<std::size_t>(x)])
            throw ConfigError("coupled_order_sim: initial pair is not ordered");

    Configuration eta = eta0, xi = xi0;
    Rng rng(seed);
    CouplingResult out;
    double t = 0.0;
    double occupation_weighted = 0.0;

    enum class Kind { joint, eta_alone, xi_alone };
    struct Event {
        Kind kind;
        int from, to;
        double rate;
    };
    std::vector<Event> events;
    std::vector<double> b_to(static_cast<std::size_t>(n));   // C_y
    std::vector<double> p_to(static_cast<std::size_t>(n));   // breaking eta-alone rate into y

    for (long step = 0; step < max_events; ++step) {
        events.clear();
        std::fill(b_to.begin(), b_to.end(), 0.0);
        std::fill(p_to.begin(), p_to.end(), 0.0);
        double total = 0.0;

        for (int x = 0; x < n; ++x) {
            double ce = eta[static_cast<std::size_t>(x)] > 0 ? rf.rate(x, eta[static_cast<std::size_t>(x)]) : 0.0;
            double cx = xi[static_cast<std::size_t>(x)] > 0 ? rf.rate(x, xi[static_cast<std::size_t>(x)]) : 0.0;
            double joint = std::min(ce, cx);
            double alone_eta = ce - joint;
            double alone_xi = cx - joint;
            for (int y = 0; y < n; ++y) {
                if (y == x) continue;
                if (joint > 0.0) events.push_back({Kind::joint, x, y, joint});
                if (alone_eta > 0.0) {
                    events.push_back({Kind::eta_alone, x, y, alone_eta});
                    if (eta[static_cast<std::size_t>(y)] == xi[static_cast<std::size_t>(y)])
                        p_to[static_cast<std::size_t>(y)] += alone_eta;
                }
                if (alone_xi > 0.0) b_to[static_cast<std::size_t>(y)] += alone_xi;
            }
        }
        for (const auto& e : events) total += e.rate;
        // standalone xi-alone mass: whatever the compensation does not consume
        std::vector<double> standalone(static_cast<std::size_t>(n), 0.0);
        for (int y = 0; y < n; ++y) {
            double used = std::min(p_to[static_cast<std::size_t>(y)], b_to[static_cast<std::size_t>(y)]);
            standalone[static_cast<std::size_t>(y)] = b_to[static_cast<std::size_t>(y)] - used;
            total += standalone[static_cast<std::size_t>(y)];
        }
        if (total <= 0.0) break;

        double dt = rng.exponential(total);
        occupation_weighted += eta[0] * dt;
        t += dt;

        // choose an event
        double u = rng.uniform() * total;
        double acc = 0.0;
        const Event* chosen = nullptr;
        int standalone_target = -1;
        for (const auto& e : events) {
            acc += e.rate;
            if (u <= acc) {
                chosen = &e;
                break;
            }
        }
        if (!chosen) {
            for (int y = 0; y < n && standalone_target < 0; ++y) {
                acc += standalone[static_cast<std::size_t>(y)];
                if (u <= acc) standalone_target = y;
            }
            if (standalone_target < 0) standalone_target = n - 1;
        }

        auto move_xi_from = [&](int y) {
            // surplus donor z chosen proportionally to the xi-alone rate into y
            double pick = rng.uniform() * b_to[static_cast<std::size_t>(y)];
            double run = 0.0;
            for (int z = 0; z < n; ++z) {
                if (z == y) continue;
                double ce = eta[static_cast<std::size_t>(z)] > 0 ? rf.rate(z, eta[static_cast<std::size_t>(z)]) : 0.0;
                double cz = xi[static_cast<std::size_t>(z)] > 0 ? rf.rate(z, xi[static_cast<std::size_t>(z)]) : 0.0;
                double alone = std::max(0.0, cz - std::min(ce, cz));
                run += alone;
                if (pick <= run && alone > 0.0) {
                    xi[static_cast<std::size_t>(z)] -= 1;
                    xi[static_cast<std::size_t>(y)] += 1;
                    return;
                }
            }
        };

        if (chosen) {
            if (chosen->kind == Kind::joint) {
                eta[static_cast<std::size_t>(chosen->from)] -= 1;
                eta[static_cast<std::size_t>(chosen->to)] += 1;
                xi[static_cast<std::size_t>(chosen->from)] -= 1;
                xi[static_cast<std::size_t>(chosen->to)] += 1;
            } else if (chosen->kind == Kind::eta_alone) {
                int y = chosen->to;
                bool breaking = eta[static_cast<std::size_t>(y)] == xi[static_cast<std::size_t>(y)];
                eta[static_cast<std::size_t>(chosen->from)] -= 1;
                eta[static_cast<std::size_t>(y)] += 1;
                if (breaking && b_to[static_cast<std::size_t>(y)] > 0.0) {
                    double p_comp = std::min(1.0, b_to[static_cast<std::size_t>(y)] / p_to[static_cast<std::size_t>(y)]);
                    if (rng.uniform() <= p_comp) move_xi_from(y);
                }
            }
        } else {
            move_xi_from(standalone_target);
        }
        ++out.events;

        if (out.order_preserved) {
            for (int x = 0; x < n; ++x)
                if (eta[static_cast<std::size_t>(x)] > xi[static_cast<std::size_t>(x)]) {
                    out.order_preserved = false;
                    out.violation_time = t;
                    break;
                }
        }
    }
    out.eta_mean_occupation = t > 0.0 ? occupation_weighted / t : static_cast<double>(eta0[0]);
    return out;
}

}  // namespace zrp
