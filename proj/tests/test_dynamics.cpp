#include <doctest.h>

#include <cmath>
#include <numeric>

#include "zrp/common.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/spectral.hpp"

using namespace zrp;

TEST_CASE("empty system stays flat") {
    auto lat = Lattice::segment(3);
    auto rf = preset_rates("linear", 3);
    SimOptions opts;
    opts.horizon = 5.0;
    auto traj = simulate(rf, lat, {0, 0, 0}, SimTopology::nearest_neighbour, opts);
    CHECK(traj.events == 0);
    for (const auto& eta : traj.samples) CHECK(total_count(eta) == 0);
}

TEST_CASE("trajectories are reproducible and conserve mass") {
    auto lat = Lattice::segment(3);
    auto rf = preset_rates("staircase", 3);
    SimOptions opts;
    opts.horizon = 20.0;
    opts.seed = 99;
    auto a = simulate(rf, lat, {2, 1, 0}, SimTopology::nearest_neighbour, opts);
    auto b = simulate(rf, lat, {2, 1, 0}, SimTopology::nearest_neighbour, opts);
    CHECK(a.events == b.events);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    for (const auto& eta : a.samples) CHECK(total_count(eta) == 3);

    opts.seed = 100;
    auto c = simulate(rf, lat, {2, 1, 0}, SimTopology::nearest_neighbour, opts);
    bool differs = (c.events != a.events) || (c.samples != a.samples);
    CHECK(differs);

    CHECK_THROWS_AS(simulate(rf, lat, {1, 1}, SimTopology::nearest_neighbour, opts), ConfigError);
}

TEST_CASE("single particle occupancy converges to the uniform law") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("linear", 2);
    SimOptions opts;
    opts.horizon = 4000.0;
    opts.sample_dt = 0.5;
    opts.seed = 2024;
    auto traj = simulate(rf, lat, {1, 0}, SimTopology::nearest_neighbour, opts);
    double mean = 0.0;
    for (const auto& eta : traj.samples) mean += eta[0];
    mean /= static_cast<double>(traj.samples.size());
    // autocorrelation time 1/gap = 1: about T/(2 tau) effective draws
    double stderr_est = std::sqrt(0.25 * 2.0 * 1.0 / opts.horizon);
    CHECK(std::abs(mean - 0.5) < 3.0 * stderr_est);
}

TEST_CASE("occupancy fractions match the canonical law") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("staircase", 2);
    auto ens = canonical(rf, lat, 2);
    SimOptions opts;
    opts.horizon = 3000.0;
    opts.sample_dt = 0.25;
    opts.seed = 5;
    auto traj = simulate(rf, lat, ens.states[0], SimTopology::nearest_neighbour, opts);
    std::vector<double> freq(ens.size(), 0.0);
    for (const auto& eta : traj.samples) freq[ens.rank(eta)] += 1.0;
    for (auto& v : freq) v /= static_cast<double>(traj.samples.size());
    for (std::size_t i = 0; i < ens.size(); ++i) {
        double se = std::sqrt(ens.nu[i] * (1 - ens.nu[i]) * 2.0 / opts.horizon);
        CHECK(std::abs(freq[i] - ens.nu[i]) < 4.0 * se + 1e-3);
    }
}

TEST_CASE("first-jump frequencies match the generator rates") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("staircase", 2);
    auto ens = canonical(rf, lat, 3);
    auto gen = build_generator(ens, Topology::nearest_neighbour);

    const int draws = 20000;
    for (std::size_t s = 0; s < ens.size(); ++s) {
        const auto& eta = ens.states[s];
        // expected distribution over destination states and the exit rate
        std::vector<double> expected(ens.size(), 0.0);
        double exit_rate = -gen.L.coeff(static_cast<long>(s), static_cast<long>(s));
        for (std::size_t j = 0; j < ens.size(); ++j)
            if (j != s) expected[j] = gen.L.coeff(static_cast<long>(s), static_cast<long>(j)) / exit_rate;

        std::vector<double> freq(ens.size(), 0.0);
        double hold = 0.0;
        for (int d = 0; d < draws; ++d) {
            auto jump = first_jump(rf, lat, eta, SimTopology::nearest_neighbour,
                                   derive_seed(5150, s * draws + static_cast<std::size_t>(d)));
            REQUIRE(jump.from >= 0);
            Configuration target = eta;
            target[static_cast<std::size_t>(jump.from)] -= 1;
            target[static_cast<std::size_t>(jump.to)] += 1;
            freq[ens.rank(target)] += 1.0;
            hold += jump.time;
        }
        for (auto& v : freq) v /= draws;
        hold /= draws;
        for (std::size_t j = 0; j < ens.size(); ++j) {
            if (j == s) continue;
            double se = std::sqrt(expected[j] * (1.0 - expected[j]) / draws);
            CHECK(std::abs(freq[j] - expected[j]) <= 3.0 * se + 1e-12);
        }
        double hold_se = (1.0 / exit_rate) / std::sqrt(static_cast<double>(draws));
        CHECK(std::abs(hold - 1.0 / exit_rate) <= 3.0 * hold_se);
    }
}

TEST_CASE("two-colour dynamics conserves per-colour counts") {
    auto lat = Lattice::segment(3);
    auto rf = preset_rates("linear", 3);
    SimOptions opts;
    opts.horizon = 10.0;
    opts.seed = 11;
    ColourState init{{1, 0, 1}, {0, 2, 0}};
    auto traj = simulate_two_colour(rf, lat, init, opts);
    CHECK(traj.events > 0);
    for (const auto& cs : traj.colour_samples) {
        CHECK(total_count(cs.eta1) == 2);
        CHECK(total_count(cs.eta2) == 2);
        for (std::size_t x = 0; x < cs.eta1.size(); ++x) {
            CHECK(cs.eta1[x] >= 0);
            CHECK(cs.eta2[x] >= 0);
        }
    }
}

TEST_CASE("colour-blind statistics match the plain process") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("staircase", 2);
    const int seeds = 400;
    const double horizon = 4.0;
    double blind_sum = 0.0, plain_sum = 0.0, blind_sq = 0.0, plain_sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SimOptions opts;
        opts.horizon = horizon;
        opts.sample_dt = 1.0;
        opts.seed = derive_seed(321, static_cast<std::uint64_t>(s));
        ColourState init{{1, 0}, {1, 1}};
        auto two = simulate_two_colour(rf, lat, init, opts);
        double v2 = two.samples.back()[0];
        blind_sum += v2;
        blind_sq += v2 * v2;

        opts.seed = derive_seed(654, static_cast<std::uint64_t>(s));
        auto one = simulate(rf, lat, {2, 1}, SimTopology::nearest_neighbour, opts);
        double v1 = one.samples.back()[0];
        plain_sum += v1;
        plain_sq += v1 * v1;
    }
    double mb = blind_sum / seeds, mp = plain_sum / seeds;
    double vb = blind_sq / seeds - mb * mb, vp = plain_sq / seeds - mp * mp;
    double se = std::sqrt((vb + vp) / seeds);
    CHECK(std::abs(mb - mp) < 3.0 * se + 1e-9);
}

TEST_CASE("colour generator projects onto the plain generator") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("staircase", 2);
    for (auto [r1, r2] : std::vector<std::pair<long, long>>{{1, 1}, {2, 1}, {1, 2}, {3, 0}}) {
        auto check = colour_projection_check(rf, lat, r1, r2);
        CHECK(check.max_entry_error <= 1e-12);
        CHECK(check.colour_states > 0);
    }
}

TEST_CASE("decay rate estimation") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("linear", 2);
    auto ens = canonical(rf, lat, 2);

    DecayOptions opts;
    opts.replicas = 300;
    opts.inner = 48;
    opts.horizon = 1.6;
    opts.sample_dt = 0.1;
    opts.seed = 17;
    auto est = estimate_decay(ens, [](const Configuration& eta) { return static_cast<double>(eta[0]); },
                              opts);
    // f = eta_0 is the gap eigenfunction: Var[P_t f] decays at exactly 2*gap = 2
    CHECK(est.lambda_hat == doctest::Approx(2.0).epsilon(0.15));

    CHECK_THROWS_WITH_AS(
        estimate_decay(ens, [](const Configuration&) { return 1.0; }, opts),
        doctest::Contains("InsufficientSignal"), NumericError);

    CHECK_THROWS_AS(estimate_decay(ens, [](const Configuration& eta) { return static_cast<double>(eta[0]); },
                                   DecayOptions{.replicas = 10}),
                    ConfigError);
}

TEST_CASE("monte carlo error shrinks with replica count") {
    auto lat = Lattice::segment(2);
    auto rf = preset_rates("linear", 2);
    auto ens = canonical(rf, lat, 2);
    auto observable = [](const Configuration& eta) { return static_cast<double>(eta[0]); };

    DecayOptions small;
    small.replicas = 150;
    small.inner = 16;
    small.horizon = 1.2;
    small.seed = 31;
    DecayOptions big = small;
    big.replicas = 600;
    auto e_small = estimate_decay(ens, observable, small);
    auto e_big = estimate_decay(ens, observable, big);
    CHECK(e_big.stderr_hat < e_small.stderr_hat);
}

TEST_CASE("ordered coupling on the complete graph") {
    auto lat = Lattice::segment(3);
    auto rf = preset_rates("staircase", 3);
    auto rep = verify_conditions(rf, 8);
    long m = static_cast<long>(std::ceil(rep.B * 3));

    Configuration eta0 = {2, 1, 0};
    Configuration xi0 = eta0;
    for (long extra = 0; extra < m; ++extra) xi0[static_cast<std::size_t>(extra % 3)] += 1;

    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto res = coupled_order_sim(rf, lat, eta0, xi0, 1000, seed);
        CHECK(res.order_preserved);
        CHECK(res.events == 1000);
    }

    // unordered initial pair is rejected
    CHECK_THROWS_AS(coupled_order_sim(rf, lat, {2, 0, 0}, {1, 0, 0}, 10, 1), ConfigError);

    // eta-marginal mean occupation agrees with an uncoupled run
    double coupled_mean = 0.0, uncoupled_mean = 0.0, coupled_sq = 0.0, uncoupled_sq = 0.0;
    const int seeds = 64;
    for (int s = 0; s < seeds; ++s) {
        auto res = coupled_order_sim(rf, lat, eta0, xi0, 400, derive_seed(77, static_cast<std::uint64_t>(s)));
        coupled_mean += res.eta_mean_occupation;
        coupled_sq += sq(res.eta_mean_occupation);

        SimOptions opts;
        opts.horizon = 2.0;
        opts.sample_dt = 0.05;
        opts.seed = derive_seed(78, static_cast<std::uint64_t>(s));
        auto traj = simulate(rf, lat, eta0, SimTopology::complete, opts);
        double mean = 0.0;
        for (const auto& etat : traj.samples) mean += etat[0];
        mean /= static_cast<double>(traj.samples.size());
        uncoupled_mean += mean;
        uncoupled_sq += sq(mean);
    }
    coupled_mean /= seeds;
    uncoupled_mean /= seeds;
    double var = (coupled_sq / seeds - sq(coupled_mean)) + (uncoupled_sq / seeds - sq(uncoupled_mean));
    double se = std::sqrt(var / seeds);
    CHECK(std::abs(coupled_mean - uncoupled_mean) < 3.0 * se + 0.05);
}
