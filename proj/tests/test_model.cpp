#include <doctest.h>

#include <cmath>
#include <numeric>

#include "zrp/common.hpp"
#include "zrp/ensemble.hpp"
#include "zrp/measures.hpp"
#include "zrp/ordering.hpp"
#include "zrp/rates.hpp"

using namespace zrp;

TEST_CASE("rate family evaluation and validation") {
    auto lin = preset_rates("linear", 3);
    for (int x = 0; x < 3; ++x) CHECK(lin.rate(x, 5) == doctest::Approx(5.0));

    auto alt = preset_rates("alternating:1,2", 2);
    CHECK(alt.rate(0, 3) == doctest::Approx(3.0));
    CHECK(alt.rate(1, 3) == doctest::Approx(6.0));

    CHECK_THROWS_WITH_AS(build_rate_family({{1.0, 1.0}}, {1.0}), doctest::Contains("NonzeroAtZero"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(build_rate_family({{0.0, -1.0}}, {1.0}), doctest::Contains("NonpositiveRate"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(build_rate_family({{0.0, 1.0}}, {0.0}), doctest::Contains("NonpositiveTail"),
                         ConfigError);

    auto stair = preset_rates("staircase", 2);
    CHECK(stair.rate(0, 1) == doctest::Approx(1.5));
    CHECK(stair.rate(0, 2) == doctest::Approx(2.0));
    CHECK(stair.rate(1, 7) == doctest::Approx(7.5));
}

TEST_CASE("rate spec file round trip") {
    auto alt = preset_rates("alternating:1,2", 3);
    auto parsed = parse_rate_spec(alt.to_spec_text());
    REQUIRE(parsed.sites() == 3);
    for (int x = 0; x < 3; ++x)
        for (long k = 0; k <= 6; ++k) CHECK(parsed.rate(x, k) == doctest::Approx(alt.rate(x, k)));

    auto broadcast = parse_rate_spec("sites = 2\nhead = [0, 1.5, 2]\ntail_theta = 1\n");
    CHECK(broadcast.rate(1, 1) == doctest::Approx(1.5));
    CHECK(broadcast.rate(0, 9) == doctest::Approx(9.0));
    CHECK_THROWS_AS(parse_rate_spec("head = [0,1]\n"), ConfigError);
}

TEST_CASE("condition constants for the named families") {
    auto lin = preset_rates("linear", 2);
    auto rep = verify_conditions(lin, 8);
    CHECK(rep.a1 == doctest::Approx(1.0));
    CHECK(rep.k0 == 1);
    CHECK(rep.a2 == doctest::Approx(1.0));
    CHECK(rep.B == doctest::Approx(4.0));
    CHECK(rep.c1 == doctest::Approx(1.0));
    CHECK(rep.c2 == doctest::Approx(1.0));

    // queueing-style plateau c(k) = 1(k >= 1) over the whole head: no k0 works
    std::vector<double> plateau(65, 1.0);
    plateau[0] = 0.0;
    auto queue = build_rate_family({plateau, plateau}, {1.0, 1.0});
    CHECK_THROWS_WITH_AS(verify_conditions(queue, 8), doctest::Contains("MNotSatisfied"), NumericError);

    // staircase: increments alternate 1.5 / 0.5, so the first admissible step
    // is k0 = 1 with infimum 0.5. Inside the tabulated pattern the two-step
    // increment is exactly 2; the head-to-tail junction trims one pair to 1.5.
    auto stair = preset_rates("staircase", 2);
    auto srep = verify_conditions(stair, 8);
    CHECK(srep.a1 == doctest::Approx(1.5));
    CHECK(srep.k0 == 1);
    CHECK(srep.a2 == doctest::Approx(0.5));
    CHECK(stair.rate(0, 12) - stair.rate(0, 10) == doctest::Approx(2.0));
    CHECK(stair.rate(0, 13) - stair.rate(0, 11) == doctest::Approx(2.0));
    CHECK(monotonicity_infimum(stair, 2) == doctest::Approx(1.5));
    CHECK(srep.B == doctest::Approx((1.5 / 0.5) * 1.0 * 2.0 + 2.0));

    // (E) statistics on small samples stay positive and finite
    auto erep = verify_conditions(stair, 8, {{2, 3}, {3, 5}, {4, 2}});
    CHECK(erep.e_ok);
    CHECK(erep.E_inf > 0.0);
    CHECK(erep.E_sup < 1.0);
}

TEST_CASE("grand canonical marginals") {
    auto lin = preset_rates("linear", 1);
    auto mg = marginal(lin, 0, 1.0);
    CHECK(mg.Z == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(mg.pmf[2] == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-12));

    auto two = preset_rates("linear-theta:2", 1);
    auto mg2 = marginal(two, 0, 1.0);
    // c(k) = 2k makes the marginal Poisson(1/2)
    for (long k = 0; k <= 6; ++k)
        CHECK(mg2.pmf[static_cast<std::size_t>(k)] ==
              doctest::Approx(std::exp(-0.5) * std::pow(0.5, k) / std::tgamma(k + 1.0)).epsilon(1e-12));

    double total = std::accumulate(mg.pmf.begin(), mg.pmf.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mg.tail_mass_bound < 1e-13);
    CHECK_THROWS_AS(marginal(lin, 0, -1.0), ConfigError);
    CHECK_THROWS_WITH_AS(marginal(lin, 0, 100.0, 1e-14, 50), doctest::Contains("TruncationOverflow"),
                         NumericError);
}

TEST_CASE("moment tables and cumulants") {
    auto lin = preset_rates("linear", 1);
    auto t = moments(lin, 2.0, 8);
    CHECK(t.site[0].rho == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t.site[0].sigma2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t.site[0].cumulant[3] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(t.site[0].cumulant[4] == doctest::Approx(2.0).epsilon(1e-9));

    auto alt = preset_rates("alternating:1,2", 2);
    auto ta = moments(alt, 2.0, 4);
    CHECK(ta.rho_avg == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(ta.site[0].cumulant[2] == doctest::Approx(ta.site[0].central[2]).epsilon(1e-12));
}

TEST_CASE("moment envelopes under the slope bounds") {
    // c1 <= phi / rho_x <= c2 pointwise, and sigma^2_x / phi stays in a fixed
    // window across the phi grid
    for (const char* preset : {"staircase", "alternating:1,2"}) {
        auto rf = preset_rates(preset, 2);
        auto rep = verify_conditions(rf, 8);
        for (double phi = 0.25; phi <= 8.0; phi *= 2.0) {
            auto t = moments(rf, phi, 2);
            for (int x = 0; x < 2; ++x) {
                double ratio = phi / t.site[static_cast<std::size_t>(x)].rho;
                CHECK(ratio >= rep.c1 - 1e-12);
                CHECK(ratio <= rep.c2 + 1e-12);
                double vr = t.site[static_cast<std::size_t>(x)].sigma2 / phi;
                CHECK(vr > 0.1);
                CHECK(vr < 10.0);
            }
        }
    }
}

TEST_CASE("fugacity identity holds for random families") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        int sites = 1 + static_cast<int>(rng.index(3));
        std::vector<std::vector<double>> head(static_cast<std::size_t>(sites));
        std::vector<double> theta(static_cast<std::size_t>(sites));
        for (int x = 0; x < sites; ++x) {
            auto& h = head[static_cast<std::size_t>(x)];
            h.push_back(0.0);
            double level = 0.0;
            for (int k = 1; k <= 6; ++k) {
                level += 0.2 + 2.0 * rng.uniform();
                h.push_back(level);
            }
            theta[static_cast<std::size_t>(x)] = 0.5 + 2.0 * rng.uniform();
        }
        auto rf = build_rate_family(head, theta);
        double phi = 0.2 + 3.0 * rng.uniform();
        for (int x = 0; x < sites; ++x) {
            auto mg = marginal(rf, x, phi);
            double mc = 0.0;
            for (std::size_t k = 0; k < mg.pmf.size(); ++k) mc += rf.rate(x, static_cast<long>(k)) * mg.pmf[k];
            CHECK(mc == doctest::Approx(phi).epsilon(1e-10));
        }
    }
}

TEST_CASE("fugacity inversion") {
    auto lin = preset_rates("linear", 4);
    CHECK(phi_of_rho(lin, 2.5) == doctest::Approx(2.5).epsilon(1e-12));

    auto alt = preset_rates("alternating:1,2", 2);
    // Poisson marginal means phi and phi/2 average to 3 phi / 4
    CHECK(phi_of_rho(alt, 1.5) == doctest::Approx(2.0).epsilon(1e-10));

    double prev = phi_of_rho(lin, 1e-3);
    for (double rho : {1e-2, 1e-1, 1.0}) {
        double phi = phi_of_rho(lin, rho);
        CHECK(phi > prev);
        prev = phi;
    }

    // strict monotonicity of rho(phi) over a geometric grid
    auto stair = preset_rates("staircase", 3);
    double last = -1.0;
    for (double phi = 0.125; phi <= 16.0; phi *= 2.0) {
        auto t = moments(stair, phi, 2);
        CHECK(t.rho_avg > last);
        last = t.rho_avg;
    }
}

TEST_CASE("canonical ensembles") {
    auto lin = preset_rates("linear", 2);
    auto lat = Lattice::segment(2);
    auto ens = canonical(lin, lat, 2);
    REQUIRE(ens.size() == 3);
    // lexicographic states (0,2), (1,1), (2,0); weights 1/2, 1, 1/2
    CHECK(ens.states[0] == Configuration{0, 2});
    CHECK(ens.nu[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(ens.nu[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ens.nu[2] == doctest::Approx(0.25).epsilon(1e-14));

    // detailed balance at (1,1) -> (0,2)
    double lhs = lin.rate(0, 1) * ens.nu[1];
    double rhs = lin.rate(1, 2) * ens.nu[0];
    CHECK(lhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rhs == doctest::Approx(0.5).epsilon(1e-12));

    auto lin3 = preset_rates("linear", 3);
    auto ens3 = canonical(lin3, Lattice::segment(3), 2);
    CHECK(ens3.size() == 6);
    CHECK(canonical_state_count(3, 2) == 6);

    for (std::size_t i = 0; i < ens3.size(); ++i) {
        CHECK(ens3.rank(ens3.states[i]) == i);
        CHECK(ens3.unrank(i) == ens3.states[i]);
    }

    double total = std::accumulate(ens3.nu.begin(), ens3.nu.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_WITH_AS(canonical(preset_rates("linear", 6), Lattice::segment(6), 100),
                         doctest::Contains("StateSpaceTooLarge"), NumericError);
}

TEST_CASE("canonical law equals the conditioned product measure") {
    auto stair = preset_rates("staircase", 3);
    auto ens = canonical(stair, Lattice::segment(3), 4);
    for (double phi : {0.7, 2.3}) {
        std::vector<GrandCanonicalMarginal> mg;
        for (int x = 0; x < 3; ++x) mg.push_back(marginal(stair, x, phi));
        std::vector<double> cond(ens.size());
        double total = 0.0;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            double p = 1.0;
            for (int x = 0; x < 3; ++x)
                p *= mg[static_cast<std::size_t>(x)]
                         .pmf[static_cast<std::size_t>(ens.states[i][static_cast<std::size_t>(x)])];
            cond[i] = p;
            total += p;
        }
        for (std::size_t i = 0; i < ens.size(); ++i)
            CHECK(cond[i] / total == doctest::Approx(ens.nu[i]).epsilon(1e-12));
    }
}

TEST_CASE("h factor") {
    auto lin = preset_rates("linear", 1);
    for (long k = 0; k < 10; ++k) CHECK(h_factor(lin, 0, k) == doctest::Approx(1.0));
    auto two = preset_rates("linear-theta:2", 1);
    CHECK(h_factor(two, 0, 3) == doctest::Approx(0.5));

    auto stair = preset_rates("staircase", 1);
    auto rep = verify_conditions(stair, 4);
    for (long k = 0; k < 30; ++k) {
        double h = h_factor(stair, 0, k);
        CHECK(h >= 1.0 / rep.c2 - 1e-12);
        CHECK(h <= 1.0 / rep.c1 + 1e-12);
    }
}

TEST_CASE("stochastic domination") {
    auto lin = preset_rates("linear", 2);
    auto lat = Lattice::segment(2);
    auto nu2 = canonical(lin, lat, 2);
    auto nu3 = canonical(lin, lat, 3);

    auto self = check_stochastic_domination(nu2, nu2);
    CHECK(self.dominated);

    auto up = check_stochastic_domination(nu2, nu3);
    CHECK(up.dominated);
    // coupling mass adds up to one and respects the order
    double mass = 0.0;
    for (const auto& entry : up.coupling) {
        mass += entry.mass;
        for (int x = 0; x < 2; ++x)
            CHECK(nu2.states[entry.lo][static_cast<std::size_t>(x)] <=
                  nu3.states[entry.hi][static_cast<std::size_t>(x)]);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

    auto down = check_stochastic_domination(nu3, nu2);
    CHECK_FALSE(down.dominated);

    CHECK_THROWS_WITH_AS(check_stochastic_domination(nu2, nu3, 2),
                         doctest::Contains("PairSpaceTooLarge"), NumericError);

    // monotone test functions agree with the decision
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        // random coordinatewise nondecreasing function: max over random
        // thresholds of a sum of per-site nondecreasing step functions
        std::vector<double> site_scale(2);
        for (auto& s : site_scale) s = rng.uniform();
        auto monotone = [&](const Configuration& eta) {
            double acc = 0.0;
            for (int x = 0; x < 2; ++x)
                acc += site_scale[static_cast<std::size_t>(x)] *
                       std::sqrt(static_cast<double>(eta[static_cast<std::size_t>(x)]));
            return acc;
        };
        double lo_mean = 0.0, hi_mean = 0.0;
        for (std::size_t i = 0; i < nu2.size(); ++i) lo_mean += nu2.nu[i] * monotone(nu2.states[i]);
        for (std::size_t i = 0; i < nu3.size(); ++i) hi_mean += nu3.nu[i] * monotone(nu3.states[i]);
        CHECK(lo_mean <= hi_mean + 1e-12);
    }
}

TEST_CASE("colour rates and conditioned families") {
    auto two = preset_rates("linear-theta:2", 1);
    auto [c1, c2] = colour_rates(two, 3, 2);
    CHECK(c1 == doctest::Approx(6.0));
    CHECK(c2 == doctest::Approx(4.0));

    auto [z1, z2] = colour_rates(two, 0, 5);
    CHECK(z1 == doctest::Approx(0.0));
    CHECK(z2 == doctest::Approx(two.rate(0, 5)));

    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        long k1 = static_cast<long>(rng.index(10));
        long k2 = static_cast<long>(rng.index(10));
        if (k1 + k2 == 0) k1 = 1;
        auto [a, b] = colour_rates(two, k1, k2);
        CHECK(a + b == doctest::Approx(two.rate(0, k1 + k2)).epsilon(1e-14));
    }

    // theta k is invariant under conditioning
    auto lin = preset_rates("linear-theta:3", 1);
    auto cond = conditioned_rate_family(lin, {2, 0, 5});
    for (int x = 0; x < 3; ++x)
        for (long k = 1; k <= 8; ++k) CHECK(cond.rate(x, k) == doctest::Approx(3.0 * k));

    auto stair = preset_rates("staircase", 1);
    auto cs = conditioned_rate_family(stair, {1, 0});
    CHECK(cs.rate(0, 2) == doctest::Approx(2.0 * stair.rate(0, 3) / 3.0));
    CHECK(cs.rate(1, 2) == doctest::Approx(stair.rate(0, 2)));

    auto rep = verify_conditions(cs, 8);
    CHECK(rep.m_ok);
    CHECK(rep.lg_ok);
}
