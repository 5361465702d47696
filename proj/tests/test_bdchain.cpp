#include <doctest.h>

#include <cmath>
#include <numeric>

#include "zrp/bdchain.hpp"
#include "zrp/common.hpp"

using namespace zrp;

namespace {

CanonicalEnsemble make_ens(const std::string& preset, int side, long r) {
    auto lat = Lattice::segment(side);
    return canonical(preset_rates(preset, side), lat, r);
}

std::vector<double> binomial_pmf(long n, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k)
        pmf[static_cast<std::size_t>(k)] = binomial(n, k) * std::pow(p, k) * std::pow(1 - p, n - k);
    return pmf;
}

}  // namespace

TEST_CASE("boundary count law") {
    // Poisson product conditioned on the total splits binomially
    auto ens = make_ens("linear", 4, 4);
    auto law = boundary_count_law(ens, {0, 1});
    auto expected = binomial_pmf(4, 0.5);
    REQUIRE(law.gamma1.size() == 5);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(law.gamma1[k] == doctest::Approx(expected[k]).epsilon(1e-12));

    // convolution oracle agrees with enumeration
    auto conv = boundary_count_by_convolution(ens.rf, {0, 1}, 4);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(conv[k] == doctest::Approx(law.gamma1[k]).epsilon(1e-12));

    auto stair = make_ens("staircase", 3, 5);
    auto slaw = boundary_count_law(stair, {0});
    auto sconv = boundary_count_by_convolution(stair.rf, {0}, 5);
    for (std::size_t k = 0; k < slaw.gamma1.size(); ++k)
        CHECK(sconv[k] == doctest::Approx(slaw.gamma1[k]).epsilon(1e-12));

    // r = 0 degenerates to a point mass
    auto empty = make_ens("linear", 2, 0);
    auto elaw = boundary_count_law(empty, {0});
    CHECK(elaw.gamma1.size() == 1);
    CHECK(elaw.gamma1[0] == doctest::Approx(1.0));
}

TEST_CASE("gammabounds sandwich") {
    // gamma1(r1-1)/gamma1(r1) within [C^-1, C] * r1/(r - r1 + 1) for one C
    double c_global = 0.0;
    for (const char* preset : {"linear", "alternating:1,2", "staircase"}) {
        for (int side : {2, 4}) {
            for (long r : {3L, 6L}) {
                auto ens = make_ens(preset, side, r);
                std::vector<int> half1;
                for (int x = 0; x < side / 2 + (side == 2 ? 0 : 0); ++x) half1.push_back(x);
                if (half1.empty()) half1.push_back(0);
                auto law = boundary_count_law(ens, half1);
                for (long r1 = 1; r1 <= r; ++r1) {
                    double ratio = law.gamma1[static_cast<std::size_t>(r1 - 1)] /
                                   law.gamma1[static_cast<std::size_t>(r1)];
                    double ref = static_cast<double>(r1) / static_cast<double>(r - r1 + 1);
                    double c = std::max(ratio / ref, ref / ratio);
                    c_global = std::max(c_global, c);
                }
            }
        }
    }
    CHECK(std::isfinite(c_global));
    CHECK(c_global < 10.0);
}

TEST_CASE("metropolis chain") {
    auto gamma = binomial_pmf(2, 0.5);
    auto chain = metropolis_chain(gamma);
    CHECK(chain.birth[0] == doctest::Approx(1.0));  // min(gamma(1)/gamma(0), 1) = min(2,1)
    CHECK(chain.birth[1] == doctest::Approx(0.5));
    CHECK(chain.death[0] == doctest::Approx(0.5));  // d(1) = min(gamma(0)/gamma(1), 1)
    CHECK(chain.death[1] == doctest::Approx(1.0));

    for (std::size_t k = 0; k < gamma.size(); ++k)
        CHECK(chain.stationary[k] == doctest::Approx(gamma[k]).epsilon(1e-12));
    CHECK(chain.detailed_balance_defect() < 1e-12);

    std::vector<double> uniform(6, 1.0 / 6.0);
    auto flat = metropolis_chain(uniform);
    for (double b : flat.birth) CHECK(b == doctest::Approx(1.0));
    for (double d : flat.death) CHECK(d == doctest::Approx(1.0));

    std::vector<double> withzero = {0.5, 0.0, 0.5};
    CHECK_THROWS_WITH_AS(metropolis_chain(withzero), doctest::Contains("ZeroMass"), NumericError);
}

TEST_CASE("single-site marginal chain") {
    auto ens = make_ens("linear", 2, 2);
    auto chain = single_site_chain(ens, 0);
    // d(k) = k and b(k) = 2 - k for independent walkers on two sites
    CHECK(chain.death[0] == doctest::Approx(1.0));
    CHECK(chain.death[1] == doctest::Approx(2.0));
    CHECK(chain.birth[0] == doctest::Approx(2.0));
    CHECK(chain.birth[1] == doctest::Approx(1.0));
    auto expected = binomial_pmf(2, 0.5);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(chain.stationary[k] == doctest::Approx(expected[k]).epsilon(1e-12));

    // stationary law equals the nu-marginal on every tested instance
    for (const char* preset : {"alternating:1,2", "staircase"}) {
        for (int side : {3, 4}) {
            for (long r : {2L, 5L}) {
                auto e = make_ens(preset, side, r);
                for (int x = 0; x < side; ++x) {
                    auto c = single_site_chain(e, x);
                    auto m = e.site_marginal(x);
                    for (std::size_t k = 0; k < m.size(); ++k)
                        CHECK(c.stationary[k] == doctest::Approx(m[k]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("birth-death gap admissibility conditions") {
    // d(k) = k, constant birth: J2 = 0, J1 = 1, J0 = 0
    std::vector<double> birth(5, 2.0), death(5);
    std::iota(death.begin(), death.end(), 1.0);
    auto chain = make_birth_death(birth, death);
    auto cond = check_bdspecgap_conditions(chain);
    CHECK(cond.J2 == doctest::Approx(0.0));
    CHECK(cond.J1 == doctest::Approx(1.0));
    CHECK(cond.J0 == doctest::Approx(0.0));
    CHECK(cond.d_star == doctest::Approx(1.0));
    CHECK(cond.admissible);

    // two-site linear reduction: d(k) = k/2, b(k) = (r-k)/2 sits on the boundary
    auto ens = make_ens("linear", 2, 4);
    auto two = two_site_chain(ens);
    auto bcond = check_bdspecgap_conditions(two);
    CHECK(bcond.J1 == doctest::Approx(0.5));
    CHECK(bcond.J2 == doctest::Approx(0.5));
    CHECK(bcond.J0 == doctest::Approx(0.0));
    CHECK_FALSE(bcond.admissible);
    CHECK(bcond.boundary);
    CHECK(spectral_gap(two.generator()).gap > 0.0);

    // a jump in the birth rates is reported through J2
    std::vector<double> jumpy = {1.0, 11.0, 1.0, 1.0, 1.0};
    auto jchain = make_birth_death(jumpy, death);
    CHECK(check_bdspecgap_conditions(jchain).J2 == doctest::Approx(10.0));
}

TEST_CASE("single-site chains keep a uniform gap across r") {
    for (const char* preset : {"linear", "staircase"}) {
        double worst = 1e9;
        for (long r = 2; r <= 40; r += 2) {
            auto ens = make_ens(preset, 3, r);
            auto chain = single_site_chain(ens, 1);
            worst = std::min(worst, spectral_gap(chain.generator()).gap);
        }
        CHECK(worst > 0.2);
    }
}

TEST_CASE("miclo conditions") {
    // binomial boundary laws pass with a bounded A0, uniformly in r
    double a0_prev = 0.0;
    for (long r : {8L, 16L, 32L}) {
        auto res = miclo_check(binomial_pmf(r, 0.5), default_a0_grid());
        CHECK(res.satisfied);
        CHECK(res.a0_min <= 4.0);
        if (a0_prev > 0.0) CHECK(res.a0_min <= a0_prev * 1.26);
        a0_prev = res.a0_min;
    }

    // a near point mass fails on the lower Gaussian envelope
    std::vector<double> point(17, 1e-14);
    point[8] = 1.0;
    double total = std::accumulate(point.begin(), point.end(), 0.0);
    for (auto& p : point) p /= total;
    auto bad = miclo_check(point, default_a0_grid());
    CHECK_FALSE(bad.satisfied);
    CHECK(bad.margin_gauss_lower < 0.0);
}

TEST_CASE("modified measure") {
    auto ens = make_ens("linear", 4, 10);
    auto law = boundary_count_law(ens, {0, 1});
    auto mod = modified_measure(ens.rf, {0, 1}, law, 0.2);

    // H vanishes at rbar by construction (even r)
    CHECK(mod.rbar == 5);
    CHECK(mod.h_vals[5] == doctest::Approx(0.0).epsilon(1e-10));

    double mass = std::accumulate(mod.gamma1_eps.begin(), mod.gamma1_eps.end(), 0.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(mod.ratio_sup < 10.0);
    CHECK(mod.ratio_inf > 0.1);

    // H increments nonnegative and nondecreasing away from rbar inside I_eps
    for (long r1 = mod.rbar; r1 + 1 <= mod.i_hi; ++r1) {
        double inc = mod.h_vals[static_cast<std::size_t>(r1 + 1)] - mod.h_vals[static_cast<std::size_t>(r1)];
        CHECK(inc >= -1e-10);
        if (r1 > mod.rbar) {
            double prev =
                mod.h_vals[static_cast<std::size_t>(r1)] - mod.h_vals[static_cast<std::size_t>(r1 - 1)];
            CHECK(inc >= prev - 1e-10);
        }
    }
    for (long r1 = mod.rbar; r1 - 1 >= mod.i_lo; --r1) {
        double inc = mod.h_vals[static_cast<std::size_t>(r1 - 1)] - mod.h_vals[static_cast<std::size_t>(r1)];
        CHECK(inc >= -1e-10);
    }

    // the modified law passes the Miclo conditions with bounded A0
    auto res = miclo_check(mod.gamma1_eps, default_a0_grid());
    CHECK(res.satisfied);

    CHECK_THROWS_AS(modified_measure(ens.rf, {0, 1}, law, 0.3), ConfigError);
}

TEST_CASE("conditional difference identity") {
    // f constant: both sides vanish
    auto ens = make_ens("staircase", 3, 4);
    std::vector<double> ones(ens.size(), 1.0);
    auto flat = conditional_difference_check(ens, {0}, ones, 2);
    CHECK(flat.lhs == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(flat.rhs == doctest::Approx(0.0).epsilon(1e-13));

    // random f on assorted instances: identity to 1e-10, mirror agrees
    Rng rng(9);
    for (const char* preset : {"linear", "alternating:1,2", "staircase"}) {
        auto e = make_ens(preset, 2, 3);
        std::vector<double> f(e.size());
        for (auto& v : f) v = rng.uniform();
        auto res = conditional_difference_check(e, {0}, f, 2);
        CHECK(res.abs_err <= 1e-10);
        CHECK(res.mirror_err <= 1e-10);
    }
    for (long r1 = 1; r1 <= 4; ++r1) {
        std::vector<double> f(ens.size());
        for (auto& v : f) v = rng.uniform();
        auto res = conditional_difference_check(ens, {0, 2}, f, r1);
        CHECK(res.abs_err <= 1e-10);
        CHECK(res.mirror_err <= 1e-10);
    }
}

TEST_CASE("two-site log-Sobolev stays bounded in r") {
    // matches the two-point oracle at r = 1
    auto ens1 = make_ens("linear", 2, 1);
    double ls1 = two_site_logsob(ens1);
    auto gen = build_generator(ens1, Topology::nearest_neighbour);
    double full = estimate_constant(gen, ConstantKind::log_sobolev).value;
    CHECK(ls1 == doctest::Approx(full).epsilon(1e-6));

    // reduction reproduces the full Dirichlet form on densities of eta_1
    auto ens4 = make_ens("linear", 2, 4);
    auto chain = two_site_chain(ens4);
    auto chain_gen = chain.generator();
    auto full_gen = build_generator(ens4, Topology::nearest_neighbour);
    Rng rng(4);
    std::vector<double> fk(chain.stationary.size());
    for (auto& v : fk) v = 0.2 + rng.uniform();
    std::vector<double> f_full(ens4.size());
    for (std::size_t i = 0; i < ens4.size(); ++i)
        f_full[i] = fk[static_cast<std::size_t>(ens4.states[i][0])];
    CHECK(dirichlet_form(chain_gen, fk) == doctest::Approx(dirichlet_form(full_gen, f_full)).epsilon(1e-12));

    // no growth trend over r
    double lo = 1e18, hi = 0.0;
    EstimateOptions opts;
    opts.restarts = 20;
    for (long r = 1; r <= 20; ++r) {
        double ls = two_site_logsob(make_ens("linear", 2, r), opts);
        lo = std::min(lo, ls);
        hi = std::max(hi, ls);
    }
    CHECK(hi / lo < 3.0);
}
