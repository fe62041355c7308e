#include <doctest.h>

#include <cmath>

#include "bdcutoff/analysis.hpp"
#include "bdcutoff/errors.hpp"
#include "oracles.hpp"

using namespace bdcutoff;

namespace {
DistPtr uniform(std::size_t n) { return make_distribution(Family::uniform, n); }

std::vector<DistPtr> test_dists(std::size_t n) {
    FamilyParams p;
    return {uniform(n), make_distribution(Family::geometric, n, p),
            make_distribution(Family::binomial, n)};
}
}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("hitting times: closed cases") {
    const BDKernel m = metropolis_kernel(uniform(4));
    CHECK(expected_hitting_time(m, 0, 3) == doctest::Approx(24.0).epsilon(1e-13));
    CHECK(oracle::hitting_time(m, 0, 3) == doctest::Approx(24.0).epsilon(1e-12));
    const BDKernel m8 = metropolis_kernel(make_distribution(Family::binomial, 8));
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(expected_hitting_time(m8, i, j) ==
                  doctest::Approx(oracle::hitting_time_lu(m8, i, j)).epsilon(1e-10));
        }
    }
    CHECK(expected_hitting_time(m, 2, 2) == 0.0);
    CHECK(expected_hitting_time(BDKernel(uniform(2), {0.5}), 0, 1) == doctest::Approx(2.0));
}

TEST_CASE("hitting times agree with the linear-solve oracle") {
    CounterRng rng(77);
    for (std::size_t n : {8u, 24u, 64u}) {
        for (const auto& d : test_dists(n)) {
            for (int rep = 0; rep < 5; ++rep) {
                const BDKernel k(d, oracle::random_feasible(*d, rng));
                for (int q = 0; q < 4; ++q) {
                    const std::size_t i = rng.below(n), j = rng.below(n);
                    const double got = expected_hitting_time(k, i, j);
                    const double want = oracle::hitting_time(k, i, j);
                    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
                }
            }
        }
    }
}

TEST_CASE("blocked paths raise a non-ergodic error naming the cut") {
    const BDKernel k(uniform(5), {0.5, 0.0, 0.5, 0.5});
    try {
        expected_hitting_time(k, 0, 4);
        FAIL("expected a non-ergodic error");
    } catch (const NonErgodicError& e) {
        CHECK(e.edge() == 1);
    }
    CHECK_THROWS_AS(expected_hitting_time(k, 4, 0), NonErgodicError);
    CHECK(expected_hitting_time(k, 0, 1) == doctest::Approx(2.0));
    CHECK_THROWS_AS(miclo_bounds(k), NonErgodicError);
    CHECK_THROWS_AS(expected_hitting_time(k, 0, 5), BoundsError);
}

TEST_CASE("spectral gap: closed cases and dense oracle") {
    CHECK(spectral_gap(BDKernel(uniform(2), {0.5})) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spectral_gap(BDKernel(uniform(6), {0, 0, 0, 0, 0})) == 0.0);
    const BDKernel m = metropolis_kernel(uniform(16));
    CHECK(std::abs(spectral_gap(m) - oracle::spectral_gap(m)) <= 1e-9);
    CounterRng rng(2);
    for (const auto& d : test_dists(40)) {
        for (int rep = 0; rep < 5; ++rep) {
            const BDKernel k(d, oracle::random_feasible(*d, rng));
            const double g = spectral_gap(k);
            CHECK(std::abs(g - oracle::spectral_gap(k)) <= 1e-9);
        }
    }
}

TEST_CASE("Miclo sums match the brute-force evaluation") {
    const BDKernel m = metropolis_kernel(uniform(8));
    const MicloBounds b = miclo_bounds(m);
    CHECK(b.b == doctest::Approx(oracle::miclo_b(m)).epsilon(1e-12));
    CHECK(b.b == std::max(b.b_plus, b.b_minus));
    CHECK(b.lower == doctest::Approx(1.0 / (4.0 * b.b)));
    CHECK(b.upper == doctest::Approx(2.0 / b.b));
    CounterRng rng(4);
    for (const auto& d : test_dists(30)) {
        const BDKernel k(d, oracle::random_feasible(*d, rng));
        CHECK(miclo_bounds(k).b == doctest::Approx(oracle::miclo_b(k)).epsilon(1e-10));
    }
}

TEST_CASE("Miclo sandwich on small kernels, including n=2 and n=3") {
    // Inclusive tail sums keep both sides non-empty down to two states.
    const BDKernel two(uniform(2), {0.5});
    const MicloBounds b2 = miclo_bounds(two);
    CHECK_FALSE(b2.degenerate);
    CHECK(spectral_gap(two) <= b2.upper * (1 + 1e-12));
    const MicloBounds b3 = miclo_bounds(metropolis_kernel(uniform(3)));
    CHECK_FALSE(b3.degenerate);
    const double g3 = spectral_gap(metropolis_kernel(uniform(3)));
    CHECK(b3.lower <= g3);
    CHECK(g3 <= b3.upper);
}

TEST_CASE("Miclo sandwich property on random kernels") {
    CounterRng rng(123);
    int violations = 0;
    for (std::size_t n : {5u, 9u, 17u, 40u}) {
        for (const auto& d : test_dists(n)) {
            for (int rep = 0; rep < 40; ++rep) {
                const BDKernel k(d, oracle::random_feasible(*d, rng));
                const MicloBounds b = miclo_bounds(k);
                const double g = spectral_gap(k);
                if (g < b.lower * (1 - 1e-12) || g > b.upper * (1 + 1e-12)) ++violations;
            }
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("TV distance") {
    const std::vector<double> a = {0.5, 0.5}, b = {0.25, 0.75}, p = {1, 0}, q = {0, 1};
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(p, q) == 1.0);
    CHECK(tv_distance(a, b) == doctest::Approx(0.25));
    const std::vector<double> c = {1.0};
    CHECK_THROWS_AS(tv_distance(a, c), ParameterError);
}

TEST_CASE("mixing time: closed cases") {
    const BDKernel full(uniform(2), {0.5});
    CHECK(mixing_time(full, 0.25) == 1);
    const BDKernel id(uniform(4), {0, 0, 0});
    MixingOptions o;
    o.horizon = 50;
    try {
        mixing_time(id, 0.25, o);
        FAIL("expected not-mixed");
    } catch (const NotMixedError& e) {
        CHECK(e.reducible());
        CHECK(e.last_tv() > 0.25);
    }
    CHECK_THROWS_AS(mixing_time(full, 0.0), ParameterError);
    const BDKernel slow = lazy(metropolis_kernel(uniform(30)), 0.5);
    try {
        mixing_time(slow, 0.25, o);
        FAIL("expected not-mixed");
    } catch (const NotMixedError& e) {
        CHECK_FALSE(e.reducible());
    }
}

TEST_CASE("mixing time agrees with the dense all-starts oracle") {
    const BDKernel m8 = lazy(metropolis_kernel(uniform(8)), 0.5);
    MixingOptions all;
    all.starts = StartSet::all_states;
    CHECK(mixing_time(m8, 0.25) == oracle::mixing_time(m8, 0.25));
    CHECK(mixing_time(m8, 0.25, all) == mixing_time(m8, 0.25));
    CounterRng rng(9);
    for (const auto& d : test_dists(10)) {
        for (int rep = 0; rep < 4; ++rep) {
            const BDKernel k = lazy(BDKernel(d, oracle::gibbs_kernel(d, rng())), 0.5);
            CHECK(mixing_time(k, 0.25, all) == oracle::mixing_time(k, 0.25));
        }
    }
}

TEST_CASE("default starts give the exhaustive tau at small n") {
    int agree = 0, total = 0;
    for (std::size_t n : {6u, 11u, 16u}) {
        const auto d = uniform(n);
        for (int rep = 0; rep < 34; ++rep) {
            const BDKernel k = lazy(BDKernel(d, oracle::gibbs_kernel(d, 1000 * n + rep)), 0.5);
            MixingOptions all;
            all.starts = StartSet::all_states;
            ++total;
            if (mixing_time(k, 0.25) == mixing_time(k, 0.25, all)) ++agree;
        }
    }
    CHECK(agree == total);
}

TEST_CASE("TV to stationarity is nonincreasing and d is submultiplicative") {
    CounterRng rng(31);
    const auto d = uniform(12);
    for (int rep = 0; rep < 5; ++rep) {
        const BDKernel k(d, oracle::random_feasible(*d, rng));
        for (std::size_t s : {0u, 5u, 11u}) {
            const auto tv = distance_to_stationarity(k, s, 200);
            for (std::size_t t = 1; t < tv.size(); ++t) CHECK(tv[t] <= tv[t - 1] + 1e-12);
        }
        const auto dd = worst_pair_distance(k, 60);
        for (std::size_t s = 0; s <= 30; ++s) {
            for (std::size_t t = 0; s + t <= 60; ++t) CHECK(dd[s + t] <= dd[s] * dd[t] + 1e-10);
        }
    }
}

TEST_CASE("hitting proxy and cutoff product") {
    const BDKernel full(uniform(2), {0.5});
    const CutoffProduct cp = cutoff_product(full);
    REQUIRE(cp.exact.has_value());
    CHECK(*cp.exact == doctest::Approx(1.0));
    CHECK(cp.gap == doctest::Approx(1.0));
    CHECK_THROWS_AS(hitting_proxy(full, 0.5), ParameterError);

    const BDKernel m = metropolis_kernel(uniform(20));
    const HittingProxy h = hitting_proxy(m);
    CHECK(h.up_target == uniform(20)->quantile(0.75));
    CHECK(h.down_target == uniform(20)->quantile(0.25));
    CHECK(h.hit_up == doctest::Approx(oracle::hitting_time(m, 0, h.up_target)).epsilon(1e-12));
    CHECK(h.hit_down == doctest::Approx(oracle::hitting_time(m, 19, h.down_target)).epsilon(1e-12));
    CHECK(h.value == std::max(h.hit_up, h.hit_down));
}

TEST_CASE("proxy over exact tau stays in a narrow band across n") {
    std::vector<double> ratios;
    for (std::size_t n : {32u, 64u, 128u}) {
        const BDKernel k = lazy(metropolis_kernel(uniform(n)), 0.5);
        const CutoffProduct cp = cutoff_product(k);
        REQUIRE(cp.tau.has_value());
        ratios.push_back(cp.tau_proxy / static_cast<double>(*cp.tau));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi / *lo < 1.5);
}

TEST_CASE("DLP window") {
    // Two states, full mixing: tau(eps) = 1 and tau(1 - eps) = 0.
    const DlpWindow w2 = dlp_window(BDKernel(uniform(2), {0.5}), 0.25);
    CHECK(w2.scale == doctest::Approx(1.0));
    CHECK(w2.tau_eps == 1);
    CHECK(w2.tau_one_minus_eps == 0);
    CHECK(w2.window == 1.0);
    const BDKernel k = lazy(metropolis_kernel(uniform(24)), 0.5);
    for (double eps : {0.05, 0.1, 0.25, 0.4}) {
        const DlpWindow w = dlp_window(k, eps);
        CHECK(w.window >= 0);
        CHECK(w.tau_eps >= w.tau_one_minus_eps);
    }
    const double levels[] = {0.9, 0.7, 0.5, 0.3, 0.1};
    const auto taus = mixing_profile(k, levels);
    for (std::size_t i = 1; i < taus.size(); ++i) CHECK(taus[i] >= taus[i - 1]);
    CHECK_THROWS_AS(dlp_window(k, 0.5), ParameterError);
}

TEST_CASE("super-diagonal mixing bound") {
    const auto u = uniform(40);
    const double r16 = 1 - 15 * std::log(16.0 / 15.0);
    CHECK(sd_contraction(16) == doctest::Approx(r16).epsilon(1e-14));
    CHECK(r16 == doctest::Approx(0.03192).epsilon(1e-3));
    CHECK(sd_mixing_bound(*u, 3, 1).product_bound == doctest::Approx(1 - r16).epsilon(1e-14));
    CHECK(sd_mixing_bound(*u, 3, 1).product_bound == doctest::Approx(0.96808).epsilon(1e-5));
    CHECK(sd_mixing_bound(*u, 3, 0).product_bound == 1.0);
    CHECK(sd_mixing_bound(*u, 3, 4).alternating_bound == doctest::Approx(std::pow(23.0 / 27.0, 2)));
    CHECK(alternating_mixing_bound(4) == doctest::Approx(0.5265).epsilon(1e-3));
    CHECK(sd_contraction(1.0) == 0.0);
    CHECK(sd_contraction(0.5) == 0.0);
    FamilyParams p;
    p.a = 64;  // downhill ratio 1/64 gives C = 1/4
    const auto g = make_distribution(Family::geometric, 12, p);
    const auto rev = StationaryDist::from_log_mass([&] {
        std::vector<double> lm(12);
        for (std::size_t i = 0; i < 12; ++i) lm[i] = -static_cast<double>(i) * std::log(64.0);
        return lm;
    }());
    const SdMixingBound clamped = sd_mixing_bound(rev, 0, 3);
    CHECK(clamped.clamped_terms == 3);
    CHECK(clamped.product_bound == 1.0);
    CHECK(sd_mixing_bound(*g, 0, 3).clamped_terms == 0);
    CHECK_THROWS_AS(sd_mixing_bound(*u, 30, 10), BoundsError);
}

TEST_CASE("analysis report") {
    const BDKernel k = lazy(BDKernel(uniform(32), oracle::gibbs_kernel(uniform(32), 5)), 0.5);
    AnalysisOptions o;
    const AnalysisReport proxy = analyze(k, o);
    CHECK(proxy.cutoff_is_proxy);
    CHECK_FALSE(proxy.tau.has_value());
    CHECK(proxy.tau_proxy == std::max(proxy.hit_up, proxy.hit_down));
    CHECK(proxy.cutoff_product == doctest::Approx(proxy.tau_proxy * proxy.gap));
    CHECK(proxy.miclo.lower <= proxy.gap);
    CHECK(proxy.gap <= proxy.miclo.upper);
    o.exact_tau = true;
    const AnalysisReport exact = analyze(k, o);
    REQUIRE(exact.tau.has_value());
    CHECK_FALSE(exact.cutoff_is_proxy);
    CHECK(exact.cutoff_product == doctest::Approx(*exact.tau * exact.gap));
    REQUIRE(exact.dlp_window.has_value());
    CHECK(*exact.dlp_window >= 0);
    o.exact_tau_max_n = 16;
    CHECK(analyze(k, o).cutoff_is_proxy);
}

}
