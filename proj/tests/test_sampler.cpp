#include <doctest.h>

#include <cmath>

#include "bdcutoff/errors.hpp"
#include "bdcutoff/sampler.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace bdcutoff;

namespace {
DistPtr uniform(std::size_t n) { return make_distribution(Family::uniform, n); }
}

TEST_SUITE("sampler") {

TEST_CASE("conditional intervals") {
    const auto u = uniform(5);
    CHECK(conditional_interval({u, {0, 0, 0, 0}}, 1).hi == 1.0);
    CHECK(conditional_interval({u, {0.3, 0, 0.5, 0}}, 1).hi == doctest::Approx(0.5));
    CHECK(conditional_interval({u, {0.3, 0, 0.5, 0}}, 1).lo == 0.0);
    FamilyParams p;
    const auto g = make_distribution(Family::geometric, 5, p);
    // ratio 2 to the right, 1/2 to the left
    const Interval iv = conditional_interval({g, {0.4, 0, 0.8, 0}}, 1);
    CHECK(iv.hi == doctest::Approx(0.4));
    CHECK_THROWS_AS(conditional_interval({u, {0, 0, 0, 0}}, 4), BoundsError);
}

TEST_CASE("conditional interval is the full conditional support") {
    CounterRng rng(3);
    FamilyParams p;
    for (const auto& d : {uniform(9), make_distribution(Family::geometric, 9, p),
                          make_distribution(Family::binomial, 9)}) {
        for (int rep = 0; rep < 200; ++rep) {
            auto c = oracle::random_feasible(*d, rng);
            const std::size_t i = rng.below(c.size());
            const double hi = conditional_interval({d, c}, i).hi;
            c[i] = hi;
            CHECK(is_feasible(*d, c));
            c[i] = hi * rng.uniform();
            CHECK(is_feasible(*d, c));
            c[i] = hi + 1e-6;
            CHECK_FALSE(is_feasible(*d, c));
        }
    }
}

TEST_CASE("saturated neighbours force zero") {
    SuperDiagState s{uniform(4), {1.0, 0.5, 0.0}};
    CounterRng rng(1);
    site_update(s, 1, rng);
    CHECK(s.c[1] == 0.0);
}

TEST_CASE("site update is uniform on the interval") {
    SuperDiagState s{uniform(5), {0.3, 0.2, 0.5, 0.1}};
    const double hi = conditional_interval(s, 1).hi;
    CounterRng rng(17);
    std::vector<double> draws;
    for (int t = 0; t < 100000; ++t) {
        site_update(s, 1, rng);
        draws.push_back(s.c[1]);
    }
    CHECK(stats::ks_distance(draws, [&](double x) { return x / hi; }) <= 0.01);
}

TEST_CASE("one-coordinate block matches site update in law") {
    const auto d = uniform(6);
    const std::vector<double> base = {0.2, 0.3, 0.1, 0.4, 0.2};
    const double hi = conditional_interval({d, base}, 2).hi;
    std::vector<double> a(20, 0), b(20, 0);
    CounterRng r1(1), r2(2);
    for (int t = 0; t < 100000; ++t) {
        SuperDiagState s1{d, base}, s2{d, base};
        site_update(s1, 2, r1);
        block_update(s2, 2, 1, r2);
        a[std::min(19, static_cast<int>(20 * s1.c[2] / hi))] += 1;
        b[std::min(19, static_cast<int>(20 * s2.c[2] / hi))] += 1;
    }
    CHECK(stats::chi2_homogeneity_pvalue(a, b) > 0.001);
}

TEST_CASE("full block at n=3 is uniform on the triangle") {
    const auto d = uniform(3);
    SuperDiagState s{d, {0.1, 0.1}};
    CounterRng rng(99);
    std::vector<double> grid(400, 0);
    int outside = 0;
    for (int t = 0; t < 100000; ++t) {
        block_update(s, 0, 2, rng);
        if (s.c[0] + s.c[1] > 1.0) ++outside;
        stats::add_to_grid(grid, 20, s.c[0], s.c[1]);
    }
    CHECK(outside == 0);
    CHECK(stats::chi2_gof_pvalue(grid, stats::triangle_cells(20)) > 0.001);
}

TEST_CASE("block rejection stalls cleanly") {
    FamilyParams p;
    p.a = 1000;  // tiny acceptance for a long block
    const auto d = make_distribution(Family::binomial, 30);
    SuperDiagState s{d, default_initial_state(*d)};
    CounterRng rng(1);
    try {
        block_update(s, 0, 20, rng, 5);
        // acceptance on the first few tries is possible but very unlikely
    } catch (const SamplerStallError& e) {
        CHECK(e.block() == 0);
        CHECK(e.tries() == 5);
    }
    CHECK(is_feasible(*d, s.c));
}

TEST_CASE("block-start measure") {
    CounterRng rng(8);
    const std::size_t n = 10, k = 2;
    const double w = 3.0;
    const std::size_t positions = n - k;
    std::vector<double> counts(positions, 0);
    for (int t = 0; t < 200000; ++t) counts[draw_block_start(n, k, w, rng)] += 1;
    const double z = static_cast<double>(positions) - 2 + 2 * w;
    std::vector<double> probs(positions, 1.0 / z);
    probs.front() = probs.back() = w / z;
    CHECK(stats::chi2_gof_pvalue(counts, probs) > 0.001);
}

TEST_CASE("zero steps keep the initial state") {
    SamplerConfig sc;
    sc.dist = uniform(6);
    sc.steps = 0;
    const GibbsTrace t = run_gibbs(sc);
    CHECK(t.samples.empty());
    CHECK(t.final_state == default_initial_state(*sc.dist));
}

TEST_CASE("default initial state is half the Metropolis super-diagonal") {
    FamilyParams p;
    const auto g = make_distribution(Family::geometric, 5, p);
    const BDKernel m = metropolis_kernel(g);
    const auto c = default_initial_state(*g);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == 0.5 * m.up(i));
}

TEST_CASE("determinism and feasibility of every retained sample") {
    FamilyParams p;
    for (std::size_t k : {1u, 3u}) {
        SamplerConfig sc;
        sc.dist = make_distribution(Family::geometric, 12, p);
        sc.k = k;
        sc.w = 2.0;
        sc.steps = 3000;
        sc.burnin = 100;
        sc.thin = 7;
        sc.seed = 42;
        const GibbsTrace a = run_gibbs(sc);
        const GibbsTrace b = run_gibbs(sc);
        CHECK(a.samples == b.samples);
        CHECK(a.samples.size() == (3000 - 100) / 7);
        for (const auto& c : a.samples) CHECK(is_feasible(*sc.dist, c));
        std::uint64_t updates = 0;
        for (auto u : a.update_counts) updates += u;
        CHECK(updates == 3000 * k);
    }
}

TEST_CASE("sampler config validation") {
    SamplerConfig sc;
    CHECK_THROWS_AS(sc.validate(), ParameterError);
    sc.dist = uniform(4);
    sc.k = 4;
    CHECK_THROWS_AS(sc.validate(), ParameterError);
    sc.k = 1;
    sc.thin = 0;
    CHECK_THROWS_AS(sc.validate(), ParameterError);
    sc.thin = 1;
    sc.w = 0;
    CHECK_THROWS_AS(sc.validate(), ParameterError);
}

TEST_CASE("n=3 Gibbs mean of c0") {
    SamplerConfig sc;
    sc.dist = uniform(3);
    sc.steps = 200000;
    sc.thin = 4;
    sc.seed = 5;
    std::vector<double> c0;
    run_gibbs(sc, [&](const std::vector<double>& c, std::uint64_t) { c0.push_back(c[0]); });
    CHECK(std::abs(stats::mean(c0) - 1.0 / 3.0) <= 4 * stats::std_error(c0));
}

TEST_CASE("oracle sampler") {
    CounterRng rng(21);
    FamilyParams p;
    const auto g2 = make_distribution(Family::geometric, 2, p);
    std::vector<double> xs;
    for (int t = 0; t < 20000; ++t) xs.push_back(oracle_sample(*g2, rng)[0]);
    CHECK(stats::ks_distance(xs, [](double x) { return x; }) < 0.015);

    const auto u3 = uniform(3);
    std::vector<double> c0;
    std::uint64_t tries_total = 0;
    for (int t = 0; t < 40000; ++t) {
        std::uint64_t tries = 0;
        c0.push_back(oracle_sample(*u3, rng, 1000, &tries)[0]);
        tries_total += tries;
    }
    CHECK(40000.0 / tries_total == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(stats::mean(c0) - 1.0 / 3.0) <= 3 * stats::std_error(c0));
    CHECK_THROWS_AS(oracle_sample(*uniform(40), rng, 10), OracleInfeasibleError);
}

TEST_CASE("coupled pair") {
    SamplerConfig sc;
    sc.dist = uniform(10);
    sc.steps = 5000;
    sc.seed = 3;
    const auto x = default_initial_state(*sc.dist);
    const CoupledRun same = run_coupled_pair(sc, x, x, false);
    CHECK(same.coalescence == std::uint64_t{0});
    for (auto d : same.distance) CHECK(d == 0);

    const std::vector<double> zero(9, 0.0);
    const CoupledRun r = run_coupled_pair(sc, zero, x, false);
    REQUIRE(r.coalescence.has_value());
    for (std::size_t t = 0; t < r.distance.size(); ++t) {
        CHECK(r.distance[t] <= 9);
        if (t >= *r.coalescence) CHECK(r.distance[t] == 0);
    }
    CHECK(hamming(zero, x) == 9);
}

}
