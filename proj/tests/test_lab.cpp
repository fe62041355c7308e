#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bdcutoff/errors.hpp"
#include "bdcutoff/lab.hpp"
#include "bdcutoff/probes.hpp"

using namespace bdcutoff;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.family = Family::uniform;
    c.n_list = {16, 24};
    c.reps = 6;
    c.seed = 2024;
    return c;
}

}  // namespace

TEST_SUITE("lab") {

TEST_CASE("real formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5, 0.0, 4.9e-324}) {
        CHECK(parse_real(format_real(x)) == x);
    }
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(std::isnan(parse_real("nan")));
    CHECK_THROWS_AS(parse_real("12abc"), ParameterError);
}

TEST_CASE("CSV round trip with special values and awkward strings") {
    EnsembleRecord a;
    a.n = 64;
    a.family = "uniform";
    a.rep_id = 3;
    a.seed_sub = 18446744073709551615ULL;
    a.gap = 1.0 / 3.0;
    a.B_plus = std::numeric_limits<double>::infinity();
    a.B_minus = std::numeric_limits<double>::quiet_NaN();
    a.tau_or_proxy = 12345.678901234567;
    a.proxy_flag = false;
    a.cutoff_product = -0.0;
    a.max_recip_superdiag = 1e308;
    a.runtime_ms = 0;
    a.error = "bad, \"quoted\"\nline";
    EnsembleRecord b = a;
    b.rep_id = 4;
    b.error.clear();
    b.proxy_flag = true;
    const std::vector<EnsembleRecord> recs = {a, b};
    const std::string csv = records_to_csv(recs);
    CHECK(csv.rfind("# bdcutoff-v1\n", 0) == 0);
    CHECK(records_from_csv(csv) == recs);
    CHECK(records_to_csv(records_from_csv(csv)) == csv);
    CHECK_THROWS_AS(records_from_csv("n,family\n"), ParameterError);
}

TEST_CASE("ensemble basics") {
    ExperimentConfig c = small_config();
    c.reps = 0;
    CHECK(run_ensemble(c).empty());
    c.n_list.clear();
    CHECK_THROWS_AS(run_ensemble(c), ParameterError);
}

TEST_CASE("ensemble is deterministic and independent of thread count") {
    ExperimentConfig c = small_config();
    c.threads = 1;
    const auto one = run_ensemble(c);
    c.threads = 4;
    const auto four = run_ensemble(c);
    CHECK(one == four);
    CHECK(records_to_csv(one) == records_to_csv(four));
    CHECK(records_to_json(one) == records_to_json(four));
    REQUIRE(one.size() == 12);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].n == (i < 6 ? 16u : 24u));
        CHECK(one[i].rep_id == i % 6);
        CHECK(one[i].error.empty());
        CHECK(one[i].proxy_flag);
    }
    c.seed = 2025;
    CHECK_FALSE(run_ensemble(c) == one);
}

TEST_CASE("ensemble with exact tau and JSON mirror") {
    ExperimentConfig c = small_config();
    c.exact_tau = true;
    const auto recs = run_ensemble(c);
    for (const auto& r : recs) {
        CHECK_FALSE(r.proxy_flag);
        CHECK(r.tau_or_proxy == std::floor(r.tau_or_proxy));
        CHECK(r.cutoff_product == doctest::Approx(r.tau_or_proxy * r.gap));
    }
    const auto j = nlohmann::json::parse(records_to_json(recs));
    REQUIRE(j.size() == recs.size());
    CHECK(j[0]["n"] == 16);
    CHECK(j[0]["family"] == "uniform");
    CHECK(j[0]["gap"].get<double>() == recs[0].gap);
}

TEST_CASE("ensemble records satisfy the Miclo sandwich") {
    ExperimentConfig c;
    c.n_list = {128};
    c.reps = 100;
    c.seed = 5;
    for (const auto& r : run_ensemble(c)) {
        const double b = std::max(r.B_plus, r.B_minus);
        CHECK(1.0 / (4.0 * b) <= r.gap);
        CHECK(r.gap <= 2.0 / b * (1 + 1e-12));
        CHECK(r.max_recip_superdiag >= 1.0);
    }
}

TEST_CASE("errors are recorded in-row") {
    ExperimentConfig c = small_config();
    c.n_list = {12};
    c.k = 10;
    c.max_rejection_tries = 1;
    c.reps = 3;
    const auto recs = run_ensemble(c);
    REQUIRE(recs.size() == 3);
    for (const auto& r : recs) {
        CHECK_FALSE(r.error.empty());
        CHECK(std::isnan(r.gap));
    }
    CHECK(records_from_csv(records_to_csv(recs)) == recs);
}

TEST_CASE("atomic file writes") {
    const auto dir = std::filesystem::temp_directory_path() / "bdcutoff_lab_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.csv").string();
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == "second");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x").string(), "x"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("marginal probe") {
    ExperimentConfig c;
    c.n_list = {60};
    c.samples = 20000;
    c.seed = 1;
    const MarginalProbe p = probe_marginal(c);
    CHECK(p.samples == 20000);
    CHECK(p.source.method == "gibbs");
    CHECK(p.rows.back().x == 1.0);
    CHECK(p.rows.back().reference == doctest::Approx(1.0));
    CHECK(std::sin(std::numbers::pi / 6) == doctest::Approx(0.5));
    CHECK_FALSE(p.boundary_warning);
    // Interior coordinates follow the density 2cos^2(pi x/2); the sine law holds at the edge.
    CHECK(p.ks_interior_law < 0.02);
    CHECK(p.ks > 0.1);
    c.coordinate = 0;
    const MarginalProbe edge = probe_marginal(c);
    CHECK(edge.boundary_warning);
    CHECK(edge.ks < 0.02);
}

TEST_CASE("tail probe") {
    ExperimentConfig c;
    c.n_list = {80};
    c.samples = 40000;
    c.seed = 2;
    const TailProbe p = probe_tail(c);
    REQUIRE(p.rows.size() == 4);
    CHECK(p.monotone);
    CHECK(p.within_smallness);
    // Interior density at zero is 2, so x P[c < 1/x] tends to 2 there; at the edge it tends to pi/2.
    CHECK(std::abs(p.rows.back().f - 2.0) < 0.2);
    c.coordinate = 0;
    CHECK(std::abs(probe_tail(c).rows.back().f - std::numbers::pi / 2) < 0.2);
    for (const auto& r : p.rows) CHECK(r.se > 0);
}

TEST_CASE("Markov probe on the oracle sampler") {
    ExperimentConfig c;
    c.n_list = {8};
    c.samples = 1'000'000;
    c.seed = 3;
    const MarkovProbe p = probe_markov(c);
    CHECK(p.source.method == "oracle");
    CHECK(p.max_abs_rho <= 0.02);
    CHECK(p.shuffled_max_abs_rho <= 0.02);
    CHECK(p.adjacent_correlation <= -0.1);
    c.n_list = {5};
    CHECK_THROWS_AS(probe_markov(c), ParameterError);
}

TEST_CASE("structure probe on the oracle sampler") {
    ExperimentConfig c;
    c.n_list = {9};
    c.samples = 200000;
    c.seed = 4;
    const StructureProbe p = probe_structure(c);
    CHECK(p.largeness_ok);
    CHECK(p.upper_tail_ok);
    CHECK(p.smallness_ok);
    CHECK(p.smallness.size() == 27);
}

TEST_CASE("Levy-sum probe") {
    ExperimentConfig c;
    c.n_list = {170};
    c.window = 64;
    c.samples = 2000;
    c.seed = 6;
    const LevyProbe p = probe_levy_sum(c);
    CHECK(p.samples == 2000);
    CHECK(std::isfinite(p.small_quantiles[2]));
    CHECK(std::abs(p.small_quantiles[2]) <= 10);
    CHECK(p.ks <= 0.08);
    CHECK(p.raw_ratio >= 2.0);
    CHECK(p.raw_ratio <= 3.0);
    c.window = 100;
    CHECK_THROWS_AS(probe_levy_sum(c), ParameterError);
}

TEST_CASE("contraction probe: coupon collector and coalescence scaling") {
    ExperimentConfig c;
    c.n_list = {256};
    c.reps = 1000;
    c.seed = 7;
    c.max_coupling_factor = 0;  // coupon part only
    const ContractionProbe coupon = probe_contraction(c);
    CHECK(std::abs(coupon.coupon.observed - coupon.coupon.expected) <= 0.05);

    c.n_list = {32, 64, 128};
    c.reps = 200;
    c.max_coupling_factor = 200;
    const ContractionProbe p = probe_contraction(c);
    for (const auto& r : p.rows) {
        CHECK(r.coalesced == r.runs);
        CHECK(r.mean_over_nlogn >= 0.3);
        CHECK(r.mean_over_nlogn <= 5.0);
    }
    c.k = 4;
    c.n_list = {64};
    const ContractionProbe p4 = probe_contraction(c);
    MESSAGE("k=4 mean coalescence " << p4.rows[0].mean << " vs k=1 " << p.rows[1].mean);
}

}
