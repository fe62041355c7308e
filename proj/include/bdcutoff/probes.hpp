#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bdcutoff/lab.hpp"

namespace bdcutoff {

// Equilibrium draws for the probes. The oracle is used when requested, or
// automatically at 10 states or fewer; otherwise a Gibbs run with the
// configured budget as burn-in and one retained sample per `thin` updates
// (default: one per N updates).
struct SampleSource {
    std::string method;
    std::uint64_t burnin = 0;
    std::uint64_t thin = 0;
};

SampleSource draw_equilibrium(const ExperimentConfig& config, const DistPtr& dist,
                              std::uint64_t count, std::uint64_t stream,
                              const std::function<void(const std::vector<double>&)>& sink);

struct MarginalRow {
    double x = 0;
    double ecdf = 0;
    double reference = 0;  // sin(pi x / 2)
    double se = 0;
};

struct MarginalProbe {
    std::size_t states = 0;
    std::size_t coordinate = 0;
    std::uint64_t samples = 0;
    SampleSource source;
    bool boundary_warning = false;
    double ks = 0;  // against sin(pi x / 2)
    // Against x + sin(pi x)/pi, the stationary law of the one-step transition
    // P[z' <= z | x] = sin(pi/2 min(z, 1-x)) / sin(pi/2 (1-x)).
    double ks_interior_law = 0;
    std::vector<MarginalRow> rows;
};

MarginalProbe probe_marginal(const ExperimentConfig& config);

struct TailRow {
    double x = 0;
    double f = 0;  // x P[c < 1/x]
    double se = 0;
    double smallness_bound = 0;
    bool smallness_violation = false;
    bool monotone_violation = false;  // drop from the previous grid point beyond 3 se
};

struct TailProbe {
    std::size_t states = 0;
    std::size_t coordinate = 0;
    std::uint64_t samples = 0;
    SampleSource source;
    std::vector<TailRow> rows;
    bool monotone = true;
    bool within_smallness = true;
};

TailProbe probe_tail(const ExperimentConfig& config);

struct MarkovBin {
    double lo = 0;
    double hi = 0;
    std::size_t count = 0;
    double rho = 0;           // partial correlation of c[i-1], c[i+1] given c[i]
    double shuffled_rho = 0;  // same with c[i+1] permuted
    bool excluded = false;
};

struct MarkovProbe {
    std::size_t states = 0;
    std::size_t coordinate = 0;
    std::uint64_t samples = 0;
    SampleSource source;
    std::vector<MarkovBin> bins;
    double max_abs_rho = 0;
    double shuffled_max_abs_rho = 0;
    double adjacent_correlation = 0;  // corr(c[i], c[i+1])
    double rho_se = 0;                // 1 / sqrt(typical bin count)
};

MarkovProbe probe_markov(const ExperimentConfig& config);

struct LargenessRow {
    double a = 0, b = 0;
    double p_low = 0, p_high = 0, se = 0;
    bool ok = true;
};

struct UpperTailRow {
    double x = 0;
    double p = 0, se = 0, bound = 0;
    bool ok = true;
};

struct SmallnessRow {
    double d = 0;
    std::size_t left_bin = 0, right_bin = 0;
    std::size_t count = 0;
    double p = 0, se = 0, bound = 0;
    bool ok = true;
};

struct StructureProbe {
    std::size_t states = 0;
    std::size_t coordinate = 0;
    std::uint64_t samples = 0;
    SampleSource source;
    std::vector<LargenessRow> largeness;
    std::vector<UpperTailRow> upper_tail;
    std::vector<SmallnessRow> smallness;
    bool largeness_ok = true;
    bool upper_tail_ok = true;
    bool smallness_ok = true;
};

// Largeness intervals, the x min(1, ratio) tail bound and the D-smallness
// bound conditioned on coarse bins of c[i-2] and c[i+2].
StructureProbe probe_structure(const ExperimentConfig& config);

struct LevyProbe {
    std::size_t states = 0;
    std::size_t window = 0;
    std::uint64_t samples = 0;
    SampleSource source;
    std::vector<double> quantile_levels;
    std::vector<double> small_quantiles;  // S over the window
    std::vector<double> large_quantiles;  // S over twice the window
    double ks = 0;
    double raw_median_small = 0;
    double raw_median_large = 0;
    double raw_ratio = 0;
};

LevyProbe probe_levy_sum(const ExperimentConfig& config);

struct CoalescenceRow {
    std::size_t states = 0;
    std::size_t runs = 0;
    std::size_t coalesced = 0;
    double mean = 0;
    double se = 0;
    double median = 0;
    double p90 = 0;
    double mean_over_nlogn = 0;
};

struct CouponCheck {
    std::size_t positions = 0;
    std::size_t runs = 0;
    std::uint64_t steps = 0;
    double observed = 0;  // fraction of runs leaving some coordinate untouched
    double expected = 0;  // 1 - exp(-exp(c))
    double se = 0;
};

struct ContractionProbe {
    std::size_t k = 1;
    double w = 1;
    std::vector<CoalescenceRow> rows;
    double exponent = 0;  // slope of log mean vs log(N ln N); 0 with one row
    CouponCheck coupon;
};

ContractionProbe probe_contraction(const ExperimentConfig& config);

double ks_two_sample(std::vector<double> a, std::vector<double> b);
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bdcutoff
