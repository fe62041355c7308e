#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdcutoff/kernel.hpp"

namespace bdcutoff {

/// Expected hitting time E_i[T_j] by the adjacent-step formula.
///
/// Upward steps cost P(q <= v) / (pi(v) K[v, v+1]); downward steps use
/// suffix masses and sub-diagonal entries. Evaluated in log space, so the
/// kernel may carry masses far below the double range.
///
/// Throws NonErgodicError naming the first zero transition on the path.
double expected_hitting_time(const BDKernel& kernel, std::size_t i, std::size_t j);

struct MicloBounds {
    double b_plus = 0;
    double b_minus = 0;
    double b = 0;
    double lower = 0;  // 1 / (4B)
    double upper = 0;  // 2 / B
    std::size_t median = 0;
    // Maximising x on each side; equal to `median` when that side is empty.
    std::size_t argmax_plus = 0;
    std::size_t argmax_minus = 0;
    // Both sides empty: bounds are (0, inf).
    bool degenerate = false;
};

/// Hardy-type weighted sums around the median m = quantile(1/2):
///
///   B+ = max_{x > m} (sum_{y=m+1..x} 1 / (pi(y-1) K[y-1, y])) * pi([x, n-1])
///   B- = max_{x < m} (sum_{y=x..m-1} 1 / (pi(y) K[y, y+1])) * pi([0, x])
///
/// with B = max(B+, B-), so that 1/(4B) <= gap <= 2/B. The tail mass
/// includes the endpoint x; the exclusive variant does not bound the gap
/// from below.
MicloBounds miclo_bounds(const BDKernel& kernel);

/// 1 - lambda_2 of the kernel, from the symmetrised generator I - S,
/// S[i, i+1] = sqrt(K[i, i+1] K[i+1, i]). Throws NumericalError if the
/// smallest eigenvalue of I - S strays from 0 by more than 1e-8.
double spectral_gap(const BDKernel& kernel);

/// Half the L1 distance. Throws ParameterError on length mismatch.
double tv_distance(std::span<const double> mu, std::span<const double> nu);

enum class StartSet { endpoints, all_states };

struct MixingOptions {
    StartSet starts = StartSet::endpoints;
    std::uint64_t horizon = 10'000'000;
};

/// Worst-start first time the law is within eps of stationarity, for each
/// eps in `levels`. Row laws evolve by O(n) tridiagonal application; the
/// distance to stationarity is checked to be nonincreasing along the way.
/// Throws NotMixedError when the horizon is exhausted.
std::vector<std::uint64_t> mixing_profile(const BDKernel& kernel, std::span<const double> levels,
                                          const MixingOptions& options = {});

std::uint64_t mixing_time(const BDKernel& kernel, double eps, const MixingOptions& options = {});

/// d(t) = max over start pairs of TV between the evolved laws, t = 0..horizon.
std::vector<double> worst_pair_distance(const BDKernel& kernel, std::size_t horizon);

/// Distance to stationarity from `start`, t = 0..horizon.
std::vector<double> distance_to_stationarity(const BDKernel& kernel, std::size_t start,
                                             std::size_t horizon);

struct HittingProxy {
    std::size_t up_target = 0;    // quantile(delta)
    std::size_t down_target = 0;  // quantile(1 - delta)
    double hit_up = 0;            // E_0[T_up_target]
    double hit_down = 0;          // E_{n-1}[T_down_target]
    double value = 0;             // max of the two
};

/// Hitting-time stand-in for tau(1/4), delta in (1/2, 1).
HittingProxy hitting_proxy(const BDKernel& kernel, double delta = 0.75);

struct CutoffProduct {
    std::optional<double> exact;  // tau(1/4) * gap
    double proxy = 0;             // hitting proxy * gap
    double gap = 0;
    std::optional<std::uint64_t> tau;
    double tau_proxy = 0;
};

struct CutoffOptions {
    double delta = 0.75;
    bool exact_tau = true;
    std::size_t exact_tau_max_n = 512;
    MixingOptions mixing;
};

/// Both variants of tau * gap; the exact one only when allowed and the
/// chain mixes within the horizon.
CutoffProduct cutoff_product(const BDKernel& kernel, const CutoffOptions& options = {});

struct DlpWindow {
    std::uint64_t tau_quarter = 0;
    std::uint64_t tau_eps = 0;
    std::uint64_t tau_one_minus_eps = 0;
    double window = 0;  // tau(eps) - tau(1 - eps)
    double scale = 0;   // sqrt(tau(1/4) / gap)
    double ratio = 0;   // window / scale
};

/// Measured window against the sqrt(tau/gap) scale, eps in (0, 1/2).
DlpWindow dlp_window(const BDKernel& kernel, double eps = 0.25, const MixingOptions& options = {});

struct SdMixingBound {
    double product_bound = 1;  // prod_{q=1..ell} (1 - R)
    double alternating_bound = 1;   // (23/27)^floor(ell/2)
    // Factors with C <= 1, where R is undefined and taken as 0.
    std::size_t clamped_terms = 0;
};

/// Contraction factor R(C) = 1 - (C - 1) log(1 / (1 - 1/C)) for C > 1, else 0.
double sd_contraction(double c);

/// Super-diagonal spatial mixing bound over ell two-step hops from
/// coordinate i (0-based), with C = 16 min(ratio, 1) at each hop target.
SdMixingBound sd_mixing_bound(const StationaryDist& dist, std::size_t i, std::size_t ell);

/// Alternating-representation bound (1 - 4/27)^blocks.
double alternating_mixing_bound(std::size_t blocks);

struct AnalysisOptions {
    double delta = 0.75;
    bool exact_tau = false;
    std::size_t exact_tau_max_n = 512;
    MixingOptions mixing;
};

struct AnalysisReport {
    std::size_t states = 0;
    double gap = 0;
    MicloBounds miclo;
    double hit_up = 0;
    double hit_down = 0;
    std::optional<std::uint64_t> tau;
    double tau_proxy = 0;
    double cutoff_product = 0;
    bool cutoff_is_proxy = true;
    double proxy_product = 0;
    std::optional<double> dlp_window;  // sqrt(tau(1/4) / gap)
};

/// Full report for one kernel. Exact tau only with options.exact_tau and
/// states <= exact_tau_max_n; otherwise the hitting proxy is used and flagged.
AnalysisReport analyze(const BDKernel& kernel, const AnalysisOptions& options = {});

}  // namespace bdcutoff
