#pragma once

#include <cstddef>
#include <vector>

#include "bdcutoff/analysis.hpp"

namespace bdcutoff {

// Statistics of the reference Metropolis chain M[i, i+1] = min(1, ratio(i)) / 4.
struct MetropolisReport {
    std::size_t u = 0;  // quantile(1/4)
    std::size_t m = 0;  // quantile(1/2)
    std::size_t v = 0;  // quantile(3/4)
    double hit_up = 0;    // E_0[T_v]
    double hit_down = 0;  // E_{n-1}[T_u]
    double tau_met = 0;
    double gap_met = 0;
    double b_met = 0;
    double product_met = 0;
};

MetropolisReport metropolis_report(const DistPtr& dist);

enum class XnSide { below_median, above_median };

struct XnChoice {
    std::size_t x_n = 0;
    XnSide side = XnSide::below_median;
    double sum_value = 0;       // the weighted sum at x_n
    double alpha_achieved = 0;  // sum_value / B_met
};

// Picks the maximiser of the below-median sum when it reaches alpha * B_met,
// otherwise the maximiser of the above-median sum. Sums use the same
// conventions as miclo_bounds on the Metropolis kernel.
XnChoice find_xn(const DistPtr& dist, double alpha);

struct FunctionalValues {
    double f_value = 0;  // beta1 * f_hat[w]
    double g_value = 0;  // beta2 * g_hat[w]
    double beta1 = 0;
    double beta2 = 0;
    double f_first = 0;   // unnormalised first branch of f_hat
    double f_second = 0;  // unnormalised second branch
};

// Weights are indexed by state, w[v] standing for x(v/n).
FunctionalValues eval_functionals(const DistPtr& dist, const XnChoice& xn,
                                  const std::vector<double>& weights);

struct ComparisonRow {
    double gap = 0;
    double tau_proxy = 0;
    double product = 0;
    double ratio = 0;  // product / product_met
    bool exceeds = false;
};

struct ComparisonReport {
    MetropolisReport metropolis;
    double alpha = 1;
    double threshold = 0;  // 24576 / alpha, applied to the ratio
    std::vector<ComparisonRow> rows;
    std::vector<double> quantile_levels;
    std::vector<double> ratio_quantiles;
    std::size_t exceed_count = 0;
};

ComparisonReport comparison_diagnostic(const DistPtr& dist, const std::vector<BDKernel>& kernels,
                                       double alpha = 1.0);

// Linear-interpolation quantile of an unsorted sample.
double empirical_quantile(std::vector<double> values, double level);

}  // namespace bdcutoff
