#include "bdcutoff/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdcutoff/errors.hpp"

namespace bdcutoff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_metropolis_up(const StationaryDist& d, std::size_t e) {
    return std::log(0.25) + std::min(0.0, d.log_ratio(e));
}

struct SideScan {
    double best = 0;
    std::size_t arg = 0;
};

// sum_{e=x}^{m-1} 1/(pi(e) M[e,e+1]) * pi([0, x]), maximised over x < m.
SideScan scan_below(const StationaryDist& d, std::size_t m) {
    SideScan s{0, m};
    double log_r = kNegInf;
    for (std::size_t x = m; x-- > 0;) {
        log_r = log_add_exp(log_r, -d.log_mass(x) - log_metropolis_up(d, x));
        const double v = std::exp(log_r + d.log_prefix_mass(x));
        if (v > s.best) s = {v, x};
    }
    return s;
}

// sum_{e=m}^{x-1} 1/(pi(e) M[e,e+1]) * pi([x, n-1]), maximised over x > m.
SideScan scan_above(const StationaryDist& d, std::size_t m) {
    SideScan s{0, m};
    double log_r = kNegInf;
    for (std::size_t x = m + 1; x < d.size(); ++x) {
        log_r = log_add_exp(log_r, -d.log_mass(x - 1) - log_metropolis_up(d, x - 1));
        const double v = std::exp(log_r + d.log_suffix_mass(x));
        if (v > s.best) s = {v, x};
    }
    return s;
}

}  // namespace

MetropolisReport metropolis_report(const DistPtr& dist) {
    if (dist->size() < 5) throw ParameterError("Metropolis comparison needs at least 5 states");
    const BDKernel k = metropolis_kernel(dist);
    MetropolisReport r;
    r.u = dist->quantile(0.25);
    r.m = dist->quantile(0.5);
    r.v = dist->quantile(0.75);
    r.hit_up = expected_hitting_time(k, 0, r.v);
    r.hit_down = expected_hitting_time(k, k.size() - 1, r.u);
    r.tau_met = std::max(r.hit_up, r.hit_down);
    r.gap_met = spectral_gap(k);
    r.b_met = miclo_bounds(k).b;
    r.product_met = r.tau_met * r.gap_met;
    return r;
}

XnChoice find_xn(const DistPtr& dist, double alpha) {
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    if (alpha > 1.0) throw ParameterError("alpha above 1 cannot be attained");
    const StationaryDist& d = *dist;
    const std::size_t m = d.quantile(0.5);
    const SideScan lo = scan_below(d, m);
    const SideScan hi = scan_above(d, m);
    const double b = std::max(lo.best, hi.best);
    if (!(b > 0.0)) throw ParameterError("distribution too small for a comparison index");
    XnChoice c;
    if (lo.best >= alpha * b * (1.0 - 1e-12)) {
        c.x_n = lo.arg;
        c.side = XnSide::below_median;
        c.sum_value = lo.best;
    } else {
        c.x_n = hi.arg;
        c.side = XnSide::above_median;
        c.sum_value = hi.best;
    }
    c.alpha_achieved = c.sum_value / b;
    return c;
}

FunctionalValues eval_functionals(const DistPtr& dist, const XnChoice& xn,
                                  const std::vector<double>& weights) {
    const StationaryDist& d = *dist;
    const std::size_t n = d.size();
    if (weights.size() != n) throw ParameterError("weight vector length must equal the state count");
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0.0 || std::isnan(weights[i])) {
            throw DomainError("weight at state " + std::to_string(i) + " is negative");
        }
    }
    if (xn.x_n >= n) throw BoundsError("x_n out of range");
    const std::size_t u = d.quantile(0.25);
    const std::size_t m = d.quantile(0.5);
    const std::size_t v = d.quantile(0.75);

    FunctionalValues out;
    double inv_beta1 = 0;
    for (std::size_t s = 0; s < v; ++s) {
        const double term = std::exp(d.log_prefix_mass(s) - d.log_mass(s));
        out.f_first += weights[s] * term;
        inv_beta1 += term;
    }
    for (std::size_t s = u + 1; s < n; ++s) {
        out.f_second += weights[s] * std::exp(d.log_suffix_mass(s) - d.log_mass(s));
    }
    out.beta1 = 1.0 / inv_beta1;
    out.f_value = out.beta1 * std::max(out.f_first, out.f_second);

    double g_hat = 0;
    double inv_beta2 = 0;
    if (xn.side == XnSide::below_median) {
        if (xn.x_n >= m) throw ParameterError("x_n must lie below the median on this side");
        for (std::size_t e = xn.x_n; e < m; ++e) {
            const double term = std::exp(d.log_prefix_mass(xn.x_n) - d.log_mass(e));
            g_hat += weights[e] * term;
            inv_beta2 += term;
        }
    } else {
        if (xn.x_n <= m) throw ParameterError("x_n must lie above the median on this side");
        for (std::size_t e = m; e < xn.x_n; ++e) {
            const double term = std::exp(d.log_suffix_mass(xn.x_n) - d.log_mass(e));
            g_hat += weights[e] * term;
            inv_beta2 += term;
        }
    }
    out.beta2 = 1.0 / inv_beta2;
    out.g_value = out.beta2 * g_hat;
    return out;
}

double empirical_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw EmptyReportError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

ComparisonReport comparison_diagnostic(const DistPtr& dist, const std::vector<BDKernel>& kernels,
                                       double alpha) {
    if (kernels.empty()) throw EmptyReportError("comparison needs at least one kernel");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
    ComparisonReport rep;
    rep.metropolis = metropolis_report(dist);
    rep.alpha = alpha;
    rep.threshold = 24576.0 / alpha;
    std::vector<double> ratios;
    for (const BDKernel& k : kernels) {
        if (k.size() != dist->size()) throw ParameterError("kernel does not match the distribution");
        ComparisonRow row;
        row.gap = spectral_gap(k);
        row.tau_proxy = hitting_proxy(k, 0.75).value;
        row.product = row.tau_proxy * row.gap;
        row.ratio = row.product / rep.metropolis.product_met;
        row.exceeds = row.ratio > rep.threshold;
        if (row.exceeds) ++rep.exceed_count;
        ratios.push_back(row.ratio);
        rep.rows.push_back(row);
    }
    rep.quantile_levels = {0.05, 0.25, 0.5, 0.75, 0.95};
    for (double q : rep.quantile_levels) rep.ratio_quantiles.push_back(empirical_quantile(ratios, q));
    return rep;
}

}  // namespace bdcutoff
