#pragma once

// Small statistical helpers for the tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace stats {

// Upper-tail p-value of a chi-square statistic.
inline double chi2_pvalue(double stat, double dof) {
    if (dof <= 0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// Goodness of fit against expected probabilities; cells with zero
// expectation must have zero counts and are skipped.
inline double chi2_gof_pvalue(const std::vector<double>& counts, const std::vector<double>& probs) {
    double total = 0;
    for (double c : counts) total += c;
    double stat = 0;
    int cells = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] <= 0) {
            if (counts[i] > 0) return 0.0;
            continue;
        }
        const double e = total * probs[i];
        stat += (counts[i] - e) * (counts[i] - e) / e;
        ++cells;
    }
    return chi2_pvalue(stat, cells - 1);
}

// Two-sample homogeneity test on binned counts.
inline double chi2_homogeneity_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
    double na = 0, nb = 0;
    for (double x : a) na += x;
    for (double x : b) nb += x;
    double stat = 0;
    int cells = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double tot = a[i] + b[i];
        if (tot == 0) continue;
        const double ea = tot * na / (na + nb);
        const double eb = tot * nb / (na + nb);
        stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
        ++cells;
    }
    return chi2_pvalue(stat, cells - 1);
}

inline double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// One-sample KS distance against a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> v, Cdf cdf) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    return d;
}

// Cell probabilities of the uniform law on {x, y >= 0, x + y <= 1} over a
// bins x bins grid of the unit square.
inline std::vector<double> triangle_cells(int bins) {
    std::vector<double> p(static_cast<std::size_t>(bins * bins), 0.0);
    const double cell = 1.0 / (bins * bins);
    for (int a = 0; a < bins; ++a) {
        for (int b = 0; b < bins; ++b) {
            double area = 0;
            if (a + b + 2 <= bins) area = cell;
            else if (a + b + 1 == bins) area = cell / 2;
            p[static_cast<std::size_t>(a * bins + b)] = 2.0 * area;
        }
    }
    return p;
}

inline void add_to_grid(std::vector<double>& grid, int bins, double x, double y) {
    const int a = std::min(bins - 1, static_cast<int>(x * bins));
    const int b = std::min(bins - 1, static_cast<int>(y * bins));
    grid[static_cast<std::size_t>(a * bins + b)] += 1;
}

}  // namespace stats
