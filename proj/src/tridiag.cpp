#include "bdcutoff/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdcutoff/errors.hpp"

namespace bdcutoff {

SymTridiagonal::SymTridiagonal(std::vector<double> diag, std::vector<double> off)
    : a_(std::move(diag)) {
    const std::size_t n = a_.size();
    if (n == 0) throw ParameterError("empty tridiagonal matrix");
    if (off.size() + 1 != n) throw ParameterError("off-diagonal length must be n-1");
    b2_.resize(off.size());
    long double max_b2 = 0;
    for (std::size_t i = 0; i < off.size(); ++i) {
        b2_[i] = static_cast<long double>(off[i]) * off[i];
        max_b2 = std::max(max_b2, b2_[i]);
    }
    pivmin_ = std::numeric_limits<long double>::min() * std::max<long double>(1, max_b2);

    lo_ = std::numeric_limits<double>::infinity();
    hi_ = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0;
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < n) r += std::abs(off[i]);
        lo_ = std::min(lo_, a_[i] - r);
        hi_ = std::max(hi_, a_[i] + r);
    }
}

std::size_t SymTridiagonal::count_below(double x) const {
    // Pivots of the LDL^T factorisation of (T - xI); negatives count eigenvalues below x.
    std::size_t count = 0;
    long double q = static_cast<long double>(a_[0]) - x;
    if (std::abs(q) <= pivmin_) q = -pivmin_;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < a_.size(); ++i) {
        q = static_cast<long double>(a_[i]) - x - b2_[i - 1] / q;
        if (std::abs(q) <= pivmin_) q = -pivmin_;
        if (q < 0) ++count;
    }
    return count;
}

double SymTridiagonal::kth_smallest(std::size_t k, double abs_tol) const {
    if (k >= size()) throw BoundsError("eigenvalue index out of range");
    const double span = std::max(std::abs(lo_), std::abs(hi_));
    double lo = lo_ - 2 * std::numeric_limits<double>::epsilon() * span - 1e-300;
    double hi = hi_ + 2 * std::numeric_limits<double>::epsilon() * span + 1e-300;
    constexpr double kRel = 2 * std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 4096; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double width = hi - lo;
        if (width <= kRel * std::max(std::abs(lo), std::abs(hi)) ||
            width <= std::max(abs_tol, std::numeric_limits<double>::min())) {
            break;
        }
        if (count_below(mid) > k) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace bdcutoff
