#include "bdcutoff/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdcutoff/errors.hpp"

namespace bdcutoff {

double upper_limit(const StationaryDist& dist, const std::vector<double>& c, std::size_t i) {
    if (i >= c.size()) throw BoundsError("coordinate index out of range");
    const double left = i == 0 ? 1.0 : 1.0 - c[i - 1] / dist.ratio(i - 1);
    const double right = dist.ratio(i) * (1.0 - (i + 1 < c.size() ? c[i + 1] : 0.0));
    return std::max(0.0, std::min(left, right));
}

double row_outflow(const StationaryDist& dist, const std::vector<double>& c, std::size_t row) {
    double out = 0.0;
    if (row > 0) out += c[row - 1] / dist.ratio(row - 1);
    if (row < c.size()) out += c[row];
    return out;
}

bool is_feasible(const StationaryDist& dist, const std::vector<double>& c, double tol) {
    if (c.size() + 1 != dist.size()) return false;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i] >= -tol)) return false;
    }
    // Each row's off-diagonal mass must not exceed one; this is equivalent
    // to the per-coordinate upper limits.
    for (std::size_t row = 0; row < dist.size(); ++row) {
        if (!(row_outflow(dist, c, row) <= 1.0 + tol)) return false;
    }
    return true;
}

BDKernel::BDKernel(DistPtr dist, std::vector<double> c) : dist_(std::move(dist)), c_(std::move(c)) {
    if (!dist_) throw ParameterError("kernel needs a distribution");
    const std::size_t n = dist_->size();
    if (c_.size() + 1 != n) {
        throw ParameterError("super-diagonal length must be n-1 (got " + std::to_string(c_.size()) +
                             " for n=" + std::to_string(n) + ")");
    }
    for (std::size_t i = 0; i < c_.size(); ++i) {
        const double v = c_[i];
        if (!(v >= -kFeasibilityTol)) {
            throw InfeasibleStateError(i, "negative super-diagonal entry at index " + std::to_string(i));
        }
        if (v < 0.0) c_[i] = 0.0;
    }
    // Row r couples c[r-1] and c[r]; the later coordinate is reported.
    for (std::size_t row = 0; row < n; ++row) {
        if (row_outflow(*dist_, c_, row) > 1.0 + kFeasibilityTol) {
            const std::size_t idx = std::min(row, c_.size() - 1);
            throw InfeasibleStateError(idx, "super-diagonal entry at index " + std::to_string(idx) +
                                                " violates the row-sum limit of state " +
                                                std::to_string(row));
        }
    }
    down_.resize(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) down_[i] = c_[i] / dist_->ratio(i);
}

double BDKernel::up(std::size_t i) const {
    if (i >= size()) throw BoundsError("state index out of range");
    return i < c_.size() ? c_[i] : 0.0;
}

double BDKernel::down(std::size_t i) const {
    if (i >= size()) throw BoundsError("state index out of range");
    return i == 0 ? 0.0 : down_[i - 1];
}

double BDKernel::stay(std::size_t i) const {
    const double s = 1.0 - up(i) - down(i);
    // Clamp roundoff at the boundary only; construction rejected real violations.
    if (s < 0.0 && s > -kFeasibilityTol) return 0.0;
    if (s > 1.0 && s < 1.0 + kFeasibilityTol) return 1.0;
    return s;
}

double BDKernel::at(std::size_t i, std::size_t j) const {
    if (i >= size() || j >= size()) throw BoundsError("kernel index out of range");
    if (j == i) return stay(i);
    if (j == i + 1) return up(i);
    if (i == j + 1) return down(i);
    return 0.0;
}

BDKernel kernel_from_superdiagonal(const SuperDiagState& state) {
    return BDKernel(state.dist, state.c);
}

std::vector<double> subdiagonal_view(const BDKernel& kernel) {
    std::vector<double> s(kernel.size() - 1);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = kernel.down(i + 1);
    return s;
}

BDKernel kernel_from_subdiagonal(DistPtr dist, const std::vector<double>& s) {
    if (!dist) throw ParameterError("kernel needs a distribution");
    std::vector<double> c(s.size());
    for (std::size_t i = 0; i < s.size() && i + 1 < dist->size(); ++i) c[i] = s[i] * dist->ratio(i);
    return BDKernel(std::move(dist), std::move(c));
}

BDKernel lazy(const BDKernel& kernel, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("laziness must lie in (0, 1)");
    std::vector<double> c = kernel.superdiagonal();
    for (double& v : c) v *= (1.0 - delta);
    return BDKernel(kernel.dist_ptr(), std::move(c));
}

BDKernel metropolis_kernel(DistPtr dist) {
    if (!dist) throw ParameterError("kernel needs a distribution");
    std::vector<double> c(dist->size() - 1);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.25 * std::min(1.0, dist->ratio(i));
    return BDKernel(std::move(dist), std::move(c));
}

std::size_t first_cut_edge(const BDKernel& kernel) {
    const auto& c = kernel.superdiagonal();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] <= 0.0) return i;
    }
    return c.size();
}

}  // namespace bdcutoff
