#pragma once

#include <cstddef>
#include <vector>

namespace bdcutoff {

// Symmetric tridiagonal matrix: diagonal a[0..n-1], off-diagonal b[0..n-2].
// Eigenvalues are located by Sturm-sequence bisection, O(n) per probe.
class SymTridiagonal {
public:
    SymTridiagonal(std::vector<double> diag, std::vector<double> off);

    std::size_t size() const noexcept { return a_.size(); }

    // Number of eigenvalues strictly below x.
    std::size_t count_below(double x) const;

    // k-th smallest eigenvalue (k = 0 is the minimum), to roughly machine
    // precision relative to its own magnitude, or to `abs_tol` if coarser.
    double kth_smallest(std::size_t k, double abs_tol = 0.0) const;

    // Gershgorin enclosure of the spectrum.
    double lower_bound() const noexcept { return lo_; }
    double upper_bound() const noexcept { return hi_; }

private:
    std::vector<double> a_;
    std::vector<long double> b2_;
    long double pivmin_ = 0;
    double lo_ = 0;
    double hi_ = 0;
};

}  // namespace bdcutoff
