#pragma once

#include <cstddef>
#include <vector>

#include "bdcutoff/dist.hpp"

namespace bdcutoff {

inline constexpr double kFeasibilityTol = 1e-12;

// A point of the feasible polytope: super-diagonal entries c[i] = K[i, i+1]
// for i = 0..n-2, with implicit c[-1] = c[n-1] = 0.
struct SuperDiagState {
    DistPtr dist;
    std::vector<double> c;

    std::size_t size() const noexcept { return c.size(); }
};

// Largest admissible value of c[i] given its neighbours:
//   min(1 - c[i-1] / ratio(i-1), ratio(i) * (1 - c[i+1])), floored at 0.
double upper_limit(const StationaryDist& dist, const std::vector<double>& c, std::size_t i);

// Off-diagonal mass leaving state `row`: K[row, row-1] + K[row, row+1].
double row_outflow(const StationaryDist& dist, const std::vector<double>& c, std::size_t row);

// True iff every coordinate lies in [-tol, upper_limit + tol].
bool is_feasible(const StationaryDist& dist, const std::vector<double>& c,
                 double tol = kFeasibilityTol);

// Reversible tridiagonal stochastic matrix in super-diagonal form.
class BDKernel {
public:
    // Validates feasibility; entries within tolerance of a boundary are clamped.
    BDKernel(DistPtr dist, std::vector<double> c);

    const StationaryDist& dist() const noexcept { return *dist_; }
    const DistPtr& dist_ptr() const noexcept { return dist_; }
    std::size_t size() const noexcept { return dist_->size(); }
    const std::vector<double>& superdiagonal() const noexcept { return c_; }

    // K[i, i+1], zero for the last state.
    double up(std::size_t i) const;
    // K[i, i-1], zero for state 0.
    double down(std::size_t i) const;
    // K[i, i] = 1 - up(i) - down(i).
    double stay(std::size_t i) const;
    // Dense entry lookup, zero off the tridiagonal band.
    double at(std::size_t i, std::size_t j) const;

    SuperDiagState state() const { return {dist_, c_}; }

private:
    DistPtr dist_;
    std::vector<double> c_;
    std::vector<double> down_;  // down_[i] = K[i+1, i]
};

BDKernel kernel_from_superdiagonal(const SuperDiagState& state);

// s[i] = K[i+1, i].
std::vector<double> subdiagonal_view(const BDKernel& kernel);
BDKernel kernel_from_subdiagonal(DistPtr dist, const std::vector<double>& s);

// delta * I + (1 - delta) * K, for delta in (0, 1).
BDKernel lazy(const BDKernel& kernel, double delta);

// M[i, i+1] = min(1, ratio(i)) / 4, M[i+1, i] = min(1, 1 / ratio(i)) / 4.
BDKernel metropolis_kernel(DistPtr dist);

// Index of the first zero super-diagonal entry, or size()-1 when none.
std::size_t first_cut_edge(const BDKernel& kernel);

}  // namespace bdcutoff
