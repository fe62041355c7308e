#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdcutoff {

enum class Family { uniform, geometric, if_, binomial, explicit_ };

std::string_view family_name(Family f);
// Throws ParameterError for unknown names.
Family parse_family(std::string_view name);

struct FamilyParams {
    double a = 2.0;     // geometric rate / IF decay rate, > 1
    double eps = 0.25;  // IF flat-window exponent, in (0, 1)
    // Explicit family only: linear (unnormalized) masses, all > 0.
    std::vector<double> masses;
};

// A fully supported distribution on states 0..size()-1, stored in log space.
//
// `n` is the family's size parameter. It equals the state count except for
// the IF family, which lives on 2n-1 states.
class StationaryDist {
public:
    static StationaryDist make(Family family, std::size_t n, const FamilyParams& params = {});
    static StationaryDist from_log_mass(std::vector<double> log_mass);

    Family family() const noexcept { return family_; }
    std::size_t n() const noexcept { return n_param_; }
    std::size_t size() const noexcept { return log_mass_.size(); }
    const FamilyParams& params() const noexcept { return params_; }

    double log_mass(std::size_t i) const;
    double mass(std::size_t i) const;
    const std::vector<double>& log_masses() const noexcept { return log_mass_; }

    // pi(i+1) / pi(i), exact closed form where the family has one.
    double ratio(std::size_t i) const;
    // Natural log of ratio(i), without forming the ratio.
    double log_ratio(std::size_t i) const;

    // sum_{q <= i} pi(q), and its log.
    double prefix_mass(std::size_t i) const;
    double log_prefix_mass(std::size_t i) const;
    // sum_{q >= i} pi(q), and its log.
    double suffix_mass(std::size_t i) const;
    double log_suffix_mass(std::size_t i) const;

    // Smallest k with prefix_mass(k) >= delta, for delta in (0, 1).
    std::size_t quantile(double delta) const;

    // Symmetric under i -> size()-1-i, to within `tol` in log mass.
    bool is_symmetric(double tol = 1e-12) const;

private:
    StationaryDist() = default;
    void finalize();
    double closed_form_ratio(std::size_t i) const;
    double closed_form_log_ratio(std::size_t i) const;

    Family family_ = Family::explicit_;
    std::size_t n_param_ = 0;
    FamilyParams params_;
    std::vector<double> log_mass_;
    std::vector<double> log_prefix_;
    std::vector<double> log_suffix_;
    std::vector<double> prefix_;
    std::vector<double> ratio_;
    std::vector<double> log_ratio_;
    // IF only: first and last index of the flat window.
    std::size_t flat_lo_ = 0;
    std::size_t flat_hi_ = 0;
};

using DistPtr = std::shared_ptr<const StationaryDist>;

DistPtr make_distribution(Family family, std::size_t n, const FamilyParams& params = {});

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b) noexcept;

}  // namespace bdcutoff
