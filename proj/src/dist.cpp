#include "bdcutoff/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdcutoff/errors.hpp"

namespace bdcutoff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative slack applied when comparing a prefix mass against a quantile
// level; log-sum-exp round trips can land a few ulps below an exact tie.
constexpr double kQuantileTieSlack = 1e-13;

std::size_t if_flat_halfwidth(std::size_t n, double eps) {
    // floor(n^eps), nudged so exact powers (100^0.5) are not lost to rounding.
    const double w = std::exp(eps * std::log(static_cast<double>(n)));
    return static_cast<std::size_t>(std::floor(w * (1.0 + 1e-12)));
}

}  // namespace

double log_add_exp(double a, double b) noexcept {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

std::string_view family_name(Family f) {
    switch (f) {
        case Family::uniform: return "uniform";
        case Family::geometric: return "geometric";
        case Family::if_: return "if";
        case Family::binomial: return "binomial";
        case Family::explicit_: return "explicit";
    }
    return "explicit";
}

Family parse_family(std::string_view name) {
    if (name == "uniform") return Family::uniform;
    if (name == "geometric") return Family::geometric;
    if (name == "if") return Family::if_;
    if (name == "binomial") return Family::binomial;
    if (name == "explicit") return Family::explicit_;
    throw ParameterError("unknown distribution family '" + std::string(name) + "'");
}

StationaryDist StationaryDist::make(Family family, std::size_t n, const FamilyParams& params) {
    if (n < 2) throw ParameterError("distribution needs n >= 2");
    StationaryDist d;
    d.family_ = family;
    d.n_param_ = n;
    d.params_ = params;
    switch (family) {
        case Family::uniform:
            d.log_mass_.assign(n, 0.0);
            break;
        case Family::geometric: {
            if (!(params.a > 1.0)) throw ParameterError("geometric family needs a > 1");
            const double la = std::log(params.a);
            d.log_mass_.resize(n);
            for (std::size_t i = 0; i < n; ++i) d.log_mass_[i] = static_cast<double>(i) * la;
            break;
        }
        case Family::binomial: {
            const double coins = static_cast<double>(n - 1);
            d.log_mass_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double k = static_cast<double>(i);
                d.log_mass_[i] =
                    std::lgamma(coins + 1.0) - std::lgamma(k + 1.0) - std::lgamma(coins - k + 1.0);
            }
            break;
        }
        case Family::if_: {
            if (!(params.a > 1.0)) throw ParameterError("IF family needs a > 1");
            if (!(params.eps > 0.0 && params.eps < 1.0)) {
                throw ParameterError("IF family needs 0 < eps < 1");
            }
            const std::size_t states = 2 * n - 1;
            const std::size_t centre = n - 1;
            const std::size_t half = std::min(if_flat_halfwidth(n, params.eps), centre);
            d.flat_lo_ = centre - half;
            d.flat_hi_ = centre + half;
            const double la = std::log(params.a);
            d.log_mass_.resize(states);
            for (std::size_t j = 0; j < states; ++j) {
                std::size_t depth = 0;
                if (j < d.flat_lo_) depth = d.flat_lo_ - j;
                if (j > d.flat_hi_) depth = j - d.flat_hi_;
                d.log_mass_[j] = -static_cast<double>(depth) * la;
            }
            break;
        }
        case Family::explicit_: {
            if (params.masses.size() != n) {
                throw ParameterError("explicit family: mass list length must equal n");
            }
            d.log_mass_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double m = params.masses[i];
                if (!(m > 0.0) || !std::isfinite(m)) {
                    throw DomainError("explicit family: mass at state " + std::to_string(i) +
                                      " is not strictly positive");
                }
                d.log_mass_[i] = std::log(m);
            }
            break;
        }
    }
    d.finalize();
    return d;
}

StationaryDist StationaryDist::from_log_mass(std::vector<double> log_mass) {
    if (log_mass.size() < 2) throw ParameterError("distribution needs n >= 2");
    for (std::size_t i = 0; i < log_mass.size(); ++i) {
        if (!std::isfinite(log_mass[i])) {
            throw DomainError("log mass at state " + std::to_string(i) + " is not finite");
        }
    }
    StationaryDist d;
    d.family_ = Family::explicit_;
    d.n_param_ = log_mass.size();
    d.log_mass_ = std::move(log_mass);
    d.finalize();
    return d;
}

void StationaryDist::finalize() {
    const std::size_t n = log_mass_.size();
    double log_z = kNegInf;
    for (double lm : log_mass_) log_z = log_add_exp(log_z, lm);
    for (double& lm : log_mass_) lm -= log_z;

    log_prefix_.resize(n);
    log_suffix_.resize(n);
    double acc = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
        acc = log_add_exp(acc, log_mass_[i]);
        log_prefix_[i] = std::min(acc, 0.0);
    }
    acc = kNegInf;
    for (std::size_t i = n; i-- > 0;) {
        acc = log_add_exp(acc, log_mass_[i]);
        log_suffix_[i] = std::min(acc, 0.0);
    }
    prefix_.resize(n);
    for (std::size_t i = 0; i < n; ++i) prefix_[i] = std::exp(log_prefix_[i]);
    prefix_[n - 1] = 1.0;

    ratio_.resize(n - 1);
    log_ratio_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        ratio_[i] = closed_form_ratio(i);
        log_ratio_[i] = closed_form_log_ratio(i);
    }
}

double StationaryDist::log_mass(std::size_t i) const {
    if (i >= size()) throw BoundsError("state index out of range");
    return log_mass_[i];
}

double StationaryDist::mass(std::size_t i) const { return std::exp(log_mass(i)); }

double StationaryDist::closed_form_log_ratio(std::size_t i) const {
    switch (family_) {
        case Family::uniform: return 0.0;
        case Family::geometric: return std::log(params_.a);
        case Family::binomial: {
            const double coins = static_cast<double>(size() - 1);
            const double k = static_cast<double>(i);
            return std::log((coins - k) / (k + 1.0));
        }
        case Family::if_:
            if (i < flat_lo_) return std::log(params_.a);
            if (i >= flat_hi_) return -std::log(params_.a);
            return 0.0;
        case Family::explicit_: break;
    }
    return log_mass_[i + 1] - log_mass_[i];
}

double StationaryDist::closed_form_ratio(std::size_t i) const {
    switch (family_) {
        case Family::uniform: return 1.0;
        case Family::geometric: return params_.a;
        case Family::binomial: {
            const double coins = static_cast<double>(size() - 1);
            const double k = static_cast<double>(i);
            return (coins - k) / (k + 1.0);
        }
        case Family::if_:
            if (i < flat_lo_) return params_.a;
            if (i >= flat_hi_) return 1.0 / params_.a;
            return 1.0;
        case Family::explicit_: break;
    }
    return std::exp(log_mass_[i + 1] - log_mass_[i]);
}

double StationaryDist::log_ratio(std::size_t i) const {
    if (i + 1 >= size()) throw BoundsError("ratio index out of range");
    return log_ratio_[i];
}

double StationaryDist::ratio(std::size_t i) const {
    if (i + 1 >= size()) throw BoundsError("ratio index out of range");
    return ratio_[i];
}

double StationaryDist::prefix_mass(std::size_t i) const {
    if (i >= size()) throw BoundsError("prefix index out of range");
    return prefix_[i];
}

double StationaryDist::log_prefix_mass(std::size_t i) const {
    if (i >= size()) throw BoundsError("prefix index out of range");
    return log_prefix_[i];
}

double StationaryDist::suffix_mass(std::size_t i) const {
    return std::exp(log_suffix_mass(i));
}

double StationaryDist::log_suffix_mass(std::size_t i) const {
    if (i >= size()) throw BoundsError("suffix index out of range");
    return log_suffix_[i];
}

std::size_t StationaryDist::quantile(double delta) const {
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("quantile level must lie in (0, 1)");
    const double target = delta * (1.0 - kQuantileTieSlack);
    const auto it = std::lower_bound(prefix_.begin(), prefix_.end(), target);
    return static_cast<std::size_t>(it - prefix_.begin());
}

bool StationaryDist::is_symmetric(double tol) const {
    const std::size_t n = size();
    for (std::size_t j = 0; j < n / 2; ++j) {
        if (std::abs(log_mass_[j] - log_mass_[n - 1 - j]) > tol) return false;
    }
    return true;
}

DistPtr make_distribution(Family family, std::size_t n, const FamilyParams& params) {
    return std::make_shared<const StationaryDist>(StationaryDist::make(family, n, params));
}

}  // namespace bdcutoff
