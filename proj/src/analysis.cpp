#include "bdcutoff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bdcutoff/errors.hpp"
#include "bdcutoff/tridiag.hpp"

namespace bdcutoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMonotoneSlack = 1e-12;

[[noreturn]] void throw_cut(std::size_t edge) {
    throw NonErgodicError(edge, "transition between states " + std::to_string(edge) + " and " +
                                    std::to_string(edge + 1) + " has probability zero");
}

// Tridiagonal transition arrays for repeated application mu -> mu K.
struct Stepper {
    std::vector<double> up, down, stay;

    explicit Stepper(const BDKernel& k) : up(k.size()), down(k.size()), stay(k.size()) {
        for (std::size_t i = 0; i < k.size(); ++i) {
            up[i] = k.up(i);
            down[i] = k.down(i);
            stay[i] = k.stay(i);
        }
    }

    void apply(const std::vector<double>& mu, std::vector<double>& out) const {
        const std::size_t n = mu.size();
        for (std::size_t j = 0; j < n; ++j) {
            double v = mu[j] * stay[j];
            if (j > 0) v += mu[j - 1] * up[j - 1];
            if (j + 1 < n) v += mu[j + 1] * down[j + 1];
            out[j] = v;
        }
    }
};

std::vector<double> linear_masses(const StationaryDist& d) {
    std::vector<double> p(d.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = d.mass(i);
    return p;
}

bool reducible(const BDKernel& k) { return first_cut_edge(k) < k.size() - 1; }

}  // namespace

double expected_hitting_time(const BDKernel& kernel, std::size_t i, std::size_t j) {
    const StationaryDist& d = kernel.dist();
    const std::size_t n = kernel.size();
    if (i >= n || j >= n) throw BoundsError("hitting-time state out of range");
    const auto& c = kernel.superdiagonal();
    double total = 0.0;
    if (i < j) {
        // E_v[T_{v+1}] = P(q <= v) / (pi(v) c[v])
        for (std::size_t v = i; v < j; ++v) {
            if (!(c[v] > 0.0)) throw_cut(v);
            total += std::exp(d.log_prefix_mass(v) - d.log_mass(v)) / c[v];
        }
    } else if (i > j) {
        // E_v[T_{v-1}] = P(q >= v) / (pi(v) K[v, v-1]) = P(q >= v) / (pi(v-1) c[v-1])
        for (std::size_t v = j + 1; v <= i; ++v) {
            if (!(c[v - 1] > 0.0)) throw_cut(v - 1);
            total += std::exp(d.log_suffix_mass(v) - d.log_mass(v - 1)) / c[v - 1];
        }
    }
    return total;
}

MicloBounds miclo_bounds(const BDKernel& kernel) {
    const StationaryDist& d = kernel.dist();
    const std::size_t n = kernel.size();
    const auto& c = kernel.superdiagonal();
    MicloBounds out;
    const std::size_t m = d.quantile(0.5);
    out.median = m;
    out.argmax_plus = m;
    out.argmax_minus = m;

    // Resistances 1 / (pi(e) c[e]) accumulate in log space.
    double log_r = kNegInf;
    for (std::size_t x = m + 1; x < n; ++x) {
        const std::size_t e = x - 1;
        if (!(c[e] > 0.0)) throw_cut(e);
        log_r = log_add_exp(log_r, -d.log_mass(e) - std::log(c[e]));
        const double v = std::exp(log_r + d.log_suffix_mass(x));
        if (v > out.b_plus) {
            out.b_plus = v;
            out.argmax_plus = x;
        }
    }
    log_r = kNegInf;
    for (std::size_t x = m; x-- > 0;) {
        if (!(c[x] > 0.0)) throw_cut(x);
        log_r = log_add_exp(log_r, -d.log_mass(x) - std::log(c[x]));
        const double v = std::exp(log_r + d.log_prefix_mass(x));
        if (v > out.b_minus) {
            out.b_minus = v;
            out.argmax_minus = x;
        }
    }
    out.b = std::max(out.b_plus, out.b_minus);
    if (out.b > 0.0) {
        out.lower = 1.0 / (4.0 * out.b);
        out.upper = 2.0 / out.b;
    } else {
        out.degenerate = true;
        out.lower = 0.0;
        out.upper = kInf;
    }
    return out;
}

double spectral_gap(const BDKernel& kernel) {
    const StationaryDist& d = kernel.dist();
    const std::size_t n = kernel.size();
    const auto& c = kernel.superdiagonal();
    // I - S keeps the small quantities (outflows) exact on the diagonal.
    std::vector<double> diag(n), off(n - 1);
    for (std::size_t i = 0; i < n; ++i) diag[i] = kernel.up(i) + kernel.down(i);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        off[i] = -c[i] * std::exp(-0.5 * d.log_ratio(i));
    }
    const SymTridiagonal generator(std::move(diag), std::move(off));
    const double lambda0 = generator.kth_smallest(0, 1e-14);
    if (std::abs(lambda0) > 1e-8) {
        throw NumericalError("top eigenvalue deviates from 1 by " + std::to_string(lambda0));
    }
    return std::max(0.0, generator.kth_smallest(1));
}

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
    if (mu.size() != nu.size()) throw ParameterError("TV distance needs equal-length vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

std::vector<std::uint64_t> mixing_profile(const BDKernel& kernel, std::span<const double> levels,
                                          const MixingOptions& options) {
    for (double eps : levels) {
        if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("mixing level must lie in (0, 1)");
    }
    const std::size_t n = kernel.size();
    const Stepper step(kernel);
    const std::vector<double> pi = linear_masses(kernel.dist());

    std::vector<std::size_t> starts;
    if (options.starts == StartSet::all_states) {
        for (std::size_t s = 0; s < n; ++s) starts.push_back(s);
    } else {
        starts = {0, n - 1};
    }

    std::vector<std::uint64_t> worst(levels.size(), 0);
    std::vector<double> mu(n), next(n);
    for (std::size_t s : starts) {
        std::fill(mu.begin(), mu.end(), 0.0);
        mu[s] = 1.0;
        std::vector<bool> crossed(levels.size(), false);
        std::size_t remaining = levels.size();
        double prev = kInf;
        for (std::uint64_t t = 0;; ++t) {
            const double tv = tv_distance(mu, pi);
            if (tv > prev + kMonotoneSlack) {
                throw NumericalError("distance to stationarity increased at t=" + std::to_string(t));
            }
            prev = tv;
            for (std::size_t l = 0; l < levels.size(); ++l) {
                if (!crossed[l] && tv < levels[l]) {
                    crossed[l] = true;
                    --remaining;
                    worst[l] = std::max(worst[l], t);
                }
            }
            if (remaining == 0) break;
            if (t >= options.horizon) {
                throw NotMixedError(tv, reducible(kernel),
                                    "chain not mixed within horizon " +
                                        std::to_string(options.horizon) + " (TV " +
                                        std::to_string(tv) + ")");
            }
            step.apply(mu, next);
            mu.swap(next);
        }
    }
    return worst;
}

std::uint64_t mixing_time(const BDKernel& kernel, double eps, const MixingOptions& options) {
    const double levels[] = {eps};
    return mixing_profile(kernel, levels, options).front();
}

std::vector<double> distance_to_stationarity(const BDKernel& kernel, std::size_t start,
                                             std::size_t horizon) {
    const std::size_t n = kernel.size();
    if (start >= n) throw BoundsError("start state out of range");
    const Stepper step(kernel);
    const std::vector<double> pi = linear_masses(kernel.dist());
    std::vector<double> mu(n, 0.0), next(n);
    mu[start] = 1.0;
    std::vector<double> out;
    out.reserve(horizon + 1);
    for (std::size_t t = 0; t <= horizon; ++t) {
        out.push_back(tv_distance(mu, pi));
        step.apply(mu, next);
        mu.swap(next);
    }
    return out;
}

std::vector<double> worst_pair_distance(const BDKernel& kernel, std::size_t horizon) {
    const std::size_t n = kernel.size();
    const Stepper step(kernel);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) rows[s][s] = 1.0;
    std::vector<double> next(n);
    std::vector<double> out;
    out.reserve(horizon + 1);
    for (std::size_t t = 0; t <= horizon; ++t) {
        double d = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = x + 1; y < n; ++y) d = std::max(d, tv_distance(rows[x], rows[y]));
        }
        out.push_back(d);
        for (auto& r : rows) {
            step.apply(r, next);
            r.swap(next);
        }
    }
    return out;
}

HittingProxy hitting_proxy(const BDKernel& kernel, double delta) {
    if (!(delta > 0.5 && delta < 1.0)) throw ParameterError("proxy quantile must lie in (1/2, 1)");
    const StationaryDist& d = kernel.dist();
    HittingProxy h;
    h.up_target = d.quantile(delta);
    h.down_target = d.quantile(1.0 - delta);
    h.hit_up = expected_hitting_time(kernel, 0, h.up_target);
    h.hit_down = expected_hitting_time(kernel, kernel.size() - 1, h.down_target);
    h.value = std::max(h.hit_up, h.hit_down);
    return h;
}

CutoffProduct cutoff_product(const BDKernel& kernel, const CutoffOptions& options) {
    CutoffProduct out;
    out.gap = spectral_gap(kernel);
    out.tau_proxy = hitting_proxy(kernel, options.delta).value;
    out.proxy = out.tau_proxy * out.gap;
    if (options.exact_tau && kernel.size() <= options.exact_tau_max_n) {
        try {
            out.tau = mixing_time(kernel, 0.25, options.mixing);
            out.exact = static_cast<double>(*out.tau) * out.gap;
        } catch (const NotMixedError&) {
            // Too slow for the horizon: only the proxy is reported.
        }
    }
    return out;
}

DlpWindow dlp_window(const BDKernel& kernel, double eps, const MixingOptions& options) {
    if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("window level must lie in (0, 1/2)");
    const double levels[] = {0.25, eps, 1.0 - eps};
    const auto taus = mixing_profile(kernel, levels, options);
    DlpWindow w;
    w.tau_quarter = taus[0];
    w.tau_eps = taus[1];
    w.tau_one_minus_eps = taus[2];
    w.window = static_cast<double>(w.tau_eps) - static_cast<double>(w.tau_one_minus_eps);
    const double gap = spectral_gap(kernel);
    w.scale = gap > 0.0 ? std::sqrt(static_cast<double>(w.tau_quarter) / gap) : kInf;
    w.ratio = w.scale > 0.0 ? w.window / w.scale : 0.0;
    return w;
}

double sd_contraction(double c) {
    if (!(c > 1.0)) return 0.0;
    return 1.0 - (c - 1.0) * std::log(1.0 / (1.0 - 1.0 / c));
}

SdMixingBound sd_mixing_bound(const StationaryDist& dist, std::size_t i, std::size_t ell) {
    SdMixingBound out;
    for (std::size_t q = 1; q <= ell; ++q) {
        const std::size_t r = i + 2 + 2 * q;
        if (r + 1 >= dist.size()) throw BoundsError("mixing bound reaches past the last coordinate");
        const double c = 16.0 * std::min(dist.ratio(r), 1.0);
        if (!(c > 1.0)) ++out.clamped_terms;
        out.product_bound *= 1.0 - sd_contraction(c);
    }
    out.alternating_bound = alternating_mixing_bound(ell / 2);
    return out;
}

double alternating_mixing_bound(std::size_t blocks) {
    return std::pow(1.0 - 4.0 / 27.0, static_cast<double>(blocks));
}

AnalysisReport analyze(const BDKernel& kernel, const AnalysisOptions& options) {
    AnalysisReport r;
    r.states = kernel.size();
    r.gap = spectral_gap(kernel);
    r.miclo = miclo_bounds(kernel);
    const HittingProxy h = hitting_proxy(kernel, options.delta);
    r.hit_up = h.hit_up;
    r.hit_down = h.hit_down;
    r.tau_proxy = h.value;
    r.proxy_product = h.value * r.gap;
    r.cutoff_product = r.proxy_product;
    r.cutoff_is_proxy = true;
    if (options.exact_tau && kernel.size() <= options.exact_tau_max_n) {
        try {
            r.tau = mixing_time(kernel, 0.25, options.mixing);
            r.cutoff_product = static_cast<double>(*r.tau) * r.gap;
            r.cutoff_is_proxy = false;
            if (r.gap > 0.0) r.dlp_window = std::sqrt(static_cast<double>(*r.tau) / r.gap);
        } catch (const NotMixedError&) {
            // Falls back to the flagged proxy.
        }
    }
    return r;
}

}  // namespace bdcutoff
