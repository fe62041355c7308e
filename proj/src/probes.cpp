#include "bdcutoff/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bdcutoff/compare.hpp"
#include "bdcutoff/errors.hpp"
#include "bdcutoff/rng.hpp"
#include "bdcutoff/sampler.hpp"

namespace bdcutoff {

namespace {

DistPtr probe_dist(const ExperimentConfig& config) {
    config.validate();
    return make_distribution(config.family, config.n_list.front(), config.params);
}

std::size_t pick_coordinate(const ExperimentConfig& config, const DistPtr& dist) {
    const std::size_t coords = dist->size() - 1;
    const std::size_t c = config.coordinate.value_or((coords - 1) / 2);
    if (c >= coords) throw BoundsError("probe coordinate out of range");
    return c;
}

double binomial_se(double p, double count) {
    return count > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / count) : 0.0;
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptyReportError("KS statistic needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

SampleSource draw_equilibrium(const ExperimentConfig& config, const DistPtr& dist,
                              std::uint64_t count, std::uint64_t stream,
                              const std::function<void(const std::vector<double>&)>& sink) {
    SampleSource src;
    const std::size_t states = dist->size();
    const bool use_oracle = config.sampler_mode == SamplerMode::oracle ||
                            (config.sampler_mode == SamplerMode::automatic && states <= 10);
    const std::uint64_t key = derive_stream(config.seed, stream);
    if (use_oracle) {
        src.method = "oracle";
        CounterRng rng(key);
        for (std::uint64_t s = 0; s < count; ++s) sink(oracle_sample(*dist, rng));
        return src;
    }
    src.method = "gibbs";
    src.burnin = effective_budget(config, states);
    src.thin = config.thin > 0 ? config.thin : states;
    SamplerConfig sc;
    sc.dist = dist;
    sc.k = std::min(config.k, states - 1);
    sc.w = config.w;
    sc.burnin = src.burnin;
    sc.thin = src.thin;
    sc.steps = src.burnin + count * src.thin;
    sc.seed = key;
    sc.max_rejection_tries = config.max_rejection_tries;
    run_gibbs(sc, [&](const std::vector<double>& c, std::uint64_t) { sink(c); });
    return src;
}

MarginalProbe probe_marginal(const ExperimentConfig& config) {
    const DistPtr dist = probe_dist(config);
    MarginalProbe p;
    p.states = dist->size();
    p.coordinate = pick_coordinate(config, dist);
    const std::size_t coords = p.states - 1;
    p.boundary_warning = p.coordinate < 20 || coords - 1 - p.coordinate < 20;
    const double scale = std::min(1.0, dist->ratio(p.coordinate));
    std::vector<double> z;
    z.reserve(config.samples);
    p.source = draw_equilibrium(config, dist, config.samples, 1,
                                [&](const std::vector<double>& c) { z.push_back(c[p.coordinate] / scale); });
    p.samples = z.size();
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    const auto ref = [](double x) {
        return std::sin(std::numbers::pi * std::clamp(x, 0.0, 1.0) / 2.0);
    };
    const auto interior = [](double x) {
        const double y = std::clamp(x, 0.0, 1.0);
        return y + std::sin(std::numbers::pi * y) / std::numbers::pi;
    };
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = ref(z[i]);
        p.ks = std::max({p.ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
        const double h = interior(z[i]);
        p.ks_interior_law = std::max({p.ks_interior_law, std::abs(h - i / n), std::abs(h - (i + 1) / n)});
    }
    for (int g = 1; g <= 20; ++g) {
        MarginalRow r;
        r.x = g / 20.0;
        r.ecdf = static_cast<double>(std::upper_bound(z.begin(), z.end(), r.x) - z.begin()) / n;
        r.reference = ref(r.x);
        r.se = binomial_se(r.ecdf, n);
        p.rows.push_back(r);
    }
    return p;
}

TailProbe probe_tail(const ExperimentConfig& config) {
    const DistPtr dist = probe_dist(config);
    TailProbe p;
    p.states = dist->size();
    p.coordinate = pick_coordinate(config, dist);
    std::vector<double> grid = config.tail_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<std::uint64_t> below(grid.size(), 0);
    p.source = draw_equilibrium(config, dist, config.samples, 2, [&](const std::vector<double>& c) {
        ++p.samples;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            if (c[p.coordinate] < 1.0 / grid[g]) ++below[g];
        }
    });
    const double n = static_cast<double>(p.samples);
    const double bound_scale = 16.0 * std::min(1.0, dist->ratio(p.coordinate));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        TailRow r;
        r.x = grid[g];
        const double prob = below[g] / n;
        r.f = r.x * prob;
        r.se = r.x * binomial_se(prob, n);
        r.smallness_bound = bound_scale;
        r.smallness_violation = r.f > r.smallness_bound + 3 * r.se;
        if (g > 0) {
            const TailRow& prev = p.rows.back();
            r.monotone_violation = r.f < prev.f - 3 * std::hypot(r.se, prev.se);
        }
        p.monotone = p.monotone && !r.monotone_violation;
        p.within_smallness = p.within_smallness && !r.smallness_violation;
        p.rows.push_back(r);
    }
    return p;
}

namespace {

// Partial correlation of x and y given z within one bin.
double partial_corr(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& z) {
    const double rxy = pearson(x, y);
    const double rxz = pearson(x, z);
    const double ryz = pearson(y, z);
    const double den = std::sqrt((1 - rxz * rxz) * (1 - ryz * ryz));
    return den > 0 ? (rxy - rxz * ryz) / den : 0.0;
}

}  // namespace

MarkovProbe probe_markov(const ExperimentConfig& config) {
    const DistPtr dist = probe_dist(config);
    if (dist->size() < 6) throw ParameterError("Markov probe needs at least 6 states");
    MarkovProbe p;
    p.states = dist->size();
    p.coordinate = std::clamp<std::size_t>(pick_coordinate(config, dist), 1, p.states - 3);
    const std::size_t i = p.coordinate;
    std::vector<double> left, mid, right;
    p.source = draw_equilibrium(config, dist, config.samples, 3, [&](const std::vector<double>& c) {
        left.push_back(c[i - 1]);
        mid.push_back(c[i]);
        right.push_back(c[i + 1]);
    });
    p.samples = mid.size();
    p.adjacent_correlation = pearson(mid, right);

    std::vector<double> shuffled = right;
    CounterRng rng(derive_stream(config.seed, 4));
    for (std::size_t s = shuffled.size(); s > 1; --s) std::swap(shuffled[s - 1], shuffled[rng.below(s)]);

    // Equal-count bins of c[i].
    std::vector<std::size_t> order(mid.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return mid[a] < mid[b]; });
    const std::size_t nb = std::min(config.bins, std::max<std::size_t>(order.size(), 1));
    std::size_t used = 0;
    double used_count = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = order.size() * b / nb;
        const std::size_t hi = order.size() * (b + 1) / nb;
        MarkovBin bin;
        bin.count = hi - lo;
        if (bin.count == 0) {
            bin.excluded = true;
            p.bins.push_back(bin);
            continue;
        }
        bin.lo = mid[order[lo]];
        bin.hi = mid[order[hi - 1]];
        bin.excluded = bin.count < config.min_bin_count;
        if (!bin.excluded) {
            std::vector<double> x, y, z, ys;
            for (std::size_t k = lo; k < hi; ++k) {
                x.push_back(left[order[k]]);
                y.push_back(right[order[k]]);
                ys.push_back(shuffled[order[k]]);
                z.push_back(mid[order[k]]);
            }
            bin.rho = partial_corr(x, y, z);
            bin.shuffled_rho = partial_corr(x, ys, z);
            p.max_abs_rho = std::max(p.max_abs_rho, std::abs(bin.rho));
            p.shuffled_max_abs_rho = std::max(p.shuffled_max_abs_rho, std::abs(bin.shuffled_rho));
            ++used;
            used_count += static_cast<double>(bin.count);
        }
        p.bins.push_back(bin);
    }
    if (used > 0) p.rho_se = 1.0 / std::sqrt(used_count / used);
    return p;
}

StructureProbe probe_structure(const ExperimentConfig& config) {
    const DistPtr dist = probe_dist(config);
    if (dist->size() < 6) throw ParameterError("structure probe needs at least 6 states");
    StructureProbe p;
    p.states = dist->size();
    p.coordinate = std::clamp<std::size_t>(pick_coordinate(config, dist), 2, p.states - 4);
    const std::size_t j = p.coordinate;
    std::vector<double> left, mid, right;
    p.source = draw_equilibrium(config, dist, config.samples, 5, [&](const std::vector<double>& c) {
        left.push_back(c[j - 2]);
        mid.push_back(c[j]);
        right.push_back(c[j + 2]);
    });
    p.samples = mid.size();
    const double n = static_cast<double>(p.samples);
    const double scale = std::min(1.0, dist->ratio(j));

    // Intervals (a, b) on a tenth-of-range grid, at least two cells wide.
    for (int ia = 0; ia <= 10; ++ia) {
        for (int ib = ia + 2; ib <= 10; ++ib) {
            LargenessRow r;
            r.a = scale * ia / 10.0;
            r.b = scale * ib / 10.0;
            const double m = 0.5 * (r.a + r.b);
            double lo = 0, hi = 0;
            for (double x : mid) {
                if (x > r.a && x < m) lo += 1;
                if (x > m && x < r.b) hi += 1;
            }
            r.p_low = lo / n;
            r.p_high = hi / n;
            r.se = std::sqrt(std::max(r.p_low + r.p_high - std::pow(r.p_low - r.p_high, 2), 0.0) / n);
            r.ok = r.p_low >= r.p_high - 3 * r.se;
            p.largeness_ok = p.largeness_ok && r.ok;
            p.largeness.push_back(r);
        }
    }
    for (int g = 1; g <= 9; ++g) {
        UpperTailRow r;
        r.x = g / 10.0;
        double hits = 0;
        for (double x : mid) {
            if (x >= r.x * scale) hits += 1;
        }
        r.p = hits / n;
        r.se = binomial_se(r.p, n);
        r.bound = 1.0 - r.x;
        r.ok = r.p <= r.bound + 3 * r.se;
        p.upper_tail_ok = p.upper_tail_ok && r.ok;
        p.upper_tail.push_back(r);
    }

    // Three equal-count bins for each conditioning coordinate.
    const auto tercile_cuts = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return std::pair{v[v.size() / 3], v[2 * v.size() / 3]};
    };
    const auto [l1, l2] = tercile_cuts(left);
    const auto [r1, r2] = tercile_cuts(right);
    const auto bin_of = [](double x, double c1, double c2) -> std::size_t {
        return x < c1 ? 0 : (x < c2 ? 1 : 2);
    };
    const double small_scale = 16.0 * std::min(1.0, dist->ratio(j));
    for (double d : config.d_values) {
        std::size_t counts[3][3] = {};
        std::size_t smalls[3][3] = {};
        for (std::size_t s = 0; s < mid.size(); ++s) {
            const std::size_t a = bin_of(left[s], l1, l2);
            const std::size_t b = bin_of(right[s], r1, r2);
            ++counts[a][b];
            if (mid[s] < 1.0 / d) ++smalls[a][b];
        }
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = 0; b < 3; ++b) {
                if (counts[a][b] < config.min_bin_count) continue;
                SmallnessRow r;
                r.d = d;
                r.left_bin = a;
                r.right_bin = b;
                r.count = counts[a][b];
                r.p = static_cast<double>(smalls[a][b]) / r.count;
                r.se = binomial_se(r.p, static_cast<double>(r.count));
                r.bound = small_scale / d;
                r.ok = r.p <= r.bound + 3 * r.se;
                p.smallness_ok = p.smallness_ok && r.ok;
                p.smallness.push_back(r);
            }
        }
    }
    return p;
}

LevyProbe probe_levy_sum(const ExperimentConfig& config) {
    const DistPtr dist = probe_dist(config);
    LevyProbe p;
    p.states = dist->size();
    p.window = config.window;
    const std::size_t coords = p.states - 1;
    const std::size_t span = 2 * p.window;
    if (p.window < 1 || span + 2 > coords) {
        throw ParameterError("Levy probe window does not fit inside the interior");
    }
    const std::size_t start = (coords - span) / 2;
    const auto centred = [](double raw, std::size_t len) {
        const double two_len = 2.0 * static_cast<double>(len);
        return raw / two_len - std::log(two_len);
    };
    std::vector<double> small, large, raw_small, raw_large;
    p.source = draw_equilibrium(config, dist, config.samples, 6, [&](const std::vector<double>& c) {
        double s1 = 0, s2 = 0;
        for (std::size_t k = 0; k < span; ++k) {
            const double w = 1.0 / c[start + k];
            if (k < p.window) s1 += w;
            s2 += w;
        }
        raw_small.push_back(s1);
        raw_large.push_back(s2);
        small.push_back(centred(s1, p.window));
        large.push_back(centred(s2, span));
    });
    p.samples = small.size();
    p.quantile_levels = {0.1, 0.25, 0.5, 0.75, 0.9};
    for (double q : p.quantile_levels) {
        p.small_quantiles.push_back(empirical_quantile(small, q));
        p.large_quantiles.push_back(empirical_quantile(large, q));
    }
    p.ks = ks_two_sample(small, large);
    p.raw_median_small = empirical_quantile(raw_small, 0.5);
    p.raw_median_large = empirical_quantile(raw_large, 0.5);
    p.raw_ratio = p.raw_median_large / p.raw_median_small;
    return p;
}

ContractionProbe probe_contraction(const ExperimentConfig& config) {
    config.validate();
    ContractionProbe p;
    p.k = config.k;
    p.w = config.w;
    const std::size_t runs = config.reps;
    std::vector<double> xs, ys;
    for (std::size_t n : config.n_list) {
        const DistPtr dist = make_distribution(config.family, n, config.params);
        const std::size_t states = dist->size();
        const double nlogn = states * std::log(static_cast<double>(states));
        SamplerConfig base;
        base.dist = dist;
        base.k = std::min(config.k, states - 1);
        base.w = config.w;
        base.steps = static_cast<std::uint64_t>(std::ceil(config.max_coupling_factor * nlogn));
        base.max_rejection_tries = config.max_rejection_tries;
        const std::vector<double> x0(states - 1, 0.0);
        const std::vector<double> y0 = default_initial_state(*dist);
        std::vector<double> times(runs, -1.0);
        parallel_for(runs, config.threads, [&](std::size_t r) {
            SamplerConfig sc = base;
            sc.seed = derive_stream(config.seed, states, r);
            const CoupledRun run = run_coupled_pair(sc, x0, y0, true);
            if (run.coalescence) times[r] = static_cast<double>(*run.coalescence);
        });
        CoalescenceRow row;
        row.states = states;
        row.runs = runs;
        std::vector<double> done;
        for (double t : times) {
            if (t >= 0) done.push_back(t);
        }
        row.coalesced = done.size();
        if (!done.empty()) {
            row.mean = std::accumulate(done.begin(), done.end(), 0.0) / done.size();
            double ss = 0;
            for (double t : done) ss += (t - row.mean) * (t - row.mean);
            row.se = done.size() > 1 ? std::sqrt(ss / (done.size() - 1) / done.size()) : 0.0;
            row.median = empirical_quantile(done, 0.5);
            row.p90 = empirical_quantile(done, 0.9);
            row.mean_over_nlogn = row.mean / nlogn;
            xs.push_back(std::log(nlogn));
            ys.push_back(std::log(row.mean));
        }
        p.rows.push_back(row);
    }
    if (xs.size() >= 2) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        p.exponent = sxx > 0 ? sxy / sxx : 0.0;
    }

    // Coupon collector at the first n.
    const DistPtr dist = make_distribution(config.family, config.n_list.front(), config.params);
    const std::size_t states = dist->size();
    const std::size_t k = std::min(config.k, states - 1);
    CouponCheck& cc = p.coupon;
    cc.positions = states - k;
    cc.runs = runs;
    const double m = static_cast<double>(states - 1);
    const double t = m * (std::log(m) - config.coupon_c) / static_cast<double>(k);
    cc.steps = t > 0 ? static_cast<std::uint64_t>(std::floor(t)) : 0;
    std::vector<char> missed(runs, 0);
    parallel_for(runs, config.threads, [&](std::size_t r) {
        SamplerConfig sc;
        sc.dist = dist;
        sc.k = k;
        sc.w = config.w;
        sc.steps = cc.steps;
        sc.seed = derive_stream(config.seed, states + 1'000'003ULL, r);
        GibbsTrace trace;
        run_gibbs(sc, nullptr, &trace);
        missed[r] = std::any_of(trace.update_counts.begin(), trace.update_counts.end(),
                                [](std::uint64_t u) { return u == 0; });
    });
    cc.observed = runs ? static_cast<double>(std::count(missed.begin(), missed.end(), 1)) / runs : 0.0;
    cc.expected = 1.0 - std::exp(-std::exp(config.coupon_c));
    cc.se = binomial_se(cc.expected, static_cast<double>(runs));
    return p;
}

}  // namespace bdcutoff
