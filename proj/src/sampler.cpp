#include "bdcutoff/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdcutoff/errors.hpp"

namespace bdcutoff {

namespace {

double box_limit(const StationaryDist& dist, std::size_t j) {
    return std::min(1.0, dist.ratio(j));
}

// Rows first_row..last_row all satisfy the outflow limit.
bool rows_ok(const StationaryDist& dist, const std::vector<double>& c, std::size_t first_row,
             std::size_t last_row) {
    for (std::size_t r = first_row; r <= last_row; ++r) {
        if (row_outflow(dist, c, r) > 1.0) return false;
    }
    return true;
}

void propose_block(const StationaryDist& dist, std::vector<double>& proposal, std::size_t i,
                   std::size_t k, CounterRng& rng) {
    for (std::size_t j = 0; j < k; ++j) proposal[j] = rng.uniform() * box_limit(dist, i + j);
}

// Writes proposal into c[i..i+k-1] and checks rows i..i+k. Restores on failure.
bool try_accept(const StationaryDist& dist, std::vector<double>& c, const std::vector<double>& proposal,
                std::size_t i, std::size_t k, std::vector<double>& scratch) {
    scratch.assign(c.begin() + static_cast<std::ptrdiff_t>(i),
                   c.begin() + static_cast<std::ptrdiff_t>(i + k));
    std::copy(proposal.begin(), proposal.begin() + static_cast<std::ptrdiff_t>(k),
              c.begin() + static_cast<std::ptrdiff_t>(i));
    if (rows_ok(dist, c, i, i + k)) return true;
    std::copy(scratch.begin(), scratch.end(), c.begin() + static_cast<std::ptrdiff_t>(i));
    return false;
}

}  // namespace

void SamplerConfig::validate() const {
    if (!dist) throw ParameterError("sampler config needs a distribution");
    const std::size_t coords = dist->size() - 1;
    if (k < 1 || k > coords) throw ParameterError("block size must satisfy 1 <= k <= n-1");
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("end-block weight must be positive");
    if (thin < 1) throw ParameterError("thin must be >= 1");
    if (initial && !is_feasible(*dist, *initial)) {
        throw InfeasibleStateError(0, "initial sampler state is infeasible");
    }
}

std::vector<double> default_initial_state(const StationaryDist& dist) {
    std::vector<double> c(dist.size() - 1);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.125 * std::min(1.0, dist.ratio(i));
    return c;
}

Interval conditional_interval(const SuperDiagState& state, std::size_t i) {
    if (i >= state.c.size()) throw BoundsError("coordinate index out of range");
    return {0.0, upper_limit(*state.dist, state.c, i)};
}

void site_update(SuperDiagState& state, std::size_t i, CounterRng& rng) {
    const Interval iv = conditional_interval(state, i);
    state.c[i] = rng.uniform() * iv.hi;
}

void block_update(SuperDiagState& state, std::size_t i, std::size_t k, CounterRng& rng,
                  std::uint64_t max_tries, BlockStats* stats) {
    const StationaryDist& dist = *state.dist;
    if (k < 1 || i + k > state.c.size()) throw BoundsError("block exceeds the coordinate range");
    std::vector<double> proposal(k);
    std::vector<double> scratch;
    for (std::uint64_t t = 0; t < max_tries; ++t) {
        propose_block(dist, proposal, i, k, rng);
        if (stats) ++stats->proposals;
        if (try_accept(dist, state.c, proposal, i, k, scratch)) {
            if (stats) ++stats->acceptances;
            return;
        }
    }
    throw SamplerStallError(i, max_tries, stats ? stats->acceptances : 0,
                            "block update at index " + std::to_string(i) + " (k=" +
                                std::to_string(k) + ") exceeded " + std::to_string(max_tries) +
                                " rejection tries");
}

std::size_t draw_block_start(std::size_t n_states, std::size_t k, double w, CounterRng& rng) {
    const std::size_t positions = n_states - k;  // starts 0..n-k-1
    if (positions <= 1) return 0;
    if (positions == 2) return static_cast<std::size_t>(rng() >> 63);
    const double interior = static_cast<double>(positions - 2);
    const double u = rng.uniform() * (interior + 2.0 * w);
    if (u < w) return 0;
    if (u < w + interior) {
        const auto j = static_cast<std::size_t>(u - w);
        return 1 + std::min(j, positions - 3);
    }
    return positions - 1;
}

std::vector<double> run_gibbs(const SamplerConfig& config, const SampleObserver& observer,
                              GibbsTrace* trace) {
    config.validate();
    const StationaryDist& dist = *config.dist;
    const std::size_t n = dist.size();
    SuperDiagState state{config.dist, config.initial ? *config.initial : default_initial_state(dist)};
    CounterRng rng(config.seed);

    std::vector<BlockStats> block_stats(n - config.k);
    std::vector<std::uint64_t> update_counts(n - 1, 0);

    for (std::uint64_t t = 1; t <= config.steps; ++t) {
        const std::size_t i = draw_block_start(n, config.k, config.w, rng);
        if (config.k == 1) {
            site_update(state, i, rng);
        } else {
            block_update(state, i, config.k, rng, config.max_rejection_tries, &block_stats[i]);
        }
        for (std::size_t j = i; j < i + config.k; ++j) ++update_counts[j];
        if (t > config.burnin && (t - config.burnin) % config.thin == 0 && observer) {
            observer(state.c, t);
        }
    }
    if (trace) {
        trace->block_stats = std::move(block_stats);
        trace->update_counts = std::move(update_counts);
        trace->final_state = state.c;
    }
    return state.c;
}

GibbsTrace run_gibbs(const SamplerConfig& config) {
    GibbsTrace trace;
    std::vector<std::vector<double>> samples;
    run_gibbs(config, [&](const std::vector<double>& c, std::uint64_t) { samples.push_back(c); },
              &trace);
    trace.samples = std::move(samples);
    return trace;
}

std::vector<double> oracle_sample(const StationaryDist& dist, CounterRng& rng,
                                  std::uint64_t max_tries, std::uint64_t* tries_used) {
    const std::size_t m = dist.size() - 1;
    std::vector<double> box(m);
    for (std::size_t j = 0; j < m; ++j) box[j] = box_limit(dist, j);
    std::vector<double> c(m);
    for (std::uint64_t t = 1; t <= max_tries; ++t) {
        for (std::size_t j = 0; j < m; ++j) c[j] = rng.uniform() * box[j];
        if (rows_ok(dist, c, 0, m)) {
            if (tries_used) *tries_used = t;
            return c;
        }
    }
    throw OracleInfeasibleError("rejection oracle exceeded " + std::to_string(max_tries) +
                                " tries for n=" + std::to_string(dist.size()));
}

std::size_t hamming(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t d = 0;
    const std::size_t m = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < m; ++i) d += (x[i] != y[i]) ? 1 : 0;
    return d + (std::max(x.size(), y.size()) - m);
}

CoupledRun run_coupled_pair(const SamplerConfig& config, const std::vector<double>& x0,
                            const std::vector<double>& y0, bool stop_at_coalescence) {
    config.validate();
    const StationaryDist& dist = *config.dist;
    if (!is_feasible(dist, x0) || !is_feasible(dist, y0)) {
        throw InfeasibleStateError(0, "coupled-pair initial states must both be feasible");
    }
    const std::size_t n = dist.size();
    const std::size_t k = config.k;
    std::vector<double> x = x0;
    std::vector<double> y = y0;
    CounterRng rng(config.seed);

    CoupledRun run;
    std::size_t d = hamming(x, y);
    run.distance.push_back(d);
    if (d == 0) {
        run.coalescence = 0;
        if (stop_at_coalescence) return run;
    }

    std::vector<double> proposal(k);
    std::vector<double> scratch;
    for (std::uint64_t t = 1; t <= config.steps; ++t) {
        const std::size_t i = draw_block_start(n, k, config.w, rng);
        bool x_done = false;
        bool y_done = false;
        std::uint64_t tries = 0;
        while (!(x_done && y_done)) {
            if (++tries > config.max_rejection_tries) {
                throw SamplerStallError(i, config.max_rejection_tries, 0,
                                        "coupled block update at index " + std::to_string(i) +
                                            " exceeded the rejection cap");
            }
            propose_block(dist, proposal, i, k, rng);
            if (!x_done) x_done = try_accept(dist, x, proposal, i, k, scratch);
            if (!y_done) y_done = try_accept(dist, y, proposal, i, k, scratch);
        }
        d = hamming(x, y);
        run.distance.push_back(d);
        if (d == 0 && !run.coalescence) {
            run.coalescence = t;
            if (stop_at_coalescence) break;
        }
    }
    return run;
}

}  // namespace bdcutoff
