#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bdcutoff/kernel.hpp"
#include "bdcutoff/rng.hpp"

namespace bdcutoff {

struct SamplerConfig {
    DistPtr dist;
    std::size_t k = 1;       // block size, 1 <= k <= n-1
    double w = 1.0;          // weight of the two end blocks
    std::uint64_t steps = 0; // block updates to perform
    std::uint64_t burnin = 0;
    std::uint64_t thin = 1;
    std::uint64_t seed = 0;
    std::uint64_t max_rejection_tries = 10'000'000;
    // Defaults to default_initial_state(dist).
    std::optional<std::vector<double>> initial;

    void validate() const;
};

struct BlockStats {
    std::uint64_t proposals = 0;
    std::uint64_t acceptances = 0;
};

struct GibbsTrace {
    std::vector<std::vector<double>> samples;
    std::vector<BlockStats> block_stats;        // indexed by block start
    std::vector<std::uint64_t> update_counts;   // indexed by coordinate
    std::vector<double> final_state;
};

// Half the Metropolis super-diagonal: c[i] = min(1, ratio(i)) / 8. Strictly feasible.
std::vector<double> default_initial_state(const StationaryDist& dist);

// Support [0, hi] of c[i] given every other coordinate.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};
Interval conditional_interval(const SuperDiagState& state, std::size_t i);

// Exact draw of c[i] from its conditional law (uniform on the interval).
void site_update(SuperDiagState& state, std::size_t i, CounterRng& rng);

// Jointly resamples c[i..i+k-1] uniformly from the conditional polytope by
// rejection from the box prod_j [0, min(1, ratio(j))].
// Throws SamplerStallError after `max_tries` rejected proposals.
void block_update(SuperDiagState& state, std::size_t i, std::size_t k, CounterRng& rng,
                  std::uint64_t max_tries = 10'000'000, BlockStats* stats = nullptr);

// Draws a block start in [0, n-k-1]: the two end positions carry weight w,
// interior positions weight 1.
std::size_t draw_block_start(std::size_t n_states, std::size_t k, double w, CounterRng& rng);

using SampleObserver = std::function<void(const std::vector<double>& c, std::uint64_t step)>;

// Runs `steps` block updates; every retained state (after burn-in, every
// `thin`-th step) is handed to the observer. k = 1 uses exact inverse-CDF
// site updates, k >= 2 block rejection. Deterministic given the seed.
// Returns the final state; `trace` (optional) receives block telemetry.
std::vector<double> run_gibbs(const SamplerConfig& config, const SampleObserver& observer,
                              GibbsTrace* trace = nullptr);

// Same, storing retained states in the returned trace.
GibbsTrace run_gibbs(const SamplerConfig& config);

// Exact uniform draw from the polytope by full-vector rejection. Practical for n <~ 12.
std::vector<double> oracle_sample(const StationaryDist& dist, CounterRng& rng,
                                  std::uint64_t max_tries = 100'000'000,
                                  std::uint64_t* tries_used = nullptr);

struct CoupledRun {
    std::vector<std::size_t> distance;         // d(X_t, Y_t) for t = 0..steps run
    std::optional<std::uint64_t> coalescence;  // first t with d = 0
};

// Two block-Gibbs chains driven by common random numbers: the same block
// start each step, and the same stream of box proposals within a block, each
// chain keeping its own first acceptable proposal. Once equal they stay equal.
// With stop_at_coalescence the trace ends at the coalescence step.
CoupledRun run_coupled_pair(const SamplerConfig& config, const std::vector<double>& x0,
                            const std::vector<double>& y0, bool stop_at_coalescence = true);

// Hamming distance on coordinates.
std::size_t hamming(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bdcutoff
