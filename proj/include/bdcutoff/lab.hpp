#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdcutoff/analysis.hpp"
#include "bdcutoff/dist.hpp"

namespace bdcutoff {

enum class OutputFormat { csv, json };
OutputFormat parse_format(std::string_view name);

enum class SamplerMode { automatic, gibbs, oracle };
SamplerMode parse_sampler_mode(std::string_view name);

struct ExperimentConfig {
    Family family = Family::uniform;
    FamilyParams params;
    std::vector<std::size_t> n_list;
    std::size_t reps = 1;

    // Sampler. A budget of 0 means 20 N ln N updates for N states.
    std::size_t k = 1;
    double w = 1.0;
    std::uint64_t budget = 0;
    std::uint64_t burnin = 0;
    std::uint64_t thin = 0;  // 0: one retained sample per N updates (probes)
    std::uint64_t max_rejection_tries = 10'000'000;
    SamplerMode sampler_mode = SamplerMode::automatic;

    // Analysis.
    bool exact_tau = false;
    bool exhaustive_starts = false;
    std::uint64_t horizon = 10'000'000;
    double delta = 0.75;

    // Probes.
    std::optional<std::size_t> coordinate;
    std::vector<double> tail_grid = {2, 5, 10, 20};
    std::vector<double> d_values = {4, 8, 16};
    std::uint64_t samples = 100'000;
    std::size_t bins = 20;
    std::size_t min_bin_count = 200;
    std::size_t window = 64;
    double coupon_c = 1.0;
    std::size_t max_coupling_factor = 200;  // cap on coupled steps, in units of N ln N

    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: hardware concurrency
    bool record_runtime = false;
    std::string out;
    OutputFormat format = OutputFormat::csv;

    void validate() const;
    AnalysisOptions analysis_options() const;
};

// Default equilibration budget 20 N ln N, rounded up.
std::uint64_t equilibration_budget(std::size_t states);
std::uint64_t effective_budget(const ExperimentConfig& config, std::size_t states);

struct EnsembleRecord {
    std::uint64_t n = 0;
    std::string family;
    std::uint64_t rep_id = 0;
    std::uint64_t seed_sub = 0;
    double gap = 0;
    double B_plus = 0;
    double B_minus = 0;
    double tau_or_proxy = 0;
    bool proxy_flag = true;
    double cutoff_product = 0;
    double max_recip_superdiag = 0;
    double runtime_ms = 0;
    std::string error;

    // Field-wise equality; doubles compare by bit pattern so NaN == NaN.
    friend bool operator==(const EnsembleRecord& a, const EnsembleRecord& b);
};

inline constexpr std::string_view kCsvSchemaTag = "# bdcutoff-v1";

std::string format_real(double x);
double parse_real(std::string_view token);

std::string records_to_csv(const std::vector<EnsembleRecord>& records);
std::vector<EnsembleRecord> records_from_csv(std::string_view text);
std::string records_to_json(const std::vector<EnsembleRecord>& records);

// One record per (n, replicate), sorted by (n, rep_id). Each replicate
// samples a kernel from its own substream, then analyses lazy(K, 1/2).
// Failures are stored in the record's error field.
std::vector<EnsembleRecord> run_ensemble(const ExperimentConfig& config);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, std::string_view content);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace bdcutoff
