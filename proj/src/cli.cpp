#include "bdcutoff/cli.hpp"

#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bdcutoff/compare.hpp"
#include "bdcutoff/errors.hpp"
#include "bdcutoff/probes.hpp"
#include "bdcutoff/rng.hpp"
#include "bdcutoff/sampler.hpp"

namespace bdcutoff {

namespace {

using Json = nlohmann::ordered_json;

Json real(double x) {
    if (std::isfinite(x)) return x;
    return format_real(x);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

struct CliArgs {
    std::string family = "uniform";
    std::string n = "64";
    std::string masses;
    double a = 2.0;
    double eps = 0.25;
    std::size_t k = 1;
    double w = 1.0;
    std::uint64_t steps = 0;
    std::uint64_t burnin = 0;
    std::uint64_t thin = 0;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    double delta = 0.75;
    bool exact_tau = false;
    bool exhaustive = false;
    std::string out;
    std::string format = "csv";
    unsigned threads = 0;
    bool timing = false;
    std::uint64_t samples = 100'000;
    long long coordinate = -1;
    std::string sampler = "auto";
    std::size_t window = 64;
    std::uint64_t horizon = 10'000'000;
    double alpha = 1.0;
    std::string tail_grid;
    std::string d_values;
    double coupon_c = 1.0;
};

ExperimentConfig to_config(const CliArgs& a) {
    ExperimentConfig c;
    c.family = parse_family(a.family);
    c.params.a = a.a;
    c.params.eps = a.eps;
    for (const auto& m : split_list(a.masses)) c.params.masses.push_back(parse_real(m));
    for (const auto& n : split_list(a.n)) {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(n, &pos);
        if (pos != n.size()) throw ParameterError("bad --n entry '" + n + "'");
        c.n_list.push_back(v);
    }
    c.reps = a.reps;
    c.k = a.k;
    c.w = a.w;
    c.budget = a.steps;
    c.burnin = a.burnin;
    c.thin = a.thin;
    c.sampler_mode = parse_sampler_mode(a.sampler);
    c.exact_tau = a.exact_tau;
    c.exhaustive_starts = a.exhaustive;
    c.horizon = a.horizon;
    c.delta = a.delta;
    if (a.coordinate >= 0) c.coordinate = static_cast<std::size_t>(a.coordinate);
    if (!a.tail_grid.empty()) {
        c.tail_grid.clear();
        for (const auto& x : split_list(a.tail_grid)) c.tail_grid.push_back(parse_real(x));
    }
    if (!a.d_values.empty()) {
        c.d_values.clear();
        for (const auto& x : split_list(a.d_values)) c.d_values.push_back(parse_real(x));
    }
    c.samples = a.samples;
    c.window = a.window;
    c.coupon_c = a.coupon_c;
    c.seed = a.seed;
    c.threads = a.threads;
    c.record_runtime = a.timing;
    c.out = a.out;
    c.format = parse_format(a.format);
    if (c.family == Family::explicit_ && c.n_list.size() == 1 && !c.params.masses.empty() &&
        c.params.masses.size() != c.n_list.front()) {
        throw ParameterError("--masses must list exactly n values");
    }
    c.validate();
    return c;
}

void emit(const ExperimentConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.out.empty()) {
        out << text;
    } else {
        write_file_atomic(cfg.out, text);
    }
}

BDKernel sample_kernel(const ExperimentConfig& cfg, const DistPtr& dist, std::uint64_t rep) {
    SamplerConfig sc;
    sc.dist = dist;
    sc.k = std::min(cfg.k, dist->size() - 1);
    sc.w = cfg.w;
    sc.steps = effective_budget(cfg, dist->size());
    sc.burnin = sc.steps;
    sc.seed = derive_stream(cfg.seed, cfg.n_list.front(), rep);
    sc.max_rejection_tries = cfg.max_rejection_tries;
    return BDKernel(dist, run_gibbs(sc, nullptr));
}

Json report_json(const AnalysisReport& r) {
    Json j;
    j["states"] = r.states;
    j["gap"] = real(r.gap);
    j["miclo"] = {{"B_plus", real(r.miclo.b_plus)}, {"B_minus", real(r.miclo.b_minus)},
                  {"B", real(r.miclo.b)},           {"lower", real(r.miclo.lower)},
                  {"upper", real(r.miclo.upper)},   {"median", r.miclo.median},
                  {"degenerate", r.miclo.degenerate}};
    j["hit_up"] = real(r.hit_up);
    j["hit_down"] = real(r.hit_down);
    j["tau"] = r.tau ? Json(*r.tau) : Json(nullptr);
    j["tau_proxy"] = real(r.tau_proxy);
    j["cutoff_product"] = real(r.cutoff_product);
    j["cutoff_is_proxy"] = r.cutoff_is_proxy;
    j["proxy_product"] = real(r.proxy_product);
    j["dlp_window"] = r.dlp_window ? real(*r.dlp_window) : Json(nullptr);
    return j;
}

Json source_json(const SampleSource& s) {
    return {{"method", s.method}, {"burnin", s.burnin}, {"thin", s.thin}};
}

int run_sample(const ExperimentConfig& cfg, std::ostream& out) {
    const DistPtr dist = make_distribution(cfg.family, cfg.n_list.front(), cfg.params);
    SamplerConfig sc;
    sc.dist = dist;
    sc.k = cfg.k;
    sc.w = cfg.w;
    sc.steps = effective_budget(cfg, dist->size());
    sc.burnin = cfg.burnin;
    sc.thin = std::max<std::uint64_t>(cfg.thin, 1);
    sc.seed = derive_stream(cfg.seed, cfg.n_list.front(), 0);
    sc.max_rejection_tries = cfg.max_rejection_tries;
    const GibbsTrace trace = run_gibbs(sc);
    std::string text;
    if (cfg.format == OutputFormat::csv) {
        text = std::string(kCsvSchemaTag) + " samples\nstep";
        for (std::size_t i = 0; i + 1 < dist->size(); ++i) text += ",c" + std::to_string(i);
        text += '\n';
        for (std::size_t s = 0; s < trace.samples.size(); ++s) {
            text += std::to_string(sc.burnin + (s + 1) * sc.thin);
            for (double x : trace.samples[s]) text += ',' + format_real(x);
            text += '\n';
        }
    } else {
        Json j;
        j["states"] = dist->size();
        j["steps"] = sc.steps;
        j["burnin"] = sc.burnin;
        j["thin"] = sc.thin;
        j["samples"] = trace.samples;
        j["final_state"] = trace.final_state;
        j["update_counts"] = trace.update_counts;
        text = j.dump(2) + "\n";
    }
    emit(cfg, text, out);
    return 0;
}

int run_analyze(const ExperimentConfig& cfg, std::ostream& out) {
    const DistPtr dist = make_distribution(cfg.family, cfg.n_list.front(), cfg.params);
    const BDKernel k = sample_kernel(cfg, dist, 0);
    Json j = report_json(analyze(lazy(k, 0.5), cfg.analysis_options()));
    j["superdiagonal"] = k.superdiagonal();
    emit(cfg, j.dump(2) + "\n", out);
    return 0;
}

int run_ensemble_cmd(const ExperimentConfig& cfg, std::ostream& out) {
    const auto records = run_ensemble(cfg);
    emit(cfg, cfg.format == OutputFormat::csv ? records_to_csv(records) : records_to_json(records), out);
    return 0;
}

int run_probe(const std::string& kind, const ExperimentConfig& cfg, std::ostream& out) {
    Json j;
    j["probe"] = kind;
    if (kind == "marginal") {
        const auto p = probe_marginal(cfg);
        j["states"] = p.states;
        j["coordinate"] = p.coordinate;
        j["samples"] = p.samples;
        j["source"] = source_json(p.source);
        j["boundary_warning"] = p.boundary_warning;
        j["ks"] = p.ks;
        for (const auto& r : p.rows) {
            j["rows"].push_back({{"x", r.x}, {"ecdf", r.ecdf}, {"reference", r.reference}, {"se", r.se}});
        }
    } else if (kind == "tail") {
        const auto p = probe_tail(cfg);
        j["states"] = p.states;
        j["coordinate"] = p.coordinate;
        j["samples"] = p.samples;
        j["source"] = source_json(p.source);
        j["monotone"] = p.monotone;
        j["within_smallness"] = p.within_smallness;
        for (const auto& r : p.rows) {
            j["rows"].push_back({{"x", r.x},
                                 {"f", r.f},
                                 {"se", r.se},
                                 {"smallness_bound", r.smallness_bound},
                                 {"smallness_violation", r.smallness_violation},
                                 {"monotone_violation", r.monotone_violation}});
        }
    } else if (kind == "markov") {
        const auto p = probe_markov(cfg);
        j["states"] = p.states;
        j["coordinate"] = p.coordinate;
        j["samples"] = p.samples;
        j["source"] = source_json(p.source);
        j["max_abs_rho"] = p.max_abs_rho;
        j["shuffled_max_abs_rho"] = p.shuffled_max_abs_rho;
        j["adjacent_correlation"] = p.adjacent_correlation;
        j["rho_se"] = p.rho_se;
        for (const auto& b : p.bins) {
            j["bins"].push_back({{"lo", b.lo},
                                 {"hi", b.hi},
                                 {"count", b.count},
                                 {"rho", b.rho},
                                 {"shuffled_rho", b.shuffled_rho},
                                 {"excluded", b.excluded}});
        }
    } else if (kind == "structure") {
        const auto p = probe_structure(cfg);
        j["states"] = p.states;
        j["coordinate"] = p.coordinate;
        j["samples"] = p.samples;
        j["source"] = source_json(p.source);
        j["largeness_ok"] = p.largeness_ok;
        j["upper_tail_ok"] = p.upper_tail_ok;
        j["smallness_ok"] = p.smallness_ok;
        for (const auto& r : p.largeness) {
            j["largeness"].push_back({{"a", r.a}, {"b", r.b}, {"p_low", r.p_low},
                                      {"p_high", r.p_high}, {"se", r.se}, {"ok", r.ok}});
        }
        for (const auto& r : p.upper_tail) {
            j["upper_tail"].push_back(
                {{"x", r.x}, {"p", r.p}, {"se", r.se}, {"bound", r.bound}, {"ok", r.ok}});
        }
        for (const auto& r : p.smallness) {
            j["smallness"].push_back({{"D", r.d}, {"left_bin", r.left_bin}, {"right_bin", r.right_bin},
                                      {"count", r.count}, {"p", r.p}, {"se", r.se},
                                      {"bound", r.bound}, {"ok", r.ok}});
        }
    } else if (kind == "levy") {
        const auto p = probe_levy_sum(cfg);
        j["states"] = p.states;
        j["window"] = p.window;
        j["samples"] = p.samples;
        j["source"] = source_json(p.source);
        j["quantile_levels"] = p.quantile_levels;
        j["small_quantiles"] = p.small_quantiles;
        j["large_quantiles"] = p.large_quantiles;
        j["ks"] = p.ks;
        j["raw_median_small"] = p.raw_median_small;
        j["raw_median_large"] = p.raw_median_large;
        j["raw_ratio"] = p.raw_ratio;
    } else if (kind == "contraction") {
        const auto p = probe_contraction(cfg);
        j["k"] = p.k;
        j["w"] = p.w;
        j["exponent"] = p.exponent;
        for (const auto& r : p.rows) {
            j["rows"].push_back({{"states", r.states}, {"runs", r.runs}, {"coalesced", r.coalesced},
                                 {"mean", r.mean}, {"se", r.se}, {"median", r.median},
                                 {"p90", r.p90}, {"mean_over_nlogn", r.mean_over_nlogn}});
        }
        j["coupon"] = {{"positions", p.coupon.positions}, {"runs", p.coupon.runs},
                       {"steps", p.coupon.steps},         {"observed", p.coupon.observed},
                       {"expected", p.coupon.expected},   {"se", p.coupon.se}};
    } else {
        throw ParameterError("unknown probe '" + kind + "'");
    }
    emit(cfg, j.dump(2) + "\n", out);
    return 0;
}

int run_compare(const ExperimentConfig& cfg, double alpha, std::ostream& out) {
    const DistPtr dist = make_distribution(cfg.family, cfg.n_list.front(), cfg.params);
    std::vector<std::optional<BDKernel>> slots(cfg.reps);
    parallel_for(cfg.reps, cfg.threads,
                 [&](std::size_t r) { slots[r] = lazy(sample_kernel(cfg, dist, r), 0.5); });
    std::vector<BDKernel> kernels;
    for (auto& s : slots) kernels.push_back(std::move(*s));
    const ComparisonReport rep = comparison_diagnostic(dist, kernels, alpha);
    const XnChoice xn = find_xn(dist, alpha);
    const MetropolisReport& m = rep.metropolis;
    Json j;
    j["metropolis"] = {{"u", m.u},           {"m", m.m},
                       {"v", m.v},           {"hit_up", real(m.hit_up)},
                       {"hit_down", real(m.hit_down)}, {"tau_met", real(m.tau_met)},
                       {"gap_met", real(m.gap_met)},   {"B_met", real(m.b_met)},
                       {"product_met", real(m.product_met)}};
    j["x_n"] = {{"index", xn.x_n},
                {"side", xn.side == XnSide::below_median ? "below_median" : "above_median"},
                {"sum", real(xn.sum_value)},
                {"alpha_achieved", real(xn.alpha_achieved)}};
    j["alpha"] = alpha;
    j["threshold"] = rep.threshold;
    j["exceed_count"] = rep.exceed_count;
    j["proxy_used"] = true;
    j["quantile_levels"] = rep.quantile_levels;
    j["ratio_quantiles"] = rep.ratio_quantiles;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        j["rows"].push_back({{"rep_id", i}, {"gap", real(r.gap)}, {"tau_proxy", real(r.tau_proxy)},
                             {"product", real(r.product)}, {"ratio", real(r.ratio)},
                             {"exceeds", r.exceeds}});
    }
    emit(cfg, j.dump(2) + "\n", out);
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random birth-and-death chain experiments"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file mirroring the long flags");

    CliArgs a;
    const std::vector<std::string> families = {"uniform", "geometric", "if", "binomial", "explicit"};
    app.add_option("--family", a.family, "Stationary distribution family")
        ->check(CLI::IsMember(families));
    app.add_option("--n", a.n, "Comma-separated n values");
    app.add_option("--masses", a.masses, "Comma-separated masses for the explicit family");
    app.add_option("--a", a.a, "Decay base for geometric and IF families");
    app.add_option("--eps", a.eps, "Flat-window exponent for the IF family");
    app.add_option("--k", a.k, "Block size");
    app.add_option("--w", a.w, "End-block weight");
    app.add_option("--steps", a.steps, "Sampler updates (default 20 N ln N)");
    app.add_option("--burnin", a.burnin, "Updates discarded before recording (sample)");
    app.add_option("--thin", a.thin, "Keep every thin-th update");
    app.add_option("--reps", a.reps, "Replicates per n");
    app.add_option("--seed", a.seed, "Master seed");
    app.add_option("--delta", a.delta, "Quantile level for the hitting proxy");
    app.add_flag("--exact-tau", a.exact_tau, "Compute tau(1/4) exactly when feasible");
    app.add_flag("--exhaustive-starts", a.exhaustive, "Use every start state for tau");
    app.add_option("--out", a.out, "Output path (default stdout)");
    app.add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", a.threads, "Worker threads (0 = all cores)");
    app.add_flag("--timing", a.timing, "Record per-replicate runtime");
    app.add_option("--samples", a.samples, "Retained samples for probes");
    app.add_option("--coordinate", a.coordinate, "Probe coordinate (default: middle)");
    app.add_option("--sampler", a.sampler, "Probe sampler")->check(CLI::IsMember({"auto", "gibbs", "oracle"}));
    app.add_option("--window", a.window, "Window length for the Levy probe");
    app.add_option("--horizon", a.horizon, "Step cap for exact mixing times");
    app.add_option("--alpha", a.alpha, "Comparison level in (0, 1]");
    app.add_option("--tail-grid", a.tail_grid, "Comma-separated x values for the tail probe");
    app.add_option("--d-values", a.d_values, "Comma-separated D values for the structure probe");
    app.add_option("--coupon-c", a.coupon_c, "Offset c for the coupon-collector check");

    auto* sample = app.add_subcommand("sample", "Run the Gibbs sampler and print retained states");
    auto* analyze_cmd = app.add_subcommand("analyze", "Sample one kernel and print its analysis");
    auto* ensemble = app.add_subcommand("ensemble", "Sample and analyse many kernels");
    auto* probe = app.add_subcommand("probe", "Statistical probes");
    std::string probe_kind;
    probe->add_option("kind", probe_kind, "Probe name")
        ->required()
        ->check(CLI::IsMember({"marginal", "tail", "markov", "structure", "levy", "contraction"}));
    auto* compare = app.add_subcommand("compare-metropolis", "Compare sampled kernels to Metropolis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    ExperimentConfig cfg;
    try {
        cfg = to_config(a);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        if (sample->parsed()) return run_sample(cfg, out);
        if (analyze_cmd->parsed()) return run_analyze(cfg, out);
        if (ensemble->parsed()) return run_ensemble_cmd(cfg, out);
        if (probe->parsed()) return run_probe(probe_kind, cfg, out);
        if (compare->parsed()) return run_compare(cfg, a.alpha, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace bdcutoff
