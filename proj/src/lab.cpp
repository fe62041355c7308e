#include "bdcutoff/lab.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "bdcutoff/errors.hpp"
#include "bdcutoff/kernel.hpp"
#include "bdcutoff/rng.hpp"
#include "bdcutoff/sampler.hpp"

namespace bdcutoff {

namespace {

constexpr const char* kColumns[] = {"n",        "family",         "rep_id",
                                    "seed_sub", "gap",            "B_plus",
                                    "B_minus",  "tau_or_proxy",   "proxy_flag",
                                    "cutoff_product", "max_recip_superdiag", "runtime_ms",
                                    "error"};
constexpr std::size_t kColumnCount = std::size(kColumns);

bool same_bits(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

// Splits CSV text into rows of fields; quoted fields may contain commas,
// doubled quotes and line breaks. Lines starting with '#' are skipped.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            ++i;
            continue;
        }
        if (text[i] == '\n' || text[i] == '\r') {
            ++i;
            continue;
        }
        std::vector<std::string> row;
        std::string field;
        bool quoted = false;
        bool done = false;
        while (!done) {
            if (i >= text.size()) {
                if (quoted) throw ParameterError("CSV: unterminated quoted field");
                row.push_back(std::move(field));
                break;
            }
            const char ch = text[i++];
            if (quoted) {
                if (ch == '"') {
                    if (i < text.size() && text[i] == '"') {
                        field += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field += ch;
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                row.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n' || ch == '\r') {
                if (ch == '\r' && i < text.size() && text[i] == '\n') ++i;
                row.push_back(std::move(field));
                done = true;
            } else {
                field += ch;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::uint64_t parse_u64(std::string_view token) {
    const std::string s(token);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno != 0 || s.front() == '-') {
        throw ParameterError("not an unsigned integer: '" + s + "'");
    }
    return v;
}

nlohmann::ordered_json json_real(double x) {
    if (std::isfinite(x)) return x;
    return format_real(x);
}

}  // namespace

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ParameterError("unknown output format '" + std::string(name) + "'");
}

SamplerMode parse_sampler_mode(std::string_view name) {
    if (name == "auto") return SamplerMode::automatic;
    if (name == "gibbs") return SamplerMode::gibbs;
    if (name == "oracle") return SamplerMode::oracle;
    throw ParameterError("unknown sampler mode '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (n_list.empty()) throw ParameterError("n list must not be empty");
    for (std::size_t n : n_list) {
        if (n < 2) throw ParameterError("every n must be at least 2");
    }
    if (k < 1) throw ParameterError("block size must be at least 1");
    if (!(w > 0.0)) throw ParameterError("endpoint weight must be positive");
    if (!(delta > 0.5 && delta < 1.0)) throw ParameterError("delta must lie in (1/2, 1)");
    if (bins < 1) throw ParameterError("bins must be positive");
    for (double x : tail_grid) {
        if (!(x > 0.0)) throw ParameterError("tail grid values must be positive");
    }
    for (double d : d_values) {
        if (!(d > 3.0)) throw ParameterError("smallness D values must exceed 3");
    }
}

AnalysisOptions ExperimentConfig::analysis_options() const {
    AnalysisOptions o;
    o.delta = delta;
    o.exact_tau = exact_tau;
    o.mixing.horizon = horizon;
    o.mixing.starts = exhaustive_starts ? StartSet::all_states : StartSet::endpoints;
    return o;
}

std::uint64_t equilibration_budget(std::size_t states) {
    const double n = static_cast<double>(states);
    return static_cast<std::uint64_t>(std::ceil(20.0 * n * std::log(n)));
}

std::uint64_t effective_budget(const ExperimentConfig& config, std::size_t states) {
    return config.budget > 0 ? config.budget : equilibration_budget(states);
}

bool operator==(const EnsembleRecord& a, const EnsembleRecord& b) {
    return a.n == b.n && a.family == b.family && a.rep_id == b.rep_id &&
           a.seed_sub == b.seed_sub && same_bits(a.gap, b.gap) && same_bits(a.B_plus, b.B_plus) &&
           same_bits(a.B_minus, b.B_minus) && same_bits(a.tau_or_proxy, b.tau_or_proxy) &&
           a.proxy_flag == b.proxy_flag && same_bits(a.cutoff_product, b.cutoff_product) &&
           same_bits(a.max_recip_superdiag, b.max_recip_superdiag) &&
           same_bits(a.runtime_ms, b.runtime_ms) && a.error == b.error;
}

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_real(std::string_view token) {
    if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (token == "inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    const std::string s(token);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParameterError("not a real number: '" + s + "'");
    return v;
}

std::string records_to_csv(const std::vector<EnsembleRecord>& records) {
    std::string out(kCsvSchemaTag);
    out += '\n';
    for (std::size_t i = 0; i < kColumnCount; ++i) {
        if (i) out += ',';
        out += kColumns[i];
    }
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.n) + ',' + csv_field(r.family) + ',' + std::to_string(r.rep_id) +
               ',' + std::to_string(r.seed_sub) + ',' + format_real(r.gap) + ',' +
               format_real(r.B_plus) + ',' + format_real(r.B_minus) + ',' +
               format_real(r.tau_or_proxy) + ',' + (r.proxy_flag ? "1" : "0") + ',' +
               format_real(r.cutoff_product) + ',' + format_real(r.max_recip_superdiag) + ',' +
               format_real(r.runtime_ms) + ',' + csv_field(r.error) + '\n';
    }
    return out;
}

std::vector<EnsembleRecord> records_from_csv(std::string_view text) {
    if (text.substr(0, kCsvSchemaTag.size()) != kCsvSchemaTag) {
        throw ParameterError("CSV: missing schema tag");
    }
    const auto rows = split_csv(text);
    if (rows.empty()) throw ParameterError("CSV: missing header row");
    const auto& header = rows.front();
    if (header.size() != kColumnCount) throw ParameterError("CSV: unexpected column count");
    for (std::size_t i = 0; i < kColumnCount; ++i) {
        if (header[i] != kColumns[i]) throw ParameterError("CSV: unexpected column '" + header[i] + "'");
    }
    std::vector<EnsembleRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != kColumnCount) {
            throw ParameterError("CSV: row " + std::to_string(r) + " has the wrong field count");
        }
        EnsembleRecord rec;
        rec.n = parse_u64(f[0]);
        rec.family = f[1];
        rec.rep_id = parse_u64(f[2]);
        rec.seed_sub = parse_u64(f[3]);
        rec.gap = parse_real(f[4]);
        rec.B_plus = parse_real(f[5]);
        rec.B_minus = parse_real(f[6]);
        rec.tau_or_proxy = parse_real(f[7]);
        if (f[8] != "0" && f[8] != "1") throw ParameterError("CSV: proxy_flag must be 0 or 1");
        rec.proxy_flag = f[8] == "1";
        rec.cutoff_product = parse_real(f[9]);
        rec.max_recip_superdiag = parse_real(f[10]);
        rec.runtime_ms = parse_real(f[11]);
        rec.error = f[12];
        out.push_back(std::move(rec));
    }
    return out;
}

std::string records_to_json(const std::vector<EnsembleRecord>& records) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json o;
        o["n"] = r.n;
        o["family"] = r.family;
        o["rep_id"] = r.rep_id;
        o["seed_sub"] = r.seed_sub;
        o["gap"] = json_real(r.gap);
        o["B_plus"] = json_real(r.B_plus);
        o["B_minus"] = json_real(r.B_minus);
        o["tau_or_proxy"] = json_real(r.tau_or_proxy);
        o["proxy_flag"] = r.proxy_flag;
        o["cutoff_product"] = json_real(r.cutoff_product);
        o["max_recip_superdiag"] = json_real(r.max_recip_superdiag);
        o["runtime_ms"] = json_real(r.runtime_ms);
        o["error"] = r.error;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<EnsembleRecord> run_ensemble(const ExperimentConfig& config) {
    config.validate();
    std::vector<DistPtr> dists;
    for (std::size_t n : config.n_list) dists.push_back(make_distribution(config.family, n, config.params));

    const std::size_t tasks = config.n_list.size() * config.reps;
    std::vector<EnsembleRecord> records(tasks);
    const AnalysisOptions options = config.analysis_options();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    parallel_for(tasks, config.threads, [&](std::size_t t) {
        const std::size_t which = t / config.reps;
        const std::size_t rep = t % config.reps;
        const DistPtr& dist = dists[which];
        EnsembleRecord& rec = records[t];
        rec.n = config.n_list[which];
        rec.family = std::string(family_name(config.family));
        rec.rep_id = rep;
        rec.seed_sub = derive_stream(config.seed, rec.n, rep);
        const auto start = std::chrono::steady_clock::now();
        try {
            SamplerConfig sc;
            sc.dist = dist;
            sc.k = std::min(config.k, dist->size() - 1);
            sc.w = config.w;
            sc.steps = effective_budget(config, dist->size());
            sc.burnin = sc.steps;  // only the final state is kept
            sc.seed = rec.seed_sub;
            sc.max_rejection_tries = config.max_rejection_tries;
            const std::vector<double> c = run_gibbs(sc, nullptr);
            const BDKernel kernel(dist, c);
            double max_recip = 0;
            for (double x : c) max_recip = std::max(max_recip, x > 0 ? 1.0 / x : std::numeric_limits<double>::infinity());
            rec.max_recip_superdiag = max_recip;
            const AnalysisReport rep_ = analyze(lazy(kernel, 0.5), options);
            rec.gap = rep_.gap;
            rec.B_plus = rep_.miclo.b_plus;
            rec.B_minus = rep_.miclo.b_minus;
            rec.tau_or_proxy = rep_.tau ? static_cast<double>(*rep_.tau) : rep_.tau_proxy;
            rec.proxy_flag = rep_.cutoff_is_proxy;
            rec.cutoff_product = rep_.cutoff_product;
        } catch (const std::exception& e) {
            rec.gap = rec.B_plus = rec.B_minus = rec.tau_or_proxy = rec.cutoff_product = nan;
            if (rec.max_recip_superdiag == 0) rec.max_recip_superdiag = nan;
            rec.error = e.what();
        }
        if (config.record_runtime) {
            rec.runtime_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        }
    });

    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.n != b.n ? a.n < b.n : a.rep_id < b.rep_id;
    });
    return records;
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(
                        static_cast<unsigned long long>(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move output into '" + path + "': " + ec.message());
    }
}

}  // namespace bdcutoff
