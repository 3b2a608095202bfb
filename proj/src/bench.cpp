#include "fsfm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fsfm/embedding.hpp"
#include "fsfm/error.hpp"
#include "fsfm/forgetting.hpp"

namespace fsfm {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point start, Clock::time_point end) {
    return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(end - start).count());
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string retention_key(Category c) { return "retention_" + lower(to_string(c)); }

std::string number(double v) { return json(v).dump(); }

Timestamp latest_timestamp(const std::vector<RecordDraft>& corpus) {
    Timestamp latest{0};
    for (const auto& d : corpus) {
        if (d.created_at) latest = std::max(latest, *d.created_at);
        if (d.last_accessed_at) latest = std::max(latest, *d.last_accessed_at);
    }
    return latest;
}

std::map<std::string, double> category_retention(const std::vector<RecordDraft>& corpus, const MemoryStore& store) {
    std::unordered_set<std::string> present;
    for (const auto& r : store.records()) present.insert(r.id);
    std::array<std::int64_t, 5> total{};
    std::array<std::int64_t, 5> kept{};
    for (const auto& d : corpus) {
        const auto slot = static_cast<std::size_t>(d.category.value_or(Category::General));
        ++total[slot];
        if (present.contains(d.id)) ++kept[slot];
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < 5; ++i) {
        if (total[i] > 0) out[retention_key(kAllCategories[i])] = static_cast<double>(kept[i]) / static_cast<double>(total[i]);
    }
    return out;
}

json summary_json(const Summary& s) {
    return json{{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"p95", s.p95}};
}

Summary summary_from(const json& j) {
    return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("min").get<double>(),
            j.at("max").get<double>(), j.at("p95").get<double>()};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

struct Arm {
    MemoryStore store;
    RunMetrics metrics;
    std::vector<double> latencies;
    double wall_ns = 0.0;
};

void trace_batch(Arm& arm, const std::string& phase, std::int64_t batch, const std::vector<std::vector<double>>& embedded,
                 std::size_t& cursor, std::int64_t monitor, std::int64_t k) {
    const auto stats = arm.store.usage_stats();
    BatchTrace t{phase, batch, stats.longterm, stats.capacity_fraction, 0.0};
    if (monitor > 0 && !embedded.empty()) {
        double sum = 0.0;
        for (std::int64_t i = 0; i < monitor; ++i) {
            sum += static_cast<double>(arm.store.query(embedded[(cursor + static_cast<std::size_t>(i)) % embedded.size()], k).latency_ns);
        }
        t.mean_latency_ns = sum / static_cast<double>(monitor);
    }
    if (phase == "validation") {
        arm.metrics.max_batch_storage_fraction = std::max(arm.metrics.max_batch_storage_fraction, t.storage_fraction);
    }
    arm.metrics.trace.push_back(std::move(t));
}

}  // namespace

BenchManifest default_manifest() {
    BenchManifest m;
    m.corpus = CorpusSpec{};
    m.config = PolicyConfig{};
    m.config.capacity = m.corpus.total;
    m.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return m;
}

json to_json(const BenchManifest& m) {
    return json{{"corpus", to_json(m.corpus)},
                {"config", to_json(m.config)},
                {"seeds", m.seeds},
                {"query_count", m.query_count},
                {"query_seed", m.query_seed},
                {"query_k", m.query_k},
                {"warmup_fraction", m.warmup_fraction},
                {"monitor_queries", m.monitor_queries},
                {"code_version", m.code_version}};
}

BenchManifest manifest_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "manifest must be a JSON object");
    static const std::set<std::string> kKeys = {"corpus", "config", "seeds", "query_count", "query_seed",
                                                "query_k", "warmup_fraction", "monitor_queries", "code_version"};
    for (const auto& [key, value] : j.items()) {
        if (!kKeys.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown manifest key '" + key + "'");
    }
    BenchManifest m = default_manifest();
    try {
        if (j.contains("corpus")) m.corpus = corpus_spec_from_json(j.at("corpus"));
        if (j.contains("config")) {
            m.config = config_from_json(j.at("config"));
            if (!j.at("config").contains("capacity")) m.config.capacity = m.corpus.total;
        } else {
            m.config.capacity = m.corpus.total;
        }
        if (j.contains("seeds")) m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("query_count")) m.query_count = j.at("query_count").get<std::int64_t>();
        if (j.contains("query_seed")) m.query_seed = j.at("query_seed").get<std::uint64_t>();
        if (j.contains("query_k")) m.query_k = j.at("query_k").get<std::int64_t>();
        if (j.contains("warmup_fraction")) m.warmup_fraction = j.at("warmup_fraction").get<double>();
        if (j.contains("monitor_queries")) m.monitor_queries = j.at("monitor_queries").get<std::int64_t>();
        if (j.contains("code_version")) m.code_version = j.at("code_version").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("manifest: ") + e.what());
    }
    if (m.seeds.empty()) throw Error(ErrorCode::InvalidConfig, "manifest needs at least one seed");
    if (m.query_count < 1 || m.query_k < 1 || m.monitor_queries < 0) {
        throw Error(ErrorCode::InvalidConfig, "query_count and query_k must be >= 1, monitor_queries >= 0");
    }
    if (!(m.warmup_fraction >= 0.0 && m.warmup_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "warmup_fraction must lie in [0, 1)");
    }
    m.config = validated(m.config);
    allocate_counts(m.corpus);
    return m;
}

std::map<std::string, double> metric_values(const RunMetrics& run) {
    std::map<std::string, double> out{{"latency_mean_ns", run.latency_ns.mean},
                                      {"latency_p95_ns", run.latency_ns.p95},
                                      {"throughput_qpm", run.throughput_qpm},
                                      {"storage_fraction", run.storage_fraction}};
    out.insert(run.retention.begin(), run.retention.end());
    return out;
}

bool is_timing_metric(const std::string& name) {
    return name.starts_with("latency_") || name == "throughput_qpm";
}

Significance compare_samples(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) return {};
    try {
        const auto r = welch_t_test(a, b);
        return {r.t, r.p_value};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateSamples) throw;
        if (mean(a) == mean(b)) return {0.0, 1.0};
        return {std::nullopt, 0.0};
    }
}

void aggregate_report(BenchReport& report) {
    std::map<std::string, std::vector<double>> columns;
    for (const auto& run : report.per_run) {
        for (const auto& [name, value] : metric_values(run)) columns[name].push_back(value);
    }
    report.aggregate.clear();
    for (const auto& [name, values] : columns) {
        const auto s = summarize(values);
        report.aggregate[name] = {s.mean, s.std};
    }
}

AbResult run_ab(const std::vector<RecordDraft>& corpus, const std::vector<std::string>& queries,
                const PolicyConfig& config, const std::vector<std::uint64_t>& seeds, const BenchManifest& options) {
    if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
    const PolicyConfig cfg = validated(config);
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t warm_count =
        static_cast<std::size_t>(std::floor(options.warmup_fraction * static_cast<double>(corpus.size()) + 1e-9));
    const Timestamp start = latest_timestamp(corpus);

    std::vector<std::vector<double>> embedded;
    embedded.reserve(queries.size());
    for (const auto& q : queries) embedded.push_back(embed(q, cfg.embedding_dim, cfg.rng_seed));

    AbResult result;
    result.fsfm.system = "fsfm";
    result.baseline.system = "baseline";

    for (const std::uint64_t seed : seeds) {
        std::vector<RecordDraft> order = corpus;
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);

        Arm fsfm{MemoryStore(cfg), {}, {}, 0.0};
        Arm base{MemoryStore(cfg), {}, {}, 0.0};
        fsfm.metrics.seed = base.metrics.seed = seed;
        std::size_t cursor = 0;
        std::int64_t batch_index = 0;

        auto feed = [&](std::size_t begin, std::size_t end, bool validation) {
            for (std::size_t i = begin; i < end; i += batch) {
                const std::size_t stop = std::min(end, i + batch);
                const std::span<const RecordDraft> drafts(order.data() + i, stop - i);
                const Timestamp now{start.ms + batch_index * 1000};
                fsfm.store.ingest_batch(drafts, now, validation ? IngestMode::Forgetting : IngestMode::Retain);
                base.store.ingest_batch(drafts, now, IngestMode::Retain);
                const std::string phase = validation ? "validation" : "warmup";
                trace_batch(fsfm, phase, batch_index, embedded, cursor, options.monitor_queries, options.query_k);
                trace_batch(base, phase, batch_index, embedded, cursor, options.monitor_queries, options.query_k);
                if (options.monitor_queries > 0 && !embedded.empty()) {
                    cursor = (cursor + static_cast<std::size_t>(options.monitor_queries)) % embedded.size();
                }
                ++batch_index;
            }
        };
        feed(0, warm_count, false);
        feed(warm_count, order.size(), true);

        // Interleave the arms query by query so drift affects both equally.
        for (const auto& q : embedded) {
            for (Arm* arm : {&fsfm, &base}) {
                const auto t0 = Clock::now();
                const auto r = arm->store.query(q, options.query_k);
                arm->wall_ns += elapsed_ns(t0, Clock::now());
                arm->latencies.push_back(static_cast<double>(r.latency_ns));
            }
        }

        for (Arm* arm : {&fsfm, &base}) {
            auto& m = arm->metrics;
            m.latency_ns = summarize(arm->latencies);
            m.throughput_qpm = arm->wall_ns > 0.0 ? static_cast<double>(arm->latencies.size()) * 60e9 / arm->wall_ns : 0.0;
            const auto stats = arm->store.usage_stats();
            m.storage_fraction = stats.capacity_fraction;
            m.longterm_count = stats.longterm;
            m.retention = category_retention(corpus, arm->store);
        }
        result.fsfm.per_run.push_back(std::move(fsfm.metrics));
        result.baseline.per_run.push_back(std::move(base.metrics));
    }

    aggregate_report(result.fsfm);
    aggregate_report(result.baseline);

    std::map<std::string, std::vector<double>> a_cols;
    std::map<std::string, std::vector<double>> b_cols;
    for (const auto& run : result.fsfm.per_run) {
        for (const auto& [k, v] : metric_values(run)) a_cols[k].push_back(v);
    }
    for (const auto& run : result.baseline.per_run) {
        for (const auto& [k, v] : metric_values(run)) b_cols[k].push_back(v);
    }
    for (const auto& [name, a] : a_cols) {
        auto it = b_cols.find(name);
        if (it == b_cols.end()) continue;
        const auto sig = compare_samples(a, it->second);
        result.fsfm.significance[name] = sig;
        result.baseline.significance[name] = sig;
    }
    return result;
}

AbResult run_manifest(const BenchManifest& manifest) {
    const auto corpus = generate_corpus(manifest.corpus);
    const auto queries = generate_queries(manifest.query_count, manifest.query_seed);
    return run_ab(corpus, queries, manifest.config, manifest.seeds, manifest);
}

BenchReport without_timing(BenchReport report) {
    for (auto& run : report.per_run) {
        run.latency_ns = {};
        run.throughput_qpm = 0.0;
        for (auto& t : run.trace) t.mean_latency_ns = 0.0;
    }
    for (auto it = report.aggregate.begin(); it != report.aggregate.end();) {
        it = is_timing_metric(it->first) ? report.aggregate.erase(it) : std::next(it);
    }
    for (auto it = report.significance.begin(); it != report.significance.end();) {
        it = is_timing_metric(it->first) ? report.significance.erase(it) : std::next(it);
    }
    return report;
}

json to_json(const BenchReport& report) {
    json runs = json::array();
    for (const auto& r : report.per_run) {
        json trace = json::array();
        for (const auto& t : r.trace) {
            trace.push_back({{"phase", t.phase},
                             {"batch", t.batch},
                             {"longterm_count", t.longterm_count},
                             {"storage_fraction", t.storage_fraction},
                             {"mean_latency_ns", t.mean_latency_ns}});
        }
        runs.push_back({{"seed", r.seed},
                        {"latency_ns", summary_json(r.latency_ns)},
                        {"throughput_qpm", r.throughput_qpm},
                        {"storage_fraction", r.storage_fraction},
                        {"max_batch_storage_fraction", r.max_batch_storage_fraction},
                        {"longterm_count", r.longterm_count},
                        {"retention", r.retention},
                        {"trace", trace}});
    }
    json aggregate = json::object();
    for (const auto& [name, a] : report.aggregate) aggregate[name] = {{"mean", a.mean}, {"std", a.std}};
    json significance = json::object();
    for (const auto& [name, s] : report.significance) {
        significance[name] = {{"t", optional_json(s.t)}, {"p_value", optional_json(s.p_value)}};
    }
    return json{{"system", report.system}, {"per_run", runs}, {"aggregate", aggregate}, {"significance", significance}};
}

BenchReport report_from_json(const json& j) {
    BenchReport report;
    try {
        report.system = j.at("system").get<std::string>();
        for (const auto& r : j.at("per_run")) {
            RunMetrics m;
            m.seed = r.at("seed").get<std::uint64_t>();
            m.latency_ns = summary_from(r.at("latency_ns"));
            m.throughput_qpm = r.at("throughput_qpm").get<double>();
            m.storage_fraction = r.at("storage_fraction").get<double>();
            m.max_batch_storage_fraction = r.at("max_batch_storage_fraction").get<double>();
            m.longterm_count = r.at("longterm_count").get<std::int64_t>();
            m.retention = r.at("retention").get<std::map<std::string, double>>();
            for (const auto& t : r.at("trace")) {
                m.trace.push_back({t.at("phase").get<std::string>(), t.at("batch").get<std::int64_t>(),
                                   t.at("longterm_count").get<std::int64_t>(), t.at("storage_fraction").get<double>(),
                                   t.at("mean_latency_ns").get<double>()});
            }
            report.per_run.push_back(std::move(m));
        }
        for (const auto& [name, a] : j.at("aggregate").items()) {
            report.aggregate[name] = {a.at("mean").get<double>(), a.at("std").get<double>()};
        }
        for (const auto& [name, s] : j.at("significance").items()) {
            report.significance[name] = {optional_from(s.at("t")), optional_from(s.at("p_value"))};
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, std::string("report: ") + e.what());
    }
    return report;
}

std::string report_csv(const BenchReport& report) {
    if (report.per_run.empty()) throw Error(ErrorCode::IncompleteReport, "report has no runs");
    std::ostringstream out;
    out << "metric,system,mean,std,p_value\n";
    for (const auto& [name, a] : report.aggregate) {
        out << name << ',' << report.system << ',' << number(a.mean) << ',' << number(a.std) << ',';
        if (auto it = report.significance.find(name); it != report.significance.end() && it->second.p_value) {
            out << number(*it->second.p_value);
        }
        out << '\n';
    }
    return out.str();
}

std::string runs_csv(const BenchReport& report) {
    if (report.per_run.empty()) throw Error(ErrorCode::IncompleteReport, "report has no runs");
    std::ostringstream out;
    out << "run,seed,latency_mean_ns,latency_std_ns,latency_min_ns,latency_max_ns,latency_p95_ns,throughput_qpm,"
           "storage_fraction,max_batch_storage_fraction,longterm_count";
    for (Category c : kAllCategories) out << ',' << retention_key(c);
    out << '\n';
    for (std::size_t i = 0; i < report.per_run.size(); ++i) {
        const auto& r = report.per_run[i];
        out << i << ',' << r.seed << ',' << number(r.latency_ns.mean) << ',' << number(r.latency_ns.std) << ','
            << number(r.latency_ns.min) << ',' << number(r.latency_ns.max) << ',' << number(r.latency_ns.p95) << ','
            << number(r.throughput_qpm) << ',' << number(r.storage_fraction) << ','
            << number(r.max_batch_storage_fraction) << ',' << r.longterm_count;
        for (Category c : kAllCategories) {
            out << ',';
            if (auto it = r.retention.find(retention_key(c)); it != r.retention.end()) out << number(it->second);
        }
        out << '\n';
    }
    return out.str();
}

void export_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path) {
    if (report.per_run.empty()) throw Error(ErrorCode::IncompleteReport, "report has no runs");
    const std::string body = format == ReportFormat::Csv ? report_csv(report) : to_json(report).dump(2) + "\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << body;
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::OldFirst: return "old_first";
        case Strategy::Fsfm: return "fsfm";
    }
    return "?";
}

std::vector<StrategyRound> run_strategy_comparison(const std::vector<RecordDraft>& corpus,
                                                   const std::vector<std::string>& queries,
                                                   const PolicyConfig& config, const std::vector<Strategy>& strategies,
                                                   const std::vector<std::uint64_t>& seeds, Timestamp now,
                                                   const StrategyOptions& options) {
    PolicyConfig staging_cfg = validated(config);
    staging_cfg.capacity = std::max<std::int64_t>(staging_cfg.capacity, static_cast<std::int64_t>(corpus.size()));
    MemoryStore staging(staging_cfg);
    const auto batch = static_cast<std::size_t>(staging_cfg.batch_size);
    for (std::size_t i = 0; i < corpus.size(); i += batch) {
        const std::size_t stop = std::min(corpus.size(), i + batch);
        staging.ingest_batch(std::span<const RecordDraft>(corpus.data() + i, stop - i), now, IngestMode::Retain);
    }
    const auto records = staging.records(Layer::LongTerm);
    const auto n = static_cast<std::int64_t>(records.size());
    const auto retain = static_cast<std::int64_t>(std::floor(config.capacity_fraction * static_cast<double>(n) + 1e-9));
    const std::int64_t budget = n - retain;

    std::unordered_map<std::string, Category> truth;
    for (const auto& d : corpus) truth.emplace(d.id, d.category.value_or(Category::General));
    std::int64_t important_total = 0;
    std::int64_t dangerous_total = 0;
    for (const auto& r : records) {
        important_total += truth.at(r.id) == Category::Important;
        dangerous_total += truth.at(r.id) == Category::Dangerous;
    }

    std::vector<std::vector<double>> embedded;
    const auto speed_queries = std::min<std::int64_t>(options.speed_queries, static_cast<std::int64_t>(queries.size()));
    for (std::int64_t i = 0; i < speed_queries; ++i) {
        embedded.push_back(embed(queries[static_cast<std::size_t>(i)], config.embedding_dim, config.rng_seed));
    }

    std::vector<ScoredId> scored;
    std::vector<std::string> ids;
    scored.reserve(records.size());
    ids.reserve(records.size());
    for (const auto& r : records) {
        scored.push_back({r.id, refresh_temporal(r, config, now).importance, r.created_at});
        ids.push_back(r.id);
    }
    std::unordered_map<std::string, double> importance;
    for (const auto& s : scored) importance.emplace(s.id, s.importance);

    std::vector<StrategyRound> rounds;
    for (const std::uint64_t seed : seeds) {
        StrategyRound round{seed, {}};
        for (const Strategy strategy : strategies) {
            const auto t0 = Clock::now();
            std::vector<std::string> forget;
            switch (strategy) {
                case Strategy::Fsfm: forget = select_forget_set(scored, retain); break;
                case Strategy::Random: forget = select_random_baseline(ids, budget, seed); break;
                case Strategy::OldFirst: forget = select_old_first_baseline(records, budget); break;
            }
            const double overhead = elapsed_ns(t0, Clock::now());
            if (static_cast<std::int64_t>(forget.size()) != budget) {
                throw std::logic_error("strategy " + std::string(to_string(strategy)) + " broke the pruning budget");
            }

            const std::unordered_set<std::string> gone(forget.begin(), forget.end());
            StrategyMetrics m;
            m.strategy = strategy;
            m.budget = budget;
            m.retained = n - budget;
            m.overhead_ns = overhead;
            std::int64_t important_kept = 0;
            std::int64_t dangerous_kept = 0;
            double mass = 0.0;
            FlatIndex index(static_cast<std::size_t>(config.embedding_dim));
            for (const auto& r : records) {
                if (gone.contains(r.id)) continue;
                const Category c = truth.at(r.id);
                important_kept += c == Category::Important;
                dangerous_kept += c == Category::Dangerous;
                mass += std::max(0.0, importance.at(r.id));
                index.upsert(r.id, r.embedding);
            }
            m.content_retention_accuracy =
                important_total > 0 ? static_cast<double>(important_kept) / static_cast<double>(important_total) : 1.0;
            m.dangerous_retention =
                dangerous_total > 0 ? static_cast<double>(dangerous_kept) / static_cast<double>(dangerous_total) : 0.0;
            m.memory_efficiency = m.retained > 0 ? mass / static_cast<double>(m.retained) : 0.0;

            if (!embedded.empty()) {
                const auto q0 = Clock::now();
                for (const auto& q : embedded) index.search(q, static_cast<std::size_t>(options.query_k));
                const double wall = elapsed_ns(q0, Clock::now());
                m.processing_speed_qpm = wall > 0.0 ? static_cast<double>(embedded.size()) * 60e9 / wall : 0.0;
            }
            round.strategies.push_back(m);
        }
        rounds.push_back(std::move(round));
    }
    return rounds;
}

}  // namespace fsfm
