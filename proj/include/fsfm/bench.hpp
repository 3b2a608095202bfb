#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsfm/config.hpp"
#include "fsfm/corpus.hpp"
#include "fsfm/memory_store.hpp"
#include "fsfm/stats.hpp"

namespace fsfm {

/// Everything needed to reproduce a benchmark run.
struct BenchManifest {
    CorpusSpec corpus;
    PolicyConfig config;
    std::vector<std::uint64_t> seeds;
    std::int64_t query_count = 1000;
    std::uint64_t query_seed = 99;
    std::int64_t query_k = 10;
    double warmup_fraction = 0.7;
    /// Queries timed after every batch (cycling through the workload); 0 disables.
    std::int64_t monitor_queries = 20;
    std::string code_version = "fsfm-1.0";
};

/// Default protocol: 100k-record corpus, capacity equal to the corpus size, seeds 1..10.
BenchManifest default_manifest();

nlohmann::json to_json(const BenchManifest& m);
/// Throws Error{InvalidConfig} on schema violations.
BenchManifest manifest_from_json(const nlohmann::json& j);

struct BatchTrace {
    std::string phase;  // "warmup" or "validation"
    std::int64_t batch = 0;
    std::int64_t longterm_count = 0;
    double storage_fraction = 0.0;
    double mean_latency_ns = 0.0;  // 0 when monitoring is off

    friend bool operator==(const BatchTrace&, const BatchTrace&) = default;
};

struct RunMetrics {
    std::uint64_t seed = 0;
    Summary latency_ns;
    double throughput_qpm = 0.0;
    double storage_fraction = 0.0;
    double max_batch_storage_fraction = 0.0;  // worst value seen after any validation batch
    std::int64_t longterm_count = 0;
    /// Only categories present in the corpus.
    std::map<std::string, double> retention;
    std::vector<BatchTrace> trace;
};

struct MetricAggregate {
    double mean = 0.0;
    double std = 0.0;
};

struct Significance {
    std::optional<double> t;        // undefined for zero-variance comparisons
    std::optional<double> p_value;  // undefined with fewer than two runs
};

struct BenchReport {
    std::string system;  // "fsfm" or "baseline"
    std::vector<RunMetrics> per_run;
    std::map<std::string, MetricAggregate> aggregate;
    std::map<std::string, Significance> significance;  // against the other arm
};

struct AbResult {
    BenchReport fsfm;
    BenchReport baseline;
};

/// Scalar metrics of one run keyed by name: latency_mean_ns, latency_p95_ns,
/// throughput_qpm, storage_fraction, retention_<category>.
std::map<std::string, double> metric_values(const RunMetrics& run);

/// Metric names whose values depend on wall-clock timing.
bool is_timing_metric(const std::string& name);

/// Welch test with the zero-variance cases resolved: equal constants give t = 0, p = 1;
/// different constants give an undefined t and p = 0.
Significance compare_samples(std::span<const double> a, std::span<const double> b);

/// Fills aggregate from per_run.
void aggregate_report(BenchReport& report);

/// A/B protocol: per seed, shuffle the corpus, warm both stores up without forgetting,
/// then stream the rest with forgetting active only in the FSFM store.
AbResult run_ab(const std::vector<RecordDraft>& corpus, const std::vector<std::string>& queries,
                const PolicyConfig& config, const std::vector<std::uint64_t>& seeds,
                const BenchManifest& options = {});

AbResult run_manifest(const BenchManifest& manifest);

/// Copy of `report` with every timing-dependent field zeroed.
BenchReport without_timing(BenchReport report);

nlohmann::json to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { Csv, Json };

/// CSV: header "metric,system,mean,std,p_value", one row per aggregate metric.
/// Throws Error{IncompleteReport} for an empty per-run list and Error{IoFailure}.
void export_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path);
std::string report_csv(const BenchReport& report);
/// One row per run with the scalar metrics as columns.
std::string runs_csv(const BenchReport& report);

enum class Strategy { Random, OldFirst, Fsfm };
std::string_view to_string(Strategy s);

struct StrategyMetrics {
    Strategy strategy = Strategy::Fsfm;
    std::int64_t budget = 0;           // records forgotten
    std::int64_t retained = 0;
    double content_retention_accuracy = 0.0;  // share of Important records kept
    double memory_efficiency = 0.0;   // positive importance mass kept per retained slot
    double processing_speed_qpm = 0.0;
    double overhead_ns = 0.0;         // selection wall time
    double dangerous_retention = 0.0;
};

struct StrategyRound {
    std::uint64_t seed = 0;
    std::vector<StrategyMetrics> strategies;
};

struct StrategyOptions {
    std::int64_t speed_queries = 200;
    std::int64_t query_k = 10;
};

/// Scores the corpus once at `now`, then lets each strategy forget the same number of
/// records to bring the set down to floor(capacity_fraction * |corpus|).
std::vector<StrategyRound> run_strategy_comparison(const std::vector<RecordDraft>& corpus,
                                                   const std::vector<std::string>& queries,
                                                   const PolicyConfig& config, const std::vector<Strategy>& strategies,
                                                   const std::vector<std::uint64_t>& seeds, Timestamp now,
                                                   const StrategyOptions& options = {});

}  // namespace fsfm
