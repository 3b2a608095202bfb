#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsfm/bench.hpp"
#include "fsfm/config.hpp"
#include "fsfm/error.hpp"
#include "fsfm/memory_store.hpp"
#include "fsfm/record_io.hpp"
#include "fsfm/retention.hpp"

namespace fsfm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::optional<double> now;
    std::string store;
    std::string config;
    // ingest
    std::string input;
    // query
    std::string text;
    std::int64_t k = 10;
    // forget
    std::string user;
    bool dangerous = false;
    bool prune = false;
    // simulate
    double lambda = 0.0;
    std::string events;
    double horizon = 0.0;
    double step = 0.1;
    std::string out;
    // bench
    std::string manifest;
};

Timestamp resolve_now(const Options& o) {
    if (o.now) return Timestamp::from_fractional_seconds(*o.now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    return Timestamp{ms};
}

/// Flag, then FSFM_CONFIG, then nothing (caller falls back to the snapshot or defaults).
std::optional<PolicyConfig> explicit_config(const Options& o) {
    if (!o.config.empty()) return load_config(o.config);
    if (const char* env = std::getenv("FSFM_CONFIG"); env != nullptr && *env != '\0') return load_config(env);
    return std::nullopt;
}

fs::path audit_path(const std::string& store) { return store + ".audit.jsonl"; }

MemoryStore open_store(const Options& o, bool create) {
    const auto cfg = explicit_config(o);
    MemoryStore store = [&] {
        if (fs::exists(o.store)) {
            auto snap = read_snapshot(o.store);
            if (cfg) {
                snap.config = validated(*cfg);
                snap.config_digest = config_digest(snap.config);
            }
            return MemoryStore::from_snapshot(std::move(snap));
        }
        if (!create) throw Error(ErrorCode::IoFailure, "store not found: " + o.store);
        return MemoryStore(validated(cfg.value_or(PolicyConfig{})));
    }();
    store.audit() = AuditLog(audit_path(o.store));
    return store;
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
    const Timestamp now = resolve_now(o);
    MemoryStore store = open_store(o, true);
    std::ifstream in(o.input, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read input: " + o.input);

    const auto batch = static_cast<std::size_t>(store.config().batch_size);
    std::int64_t accepted = 0, purged = 0, pruned = 0, dropped = 0, malformed = 0;
    std::vector<RecordDraft> pending;
    auto flush = [&] {
        if (pending.empty()) return;
        const auto r = store.ingest_batch(pending, now);
        accepted += r.accepted;
        purged += r.purged;
        pruned += r.pruned;
        dropped += r.dropped;
        for (const auto& m : r.malformed) err << "record '" << m.id << "': " << m.message << '\n';
        malformed += static_cast<std::int64_t>(r.malformed.size());
        pending.clear();
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            pending.push_back(draft_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            err << "line " << line_no << ": " << e.what() << '\n';
            ++malformed;
            continue;
        }
        if (pending.size() == batch) flush();
    }
    flush();
    store.checkpoint(o.store, now);

    out << json{{"accepted", accepted}, {"purged", purged}, {"pruned", pruned},
                {"dropped", dropped},   {"malformed", malformed}}
               .dump()
        << '\n';
    return malformed > 0 ? kData : kOk;
}

int cmd_query(const Options& o, std::ostream& out) {
    if (o.k < 1) throw Error(ErrorCode::InvalidArgument, "--k must be >= 1");
    if (!fs::exists(o.store)) throw Error(ErrorCode::IoFailure, "store not found: " + o.store);
    const MemoryStore store = MemoryStore::from_snapshot(read_snapshot(o.store));
    if (store.size() == 0) return kOk;
    const auto result = store.query(o.text, o.k);
    for (const auto& hit : result.hits) {
        const auto record = store.get(hit.id);
        char sim[32];
        std::snprintf(sim, sizeof sim, "%.6f", hit.similarity);
        out << "{\"id\":" << json(hit.id).dump() << ",\"similarity\":" << sim << ",\"category\":"
            << json(std::string(to_string(record->category))).dump() << "}\n";
    }
    return kOk;
}

int cmd_forget(const Options& o, std::ostream& out, std::ostream& err) {
    const int modes = (o.user.empty() ? 0 : 1) + (o.dangerous ? 1 : 0) + (o.prune ? 1 : 0);
    if (modes != 1) {
        err << "forget: exactly one of --user, --dangerous, --prune is required\n";
        return kUsage;
    }
    const Timestamp now = resolve_now(o);
    MemoryStore store = open_store(o, false);
    std::vector<ForgetDecision> decisions;
    std::string mode;
    if (!o.user.empty()) {
        mode = "user";
        decisions = store.forget_user(o.user, now).decisions;
    } else if (o.dangerous) {
        mode = "dangerous";
        decisions = store.purge_dangerous(now);
    } else {
        mode = "prune";
        decisions = store.prune(now).forgotten;
    }
    store.checkpoint(o.store, now);
    out << json{{"mode", mode}, {"forgotten", decisions.size()}}.dump() << '\n';
    return kOk;
}

std::vector<ReinforcementEvent> parse_events(const std::string& spec) {
    std::vector<ReinforcementEvent> events;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(' ') == std::string::npos) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "event '" + item + "' is not day:plateau");
        try {
            std::size_t used_day = 0, used_plateau = 0;
            const std::string day = item.substr(0, colon), plateau = item.substr(colon + 1);
            ReinforcementEvent e{std::stod(day, &used_day), std::stod(plateau, &used_plateau)};
            if (used_day != day.size() || used_plateau != plateau.size()) throw std::invalid_argument(item);
            events.push_back(e);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "event '" + item + "' is not day:plateau");
        }
    }
    return events;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const auto trajectory = simulate_staircase(o.lambda, parse_events(o.events), o.horizon, o.step);
    std::ostringstream csv;
    csv << "day,retention\n";
    for (const auto& s : trajectory.samples) csv << json(s.day).dump() << ',' << json(s.retention).dump() << '\n';
    if (o.out.empty()) {
        out << csv.str();
        return kOk;
    }
    std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
    if (!file || !(file << csv.str())) throw Error(ErrorCode::IoFailure, "cannot write " + o.out);
    out << json{{"samples", trajectory.samples.size()}, {"out", o.out}}.dump() << '\n';
    return kOk;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

std::string summary_table(const AbResult& ab) {
    std::ostringstream s;
    s << std::left << std::setw(28) << "metric" << std::setw(30) << "fsfm (mean +/- std)" << std::setw(30)
      << "baseline (mean +/- std)" << "p_value\n";
    for (const auto& [name, a] : ab.fsfm.aggregate) {
        const auto b = ab.baseline.aggregate.find(name);
        s << std::setw(28) << name << std::setw(30) << (fmt(a.mean) + " +/- " + fmt(a.std) + ' ');
        s << std::setw(30) << (b == ab.baseline.aggregate.end() ? "-" : fmt(b->second.mean) + " +/- " + fmt(b->second.std) + ' ');
        const auto sig = ab.fsfm.significance.find(name);
        s << (sig != ab.fsfm.significance.end() && sig->second.p_value ? fmt(*sig->second.p_value) : "-") << '\n';
    }
    return s.str();
}

int cmd_bench(const Options& o, std::ostream& out) {
    BenchManifest manifest;
    {
        std::ifstream in(o.manifest, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoFailure, "cannot read manifest: " + o.manifest);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidConfig, std::string("manifest: ") + e.what());
        }
        manifest = manifest_from_json(j);
    }
    const AbResult ab = run_manifest(manifest);

    const fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
    for (const BenchReport* r : {&ab.fsfm, &ab.baseline}) {
        export_report(*r, ReportFormat::Csv, dir / (r->system + "_report.csv"));
        export_report(*r, ReportFormat::Json, dir / (r->system + "_report.json"));
        std::ofstream runs(dir / (r->system + "_runs.csv"), std::ios::binary | std::ios::trunc);
        runs << runs_csv(*r);
        if (!runs) throw Error(ErrorCode::IoFailure, "cannot write runs csv");
    }
    {
        std::ofstream m(dir / "manifest.json", std::ios::binary | std::ios::trunc);
        m << to_json(manifest).dump(2) << '\n';
    }
    const std::string table = summary_table(ab);
    std::ofstream summary(dir / "summary.txt", std::ios::binary | std::ios::trunc);
    summary << table;
    if (!summary) throw Error(ErrorCode::IoFailure, "cannot write summary");
    out << table;
    return kOk;
}

int exit_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::NonMonotonicEvents:
        case ErrorCode::NegativeTime:
            return kUsage;
        default:
            return kData;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Selective-forgetting memory store"};
    app.name("fsfm");
    app.require_subcommand(1);
    app.add_option("--now", o.now, "Logical time in epoch seconds (default: wall clock)");

    auto* ingest = app.add_subcommand("ingest", "Ingest JSONL drafts into a store");
    ingest->add_option("--store", o.store, "Store snapshot path")->required();
    ingest->add_option("--input", o.input, "JSONL input, one draft per line")->required();
    ingest->add_option("--config", o.config, "Policy config JSON (default: $FSFM_CONFIG)");
    ingest->add_option("--now", o.now, "Logical time in epoch seconds");

    auto* query = app.add_subcommand("query", "Top-k similarity search over long-term memory");
    query->add_option("--store", o.store, "Store snapshot path")->required();
    query->add_option("--text", o.text, "Query text")->required();
    query->add_option("--k", o.k, "Number of hits")->capture_default_str();
    query->add_option("--now", o.now, "Logical time in epoch seconds");

    auto* forget = app.add_subcommand("forget", "Delete by user, purge dangerous records, or prune to capacity");
    forget->add_option("--store", o.store, "Store snapshot path")->required();
    forget->add_option("--user", o.user, "Delete every record owned by this user");
    forget->add_flag("--dangerous", o.dangerous, "Purge dangerous records");
    forget->add_flag("--prune", o.prune, "Run a capacity prune cycle");
    forget->add_option("--config", o.config, "Policy config JSON (default: $FSFM_CONFIG, then the store's)");
    forget->add_option("--now", o.now, "Logical time in epoch seconds");

    auto* simulate = app.add_subcommand("simulate", "Emit a retention trajectory as CSV");
    simulate->add_option("--lambda", o.lambda, "Decay rate per day")->required();
    simulate->add_option("--events", o.events, "Reinforcement events \"day:plateau,...\"");
    simulate->add_option("--horizon", o.horizon, "Last day to sample")->required();
    simulate->add_option("--step", o.step, "Sampling step in days")->capture_default_str();
    simulate->add_option("--out", o.out, "CSV output path (default: standard output)");
    simulate->add_option("--now", o.now, "Accepted for uniformity; unused");

    auto* bench = app.add_subcommand("bench", "Run the FSFM vs baseline benchmark");
    bench->add_option("--manifest", o.manifest, "Benchmark manifest JSON")->required();
    bench->add_option("--out", o.out, "Output directory")->required();
    bench->add_option("--now", o.now, "Accepted for uniformity; the manifest fixes time");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        for (auto* sub : app.get_subcommands({})) out << '\n' << sub->help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << e.what() << '\n';
        return kUsage;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o, out, err);
        if (query->parsed()) return cmd_query(o, out);
        if (forget->parsed()) return cmd_forget(o, out, err);
        if (simulate->parsed()) return cmd_simulate(o, out);
        if (bench->parsed()) return cmd_bench(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        // Every simulate failure is a bad flag value.
        return simulate->parsed() ? kUsage : exit_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

}  // namespace fsfm::cli
